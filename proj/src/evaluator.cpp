#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <string>
#include <unordered_map>

#include "subexp/errors.hpp"
#include "subexp/fidi.hpp"

namespace subexp {
namespace {

using Id = std::uint32_t;
constexpr Id none = std::numeric_limits<Id>::max();
using Op = Expr::Op;

struct Node {
    Op op = Op::constant;
    double value = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;
    std::vector<Id> kids;
    const Table* table = nullptr;
    std::size_t offset = 0;
    std::vector<std::pair<std::size_t, std::size_t>> axes;  // (coord, stride)
    double lo = 0.0;
    double hi = 0.0;
    std::size_t first = std::numeric_limits<std::size_t>::max();  // lowest coordinate referenced
    std::size_t last = 0;                                          // highest coordinate referenced
    bool references(std::size_t k) const { return first <= k && k <= last; }
};

// Hash-consed expression DAG. Structurally equal residuals share an id, which
// is what makes memoizing engine calls by id effective.
class Pool {
public:
    explicit Pool(std::size_t codes) : codes_(codes) {}

    const Node& at(Id id) const { return nodes_[id]; }
    bool is_constant(Id id) const { return nodes_[id].op == Op::constant; }

    Id constant(double c) {
        Node n;
        n.value = c;
        n.lo = n.hi = c;
        return intern(std::move(n));
    }

    Id coord(std::size_t i) {
        Node n;
        n.op = Op::coord;
        n.i = i;
        n.lo = 0.0;
        n.hi = static_cast<double>(codes_ - 1);
        n.first = n.last = i;
        return intern(std::move(n));
    }

    Id eq_state(std::size_t i, std::size_t s) {
        if (s >= codes_) return constant(0.0);
        Node n;
        n.op = Op::eq_state;
        n.i = i;
        n.j = s;
        n.lo = 0.0;
        n.hi = 1.0;
        n.first = n.last = i;
        return intern(std::move(n));
    }

    Id pair_test(Op op, std::size_t i, std::size_t j) {
        if (i == j) return constant(op == Op::eq_coord ? 1.0 : 0.0);
        Node n;
        n.op = op;
        n.i = std::min(i, j);
        n.j = std::max(i, j);
        n.lo = 0.0;
        n.hi = 1.0;
        n.first = n.i;
        n.last = n.j;
        return intern(std::move(n));
    }

    Id sum(const std::vector<Id>& terms) {
        double c = 0.0;
        std::vector<Id> kids;
        for (Id t : terms) {
            const Node& n = nodes_[t];
            if (n.op == Op::constant) {
                c += n.value;
            } else if (n.op == Op::sum) {
                for (Id k : n.kids) {
                    if (is_constant(k)) c += nodes_[k].value;
                    else kids.push_back(k);
                }
            } else {
                kids.push_back(t);
            }
        }
        if (kids.empty()) return constant(c);
        if (kids.size() == 1 && c == 0.0) return kids.front();
        std::sort(kids.begin(), kids.end());
        Node n;
        n.op = Op::sum;
        if (c != 0.0) n.kids.push_back(constant(c));
        n.kids.insert(n.kids.end(), kids.begin(), kids.end());
        finish_bounds(n);
        return intern(std::move(n));
    }

    Id scale(double s, Id kid) {
        const Node& k = nodes_[kid];
        if (s == 0.0) return constant(0.0);
        if (s == 1.0) return kid;
        if (k.op == Op::constant) return constant(s * k.value);
        if (k.op == Op::scale) return scale(s * k.value, k.kids.front());
        Node n;
        n.op = Op::scale;
        n.value = s;
        n.kids = {kid};
        n.lo = s > 0 ? s * k.lo : s * k.hi;
        n.hi = s > 0 ? s * k.hi : s * k.lo;
        n.first = k.first;
        n.last = k.last;
        return intern(std::move(n));
    }

    Id extremum(Op op, const std::vector<Id>& args) {
        const bool is_max = op == Op::max;
        std::vector<Id> kids;
        bool have_c = false;
        double c = 0.0;
        auto absorb = [&](Id id) {
            const Node& n = nodes_[id];
            if (n.op == Op::constant) {
                c = !have_c ? n.value : (is_max ? std::max(c, n.value) : std::min(c, n.value));
                have_c = true;
            } else {
                kids.push_back(id);
            }
        };
        for (Id a : args) {
            if (nodes_[a].op == op) {
                for (Id k : nodes_[a].kids) absorb(k);
            } else {
                absorb(a);
            }
        }
        if (have_c) kids.push_back(constant(c));
        // Drop arguments that can never be the extremum.
        double floor = -std::numeric_limits<double>::infinity();
        for (Id k : kids) floor = is_max ? std::max(floor, nodes_[k].lo) : std::max(floor, -nodes_[k].hi);
        std::vector<Id> kept;
        for (Id k : kids) {
            const double reach = is_max ? nodes_[k].hi : -nodes_[k].lo;
            if (reach >= floor) kept.push_back(k);
        }
        std::sort(kept.begin(), kept.end());
        kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
        // A constant argument that attains the floor dominates everything kept.
        for (Id k : kept) {
            if (is_constant(k) && (is_max ? nodes_[k].value : -nodes_[k].value) == floor) {
                bool dominant = true;
                for (Id o : kept) {
                    const double reach = is_max ? nodes_[o].hi : -nodes_[o].lo;
                    if (o != k && reach > floor) dominant = false;
                }
                if (dominant) return k;
            }
        }
        if (kept.size() == 1) return kept.front();
        Node n;
        n.op = op;
        n.kids = std::move(kept);
        finish_bounds(n);
        return intern(std::move(n));
    }

    Id table(const Table* t, std::size_t offset, std::vector<std::pair<std::size_t, std::size_t>> axes) {
        if (axes.empty()) return constant(t->data[offset]);
        Node n;
        n.op = Op::table;
        n.table = t;
        n.offset = offset;
        n.axes = std::move(axes);
        const auto [lo, hi] = table_bounds(t);
        n.lo = lo;
        n.hi = hi;
        for (const auto& [c, stride] : n.axes) {
            n.first = std::min(n.first, c);
            n.last = std::max(n.last, c);
        }
        return intern(std::move(n));
    }

    Id from_expr(const Expr& e) {
        if (auto it = converted_.find(&e); it != converted_.end()) return it->second;
        Id id = none;
        switch (e.op) {
        case Op::constant: id = constant(e.value); break;
        case Op::coord: id = coord(e.i); break;
        case Op::eq_state: id = eq_state(e.i, e.j); break;
        case Op::eq_coord:
        case Op::neq_coord: id = pair_test(e.op, e.i, e.j); break;
        case Op::sum:
        case Op::min:
        case Op::max: {
            std::vector<Id> kids;
            kids.reserve(e.args.size());
            for (const auto& a : e.args) kids.push_back(from_expr(*a));
            id = e.op == Op::sum ? sum(kids) : extremum(e.op, kids);
            break;
        }
        case Op::scale: id = scale(e.value, from_expr(*e.args.front())); break;
        case Op::table: {
            std::vector<std::pair<std::size_t, std::size_t>> axes(e.coords.size());
            std::size_t stride = 1;
            for (std::size_t a = e.coords.size(); a-- > 0;) {
                if (e.table->extents[a] < codes_)
                    throw InvalidArgument("table extent smaller than the number of state codes");
                axes[a] = {e.coords[a], stride};
                stride *= e.table->extents[a];
            }
            id = table(e.table.get(), 0, std::move(axes));
            break;
        }
        }
        converted_.emplace(&e, id);
        return id;
    }

    /// Fixes coordinate k to `code`.
    Id substitute(Id id, std::size_t k, std::size_t code, std::unordered_map<Id, Id>& memo) {
        const Node& n0 = nodes_[id];
        if (!n0.references(k)) return id;
        if (auto it = memo.find(id); it != memo.end()) return it->second;
        Node n = n0;  // nodes_ may grow below
        Id out = id;
        switch (n.op) {
        case Op::constant: break;
        case Op::coord: out = n.i == k ? constant(static_cast<double>(code)) : id; break;
        case Op::eq_state: out = n.i == k ? constant(code == n.j ? 1.0 : 0.0) : id; break;
        case Op::eq_coord:
        case Op::neq_coord: {
            const std::size_t other = n.i == k ? n.j : n.i;
            const Id same = eq_state(other, code);
            out = n.op == Op::eq_coord ? same : sum({constant(1.0), scale(-1.0, same)});
            break;
        }
        case Op::sum:
        case Op::min:
        case Op::max: {
            std::vector<Id> kids;
            kids.reserve(n.kids.size());
            for (Id c : n.kids) kids.push_back(substitute(c, k, code, memo));
            out = n.op == Op::sum ? sum(kids) : extremum(n.op, kids);
            break;
        }
        case Op::scale: out = scale(n.value, substitute(n.kids.front(), k, code, memo)); break;
        case Op::table: {
            std::size_t offset = n.offset;
            std::vector<std::pair<std::size_t, std::size_t>> axes;
            for (const auto& [c, stride] : n.axes) {
                if (c == k) offset += code * stride;
                else axes.emplace_back(c, stride);
            }
            out = table(n.table, offset, std::move(axes));
            break;
        }
        }
        memo.emplace(id, out);
        return out;
    }

    /// Splits off the additive constant: id == c + rest (rest == none if id is constant).
    std::pair<double, Id> split(Id id) {
        const Node& n = nodes_[id];
        if (n.op == Op::constant) return {n.value, none};
        if (n.op == Op::sum && is_constant(n.kids.front())) {
            const double c = nodes_[n.kids.front()].value;
            std::vector<Id> rest(n.kids.begin() + 1, n.kids.end());
            return {c, sum(rest)};
        }
        if (n.op == Op::scale) {
            const double s = n.value;
            auto [c, rest] = split(n.kids.front());
            if (rest == none) return {s * c, none};
            return {s * c, scale(s, rest)};
        }
        return {0.0, id};
    }

private:
    void finish_bounds(Node& n) const {
        if (n.op == Op::sum) {
            n.lo = n.hi = 0.0;
            for (Id k : n.kids) {
                n.lo += nodes_[k].lo;
                n.hi += nodes_[k].hi;
            }
        } else {
            const bool is_max = n.op == Op::max;
            n.lo = nodes_[n.kids.front()].lo;
            n.hi = nodes_[n.kids.front()].hi;
            for (Id k : n.kids) {
                n.lo = is_max ? std::max(n.lo, nodes_[k].lo) : std::min(n.lo, nodes_[k].lo);
                n.hi = is_max ? std::max(n.hi, nodes_[k].hi) : std::min(n.hi, nodes_[k].hi);
            }
        }
        for (Id k : n.kids) {
            n.first = std::min(n.first, nodes_[k].first);
            n.last = std::max(n.last, nodes_[k].last);
        }
    }

    std::pair<double, double> table_bounds(const Table* t) {
        if (auto it = bounds_.find(t); it != bounds_.end()) return it->second;
        const auto [lo, hi] = std::minmax_element(t->data.begin(), t->data.end());
        return bounds_[t] = {*lo, *hi};
    }

    Id intern(Node n) {
        std::string key;
        auto put = [&key](const auto& v) {
            key.append(reinterpret_cast<const char*>(&v), sizeof(v));
        };
        put(n.op);
        put(n.value);
        put(n.i);
        put(n.j);
        put(n.table);
        put(n.offset);
        for (Id k : n.kids) put(k);
        key.push_back('|');
        for (const auto& a : n.axes) put(a);
        auto [it, inserted] = index_.emplace(std::move(key), static_cast<Id>(nodes_.size()));
        if (inserted) {
            if (nodes_.size() >= none) throw Error("expression pool exhausted");
            nodes_.push_back(std::move(n));
        }
        return it->second;
    }

    std::size_t codes_;
    std::vector<Node> nodes_;
    std::unordered_map<std::string, Id> index_;
    std::unordered_map<const Expr*, Id> converted_;
    std::unordered_map<const Table*, std::pair<double, double>> bounds_;
};

// F(k, R)(x) = value at time k of the residual R given X_{t_k} = x.
// G(k, S)    = T_{t_{k+1} - t_k} F(k + 1, S), memoized per (k, S).
class Evaluator {
public:
    Evaluator(const TransitionEngine& engine, std::vector<double> times, EvaluationStats& stats)
        : engine_(engine), space_(engine.space()), times_(std::move(times)),
          codes_(space_.codes()), pool_(codes_), stats_(stats) {}

    Pool& pool() { return pool_; }

    std::vector<double> forward(std::size_t k, Id residual) {
        std::vector<double> out(codes_);
        for (std::size_t x = 0; x < codes_; ++x) {
            std::unordered_map<Id, Id> memo;
            const auto [c, rest] = pool_.split(pool_.substitute(residual, k, x, memo));
            out[x] = rest == none ? c : c + evolve(k, rest)[x];
        }
        return out;
    }

private:
    const std::vector<double>& evolve(std::size_t k, Id residual) {
        const auto key = std::make_pair(k, residual);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        if (k + 1 >= times_.size()) throw Error("residual outlives the time grid");
        std::vector<double> next = forward(k + 1, residual);
        const std::size_t retained = space_.size();
        const Gamble g(std::vector<double>(next.begin(), next.begin() + static_cast<std::ptrdiff_t>(retained)),
                       space_.is_truncated() ? next[retained] : 0.0);
        const auto result = engine_.apply(times_[k + 1] - times_[k], g);
        ++stats_.engine_calls;
        stats_.max_step_error = std::max(stats_.max_step_error, result.report.estimated_error);
        stats_.edge_flag = stats_.edge_flag || result.report.edge_flag;
        std::vector<double> out(result.value.values().begin(), result.value.values().end());
        if (space_.is_truncated()) out.push_back(result.value.tail());
        auto [it, inserted] = memo_.emplace(key, std::move(out));
        stats_.distinct_residuals = memo_.size();
        return it->second;
    }

    const TransitionEngine& engine_;
    const StateSpace& space_;
    std::vector<double> times_;
    std::size_t codes_;
    Pool pool_;
    EvaluationStats& stats_;
    std::map<std::pair<std::size_t, Id>, std::vector<double>> memo_;
};

} // namespace

double evaluate_upper(const InitialUpperExpectation& initial, const TransitionEngine& engine,
                      const FinitaryGamble& f, EvaluationStats* stats) {
    EvaluationStats local;
    EvaluationStats& s = stats ? *stats : local;
    s = EvaluationStats{};
    const FinitaryGamble g = f.grid()[0] == 0.0 ? f : f.lift(TimeGrid::merge(TimeGrid({0.0}), f.grid()));
    const auto pts = g.grid().points();
    Evaluator ev(engine, std::vector<double>(pts.begin(), pts.end()), s);
    const Id root = ev.pool().from_expr(*g.expression());
    const std::vector<double> v = ev.forward(0, root);
    return initial(std::span<const double>(v.data(), engine.space().size()));
}

double evaluate_lower(const InitialUpperExpectation& initial, const TransitionEngine& engine,
                      const FinitaryGamble& f, EvaluationStats* stats) {
    return -evaluate_upper(initial, engine, f.negated(), stats);
}

} // namespace subexp

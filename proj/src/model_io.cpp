#include "subexp/model_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "subexp/poisson.hpp"

namespace subexp::io {

using json = nlohmann::json;
using ordered = nlohmann::ordered_json;

ParseError::ParseError(std::vector<Diagnostic> diagnostics)
    : Error([&] {
          std::string msg;
          for (const auto& d : diagnostics) {
              if (!msg.empty()) msg += "; ";
              msg += (d.path.empty() ? std::string("/") : d.path) +
                     (d.line ? " (line " + std::to_string(d.line) + ")" : std::string()) + ": " + d.reason;
          }
          return msg;
      }()),
      diagnostics_(std::move(diagnostics)) {}

namespace {

// Collects schema diagnostics while walking a parsed document.
class Schema {
public:
    std::vector<Diagnostic> diags;

    void fail(const std::string& path, const std::string& reason) { diags.push_back({path, 0, reason}); }

    bool object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
        if (!j.is_object()) {
            fail(path, "expected an object");
            return false;
        }
        for (const auto& [key, value] : j.items()) {
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
                fail(path + "/" + key, "unknown key");
        }
        return true;
    }

    const json* field(const json& j, const std::string& path, const char* key, bool required) {
        auto it = j.find(key);
        if (it == j.end()) {
            if (required) fail(path + "/" + key, "missing required key");
            return nullptr;
        }
        return &*it;
    }

    std::optional<double> number(const json& j, const std::string& path, const char* key, bool required) {
        const json* v = field(j, path, key, required);
        if (!v) return std::nullopt;
        if (!v->is_number()) {
            fail(path + "/" + key, "expected a number");
            return std::nullopt;
        }
        const double d = v->get<double>();
        if (!std::isfinite(d)) {
            fail(path + "/" + key, "expected a finite number");
            return std::nullopt;
        }
        return d;
    }

    std::optional<std::size_t> count(const json& j, const std::string& path, const char* key, bool required) {
        const json* v = field(j, path, key, required);
        if (!v) return std::nullopt;
        if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0)) {
            fail(path + "/" + key, "expected a nonnegative integer");
            return std::nullopt;
        }
        return v->get<std::size_t>();
    }

    std::optional<std::string> text(const json& j, const std::string& path, const char* key, bool required) {
        const json* v = field(j, path, key, required);
        if (!v) return std::nullopt;
        if (!v->is_string()) {
            fail(path + "/" + key, "expected a string");
            return std::nullopt;
        }
        return v->get<std::string>();
    }

    std::optional<bool> flag(const json& j, const std::string& path, const char* key) {
        const json* v = field(j, path, key, false);
        if (!v) return std::nullopt;
        if (!v->is_boolean()) {
            fail(path + "/" + key, "expected true or false");
            return std::nullopt;
        }
        return v->get<bool>();
    }

    std::optional<std::vector<double>> numbers(const json& v, const std::string& path) {
        if (!v.is_array()) {
            fail(path, "expected an array of numbers");
            return std::nullopt;
        }
        std::vector<double> out;
        for (std::size_t k = 0; k < v.size(); ++k) {
            if (!v[k].is_number() || !std::isfinite(v[k].get<double>())) {
                fail(path + "/" + std::to_string(k), "expected a finite number");
                return std::nullopt;
            }
            out.push_back(v[k].get<double>());
        }
        return out;
    }

    std::optional<std::vector<double>> numbers(const json& j, const std::string& path, const char* key,
                                               bool required) {
        const json* v = field(j, path, key, required);
        if (!v) return std::nullopt;
        return numbers(*v, path + "/" + key);
    }

    std::optional<Eigen::MatrixXd> matrix(const json& v, const std::string& path, std::size_t n) {
        if (!v.is_array() || v.size() != n) {
            fail(path, "expected a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
            return std::nullopt;
        }
        Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t r = 0; r < n; ++r) {
            auto row = numbers(v[r], path + "/" + std::to_string(r));
            if (!row) return std::nullopt;
            if (row->size() != n) {
                fail(path + "/" + std::to_string(r), "row has the wrong length");
                return std::nullopt;
            }
            for (std::size_t c = 0; c < n; ++c)
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = (*row)[c];
        }
        return m;
    }

    std::optional<std::size_t> state(const json& v, const std::string& path, const StateSpace& space) {
        if (v.is_string()) {
            if (auto idx = space.index_of(v.get<std::string>())) return idx;
            fail(path, "unknown state label");
            return std::nullopt;
        }
        if (v.is_number_integer() && v.get<long long>() >= 0 &&
            static_cast<std::size_t>(v.get<long long>()) < space.size())
            return static_cast<std::size_t>(v.get<long long>());
        fail(path, "expected a retained state index or label");
        return std::nullopt;
    }
};

std::size_t line_of(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::string reason = e.what();
        if (auto pos = reason.find("syntax error"); pos != std::string::npos) reason = reason.substr(pos);
        throw ParseError({{"", line_of(text, e.byte > 0 ? e.byte - 1 : 0), reason}});
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError({{"", 0, "cannot read " + path.string()}});
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void check_format(Schema& s, const json& doc, const char* expected) {
    auto f = s.text(doc, "", "format", true);
    if (f && *f != expected) s.fail("/format", std::string("expected \"") + expected + "\"");
}

ordered matrix_json(const Eigen::MatrixXd& m) {
    ordered rows = ordered::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        ordered row = ordered::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<double> grid_of(Schema& s, const json& q, const std::string& path, const char* key) {
    auto g = s.numbers(q, path, key, true);
    if (!g) return {};
    try {
        TimeGrid check(*g);
    } catch (const Error& e) {
        s.fail(path + "/" + key, e.what());
    }
    return *g;
}

void expression_of(Schema& s, const std::string& text, const std::string& path, std::size_t coords) {
    try {
        const auto e = parse_expression(text);
        if (max_coord(*e) >= static_cast<long>(coords))
            s.fail(path, "expression references coordinate " + std::to_string(max_coord(*e)) + " but only " +
                             std::to_string(coords) + " are available");
    } catch (const Error& e) {
        s.fail(path, e.what());
    }
}

} // namespace

UpperRateOperator ModelFile::make_operator() const {
    if (!unchecked) return UpperRateOperator(space, generator);
    GeneratorSpec spec = generator;
    if (auto* e = std::get_if<Extremes>(&spec))
        for (auto& m : e->matrices) m = RateMatrix::unchecked(m.matrix());
    return UpperRateOperator::unchecked(space, spec);
}

TransitionEngine ModelFile::make_engine(std::optional<double> tolerance) const {
    EngineOptions opts;
    opts.tolerance = tolerance.value_or(numeric.tolerance);
    opts.step_cap = numeric.step_cap;
    opts.iteration_cap = numeric.iteration_cap;
    return TransitionEngine(make_operator(), opts);
}

InitialUpperExpectation ModelFile::make_initial() const { return InitialUpperExpectation(space, initial); }

ModelFile parse_model_text(const std::string& text) {
    const json doc = parse_json(text);
    Schema s;
    ModelFile model;
    if (!s.object(doc, "", {"format", "state_space", "generator", "initial", "numeric"})) throw ParseError(s.diags);
    check_format(s, doc, model_format);

    // numeric first: the truncation level shapes the state space.
    if (const json* n = s.field(doc, "", "numeric", false); n && s.object(*n, "/numeric", {"tolerance", "step_cap", "truncation", "iteration_cap"})) {
        if (auto v = s.number(*n, "/numeric", "tolerance", false)) {
            if (*v > 0.0) model.numeric.tolerance = *v;
            else s.fail("/numeric/tolerance", "must be positive");
        }
        if (auto v = s.number(*n, "/numeric", "step_cap", false)) {
            if (*v >= 0.0) model.numeric.step_cap = *v;
            else s.fail("/numeric/step_cap", "must be nonnegative");
        }
        if (auto v = s.count(*n, "/numeric", "truncation", false)) model.numeric.truncation = *v;
        if (auto v = s.count(*n, "/numeric", "iteration_cap", false)) {
            if (*v >= 1) model.numeric.iteration_cap = *v;
            else s.fail("/numeric/iteration_cap", "must be at least 1");
        }
    }

    bool space_ok = false;
    if (const json* sp = s.field(doc, "", "state_space", true); sp && s.object(*sp, "/state_space", {"kind", "size", "labels"})) {
        const auto kind = s.text(*sp, "/state_space", "kind", true);
        if (kind == "finite") {
            const json* labels = s.field(*sp, "/state_space", "labels", false);
            const auto size = s.count(*sp, "/state_space", "size", false);
            if (labels && size) {
                s.fail("/state_space", "give either size or labels, not both");
            } else if (labels) {
                std::vector<std::string> names;
                if (labels->is_array() && std::all_of(labels->begin(), labels->end(), [](const json& l) { return l.is_string(); })) {
                    for (const auto& l : *labels) names.push_back(l.get<std::string>());
                    try {
                        model.space = StateSpace::finite(std::move(names));
                        space_ok = true;
                    } catch (const Error& e) {
                        s.fail("/state_space/labels", e.what());
                    }
                } else {
                    s.fail("/state_space/labels", "expected an array of strings");
                }
            } else if (size) {
                try {
                    model.space = StateSpace::finite(*size);
                    space_ok = true;
                } catch (const Error& e) {
                    s.fail("/state_space/size", e.what());
                }
            } else {
                s.fail("/state_space", "finite spaces need size or labels");
            }
        } else if (kind == "nonneg-integers") {
            if (sp->contains("size") || sp->contains("labels"))
                s.fail("/state_space", "nonneg-integers takes no size or labels");
            if (model.numeric.truncation < 2) {
                s.fail("/numeric/truncation", "nonneg-integers needs a truncation level of at least 2");
            } else {
                model.space = StateSpace::truncated(model.numeric.truncation);
                space_ok = true;
            }
        } else if (kind) {
            s.fail("/state_space/kind", "expected \"finite\" or \"nonneg-integers\"");
        }
        if (space_ok && !model.space.is_truncated() && model.numeric.truncation != 0)
            s.fail("/numeric/truncation", "truncation applies to nonneg-integers only");
    }

    bool generator_ok = false;
    if (const json* g = s.field(doc, "", "generator", true);
        g && s.object(*g, "/generator", {"kind", "matrices", "lower", "upper", "lambda_lower", "lambda_upper", "unchecked"})) {
        const auto kind = s.text(*g, "/generator", "kind", true);
        model.unchecked = s.flag(*g, "/generator", "unchecked").value_or(false);
        const std::size_t n = model.space.size();
        if (kind == "extremes" && space_ok) {
            const json* ms = s.field(*g, "/generator", "matrices", true);
            if (ms && (!ms->is_array() || ms->empty())) {
                s.fail("/generator/matrices", "expected a nonempty array of matrices");
            } else if (ms) {
                Extremes ex;
                bool ok = true;
                for (std::size_t k = 0; k < ms->size(); ++k) {
                    const std::string path = "/generator/matrices/" + std::to_string(k);
                    auto m = s.matrix((*ms)[k], path, n);
                    if (!m) {
                        ok = false;
                        continue;
                    }
                    try {
                        ex.matrices.push_back(model.unchecked ? RateMatrix::unchecked(*m) : RateMatrix(*m));
                    } catch (const Error& e) {
                        s.fail(path, e.what());
                        ok = false;
                    }
                }
                if (ok) {
                    model.generator = std::move(ex);
                    generator_ok = true;
                }
            }
        } else if (kind == "row-intervals" && space_ok) {
            const json* lo = s.field(*g, "/generator", "lower", true);
            const json* up = s.field(*g, "/generator", "upper", true);
            std::optional<Eigen::MatrixXd> l, u;
            if (lo) l = s.matrix(*lo, "/generator/lower", n);
            if (up) u = s.matrix(*up, "/generator/upper", n);
            if (l && u) {
                model.generator = RowIntervals{*l, *u};
                generator_ok = true;
            }
        } else if (kind == "poisson-interval" && space_ok) {
            const auto lo = s.number(*g, "/generator", "lambda_lower", true);
            const auto up = s.number(*g, "/generator", "lambda_upper", true);
            if (!model.space.is_truncated()) s.fail("/generator/kind", "poisson-interval needs a nonneg-integers space");
            if (lo && up) {
                if (*lo < 0.0) s.fail("/generator/lambda_lower", "must be nonnegative");
                else if (*lo > *up) s.fail("/generator/lambda_lower", "exceeds lambda_upper");
                else if (model.space.is_truncated()) {
                    model.generator = PoissonInterval{RateInterval(*lo, *up)};
                    generator_ok = true;
                }
            }
        } else if (kind && *kind != "extremes" && *kind != "row-intervals" && *kind != "poisson-interval") {
            s.fail("/generator/kind", "expected \"extremes\", \"row-intervals\" or \"poisson-interval\"");
        }
        if (generator_ok) {
            try {
                (void)model.make_operator();
            } catch (const Error& e) {
                s.fail("/generator", e.what());
            }
        }
    }

    if (const json* in = s.field(doc, "", "initial", true); in && s.object(*in, "/initial", {"kind", "pmfs", "state", "states"})) {
        const auto kind = s.text(*in, "/initial", "kind", true);
        bool ok = false;
        if (kind == "pmfs" && space_ok) {
            const json* ps = s.field(*in, "/initial", "pmfs", true);
            if (ps && ps->is_array()) {
                InitialUpperExpectation::Envelope env;
                ok = true;
                for (std::size_t k = 0; k < ps->size(); ++k) {
                    auto p = s.numbers((*ps)[k], "/initial/pmfs/" + std::to_string(k));
                    if (p) env.pmfs.push_back(*p);
                    else ok = false;
                }
                model.initial = std::move(env);
            } else if (ps) {
                s.fail("/initial/pmfs", "expected an array of pmfs");
            }
        } else if (kind == "degenerate" && space_ok) {
            if (const json* st = s.field(*in, "/initial", "state", true)) {
                if (auto x = s.state(*st, "/initial/state", model.space)) {
                    model.initial = InitialUpperExpectation::Degenerate{*x};
                    ok = true;
                }
            }
        } else if (kind == "vacuous" && space_ok) {
            const json* sts = s.field(*in, "/initial", "states", true);
            if (sts && sts->is_array()) {
                InitialUpperExpectation::Vacuous v;
                ok = true;
                for (std::size_t k = 0; k < sts->size(); ++k) {
                    if (auto x = s.state((*sts)[k], "/initial/states/" + std::to_string(k), model.space))
                        v.states.push_back(*x);
                    else
                        ok = false;
                }
                model.initial = std::move(v);
            } else if (sts) {
                s.fail("/initial/states", "expected an array of states");
            }
        } else if (kind && *kind != "pmfs" && *kind != "degenerate" && *kind != "vacuous") {
            s.fail("/initial/kind", "expected \"pmfs\", \"degenerate\" or \"vacuous\"");
        }
        if (ok) {
            try {
                (void)model.make_initial();
            } catch (const Error& e) {
                s.fail("/initial", e.what());
            }
        }
    }

    if (!s.diags.empty()) throw ParseError(s.diags);
    return model;
}

ModelFile parse_model(const std::filesystem::path& path) { return parse_model_text(read_file(path)); }

namespace {

ordered model_json(const ModelFile& model) {
    ordered doc;
    doc["format"] = model_format;
    ordered space;
    if (model.space.is_truncated()) {
        space["kind"] = "nonneg-integers";
    } else {
        space["kind"] = "finite";
        space["labels"] = model.space.labels();
    }
    doc["state_space"] = space;

    ordered gen;
    std::visit(
        [&](const auto& g) {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, Extremes>) {
                gen["kind"] = "extremes";
                ordered ms = ordered::array();
                for (const auto& m : g.matrices) ms.push_back(matrix_json(m.matrix()));
                gen["matrices"] = ms;
            } else if constexpr (std::is_same_v<T, RowIntervals>) {
                gen["kind"] = "row-intervals";
                gen["lower"] = matrix_json(g.lower);
                gen["upper"] = matrix_json(g.upper);
            } else {
                gen["kind"] = "poisson-interval";
                gen["lambda_lower"] = g.rates.lower();
                gen["lambda_upper"] = g.rates.upper();
            }
        },
        model.generator);
    if (model.unchecked) gen["unchecked"] = true;
    doc["generator"] = gen;

    ordered init;
    std::visit(
        [&](const auto& i) {
            using T = std::decay_t<decltype(i)>;
            if constexpr (std::is_same_v<T, InitialUpperExpectation::Envelope>) {
                init["kind"] = "pmfs";
                init["pmfs"] = i.pmfs;
            } else if constexpr (std::is_same_v<T, InitialUpperExpectation::Degenerate>) {
                init["kind"] = "degenerate";
                init["state"] = i.state;
            } else {
                init["kind"] = "vacuous";
                init["states"] = i.states;
            }
        },
        model.initial);
    doc["initial"] = init;

    ordered num;
    num["tolerance"] = model.numeric.tolerance;
    num["step_cap"] = model.numeric.step_cap;
    if (model.space.is_truncated()) num["truncation"] = model.numeric.truncation;
    num["iteration_cap"] = model.numeric.iteration_cap;
    doc["numeric"] = num;
    return doc;
}

} // namespace

std::string serialize_model(const ModelFile& model) { return model_json(model).dump(2) + "\n"; }

std::string instantiate_template(const std::string& text, int n) {
    std::string out;
    const std::string value = std::to_string(n);
    for (std::size_t k = 0; k < text.size();) {
        if (text.compare(k, 3, "{n}") == 0) {
            out += value;
            k += 3;
        } else {
            out += text[k++];
        }
    }
    return out;
}

QueryFile parse_queries_text(const std::string& text) {
    const json doc = parse_json(text);
    Schema s;
    QueryFile file;
    if (!s.object(doc, "", {"format", "queries"})) throw ParseError(s.diags);
    check_format(s, doc, query_format);
    const json* qs = s.field(doc, "", "queries", true);
    if (qs && !qs->is_array()) s.fail("/queries", "expected an array");
    if (!qs || !qs->is_array()) throw ParseError(s.diags);

    for (std::size_t k = 0; k < qs->size(); ++k) {
        const json& q = (*qs)[k];
        const std::string path = "/queries/" + std::to_string(k);
        if (!q.is_object()) {
            s.fail(path, "expected an object");
            continue;
        }
        Query out;
        out.id = "q" + std::to_string(k);
        const auto kind = s.text(q, path, "kind", true);
        if (auto id = s.text(q, path, "id", false)) out.id = *id;

        if (kind == "eval") {
            s.object(q, path, {"id", "kind", "grid", "gamble", "lower"});
            EvalQuery e;
            e.grid = grid_of(s, q, path, "grid");
            if (auto g = s.text(q, path, "gamble", true)) {
                e.gamble = *g;
                expression_of(s, e.gamble, path + "/gamble", std::max<std::size_t>(e.grid.size(), 1));
            }
            e.lower = s.flag(q, path, "lower").value_or(false);
            out.body = e;
        } else if (kind == "transition") {
            s.object(q, path, {"id", "kind", "t", "gamble", "lower"});
            TransitionQuery t;
            if (auto v = s.number(q, path, "t", true)) {
                if (*v < 0.0) s.fail(path + "/t", "must be nonnegative");
                t.t = *v;
            }
            if (auto g = s.text(q, path, "gamble", true)) {
                t.gamble = *g;
                expression_of(s, t.gamble, path + "/gamble", 1);
            }
            t.lower = s.flag(q, path, "lower").value_or(false);
            out.body = t;
        } else if (kind == "check") {
            s.object(q, path, {"id", "kind", "check", "samples", "s", "t", "gambles", "gamble", "coarse", "fine",
                               "deltas", "family", "grid", "count", "limit", "tol"});
            CheckQuery c;
            const auto check = s.text(q, path, "check", true);
            c.tol = s.number(q, path, "tol", false);
            if (c.tol && !(*c.tol > 0.0)) s.fail(path + "/tol", "must be positive");
            if (check == "axioms") {
                c.kind = CheckQuery::Kind::axioms;
                c.samples = s.count(q, path, "samples", false).value_or(100);
            } else if (check == "semigroup") {
                c.kind = CheckQuery::Kind::semigroup;
                c.s = s.number(q, path, "s", true).value_or(0.0);
                c.t = s.number(q, path, "t", true).value_or(0.0);
                if (c.s < 0.0 || c.t < 0.0) s.fail(path, "s and t must be nonnegative");
                if (const json* gs = s.field(q, path, "gambles", true)) {
                    if (!gs->is_array() || gs->empty()) s.fail(path + "/gambles", "expected a nonempty array of expressions");
                    else
                        for (std::size_t i = 0; i < gs->size(); ++i) {
                            const std::string gp = path + "/gambles/" + std::to_string(i);
                            if (!(*gs)[i].is_string()) {
                                s.fail(gp, "expected a string");
                                continue;
                            }
                            c.gambles.push_back((*gs)[i].get<std::string>());
                            expression_of(s, c.gambles.back(), gp, 1);
                        }
                }
            } else if (check == "consistency") {
                c.kind = CheckQuery::Kind::consistency;
                c.coarse = grid_of(s, q, path, "coarse");
                c.fine = grid_of(s, q, path, "fine");
                if (auto g = s.text(q, path, "gamble", true)) {
                    c.gambles = {*g};
                    expression_of(s, *g, path + "/gamble", std::max<std::size_t>(c.coarse.size(), 1));
                }
                try {
                    if (!TimeGrid(c.coarse).is_subset_of(TimeGrid(c.fine)))
                        s.fail(path + "/fine", "fine grid must contain the coarse grid");
                } catch (const Error&) {
                    // already reported by grid_of
                }
            } else if (check == "rate-condition") {
                c.kind = CheckQuery::Kind::rate_condition;
                c.t = s.number(q, path, "t", true).value_or(0.0);
                if (auto d = s.numbers(q, path, "deltas", true)) {
                    c.deltas = *d;
                    bool ok = !d->empty();
                    for (std::size_t i = 0; i < d->size(); ++i)
                        ok = ok && (*d)[i] > 0.0 && (i == 0 || (*d)[i] < (*d)[i - 1]);
                    if (!ok) s.fail(path + "/deltas", "expected positive, strictly decreasing lengths");
                }
            } else if (check == "downward") {
                c.kind = CheckQuery::Kind::downward;
                c.family_grid = grid_of(s, q, path, "grid");
                c.family = s.text(q, path, "family", true).value_or("");
                c.count = static_cast<int>(s.count(q, path, "count", true).value_or(0));
                c.limit = s.text(q, path, "limit", true).value_or("0");
                if (c.count < 1) s.fail(path + "/count", "must be at least 1");
                expression_of(s, instantiate_template(c.family, 1), path + "/family",
                              std::max<std::size_t>(c.family_grid.size(), 1));
                expression_of(s, c.limit, path + "/limit", std::max<std::size_t>(c.family_grid.size(), 1));
            } else if (check) {
                s.fail(path + "/check", "expected axioms, semigroup, consistency, rate-condition or downward");
            }
            out.body = c;
        } else if (kind == "converge") {
            s.object(q, path, {"id", "kind", "family", "horizon", "target", "template", "grid", "direction", "levels", "tol"});
            ConvergeQuery c;
            const auto family = s.text(q, path, "family", true);
            c.levels = static_cast<int>(s.count(q, path, "levels", true).value_or(1));
            if (c.levels < 1 || c.levels > 20) s.fail(path + "/levels", "must be between 1 and 20");
            c.tol = s.number(q, path, "tol", false);
            if (family == "hitting") {
                c.kind = ConvergeQuery::Kind::hitting;
                c.horizon = s.number(q, path, "horizon", true).value_or(1.0);
                if (!(c.horizon > 0.0)) s.fail(path + "/horizon", "must be positive");
                c.target = s.count(q, path, "target", true).value_or(0);
            } else if (family == "template") {
                c.kind = ConvergeQuery::Kind::template_family;
                c.family = s.text(q, path, "template", true).value_or("");
                c.family_grid = grid_of(s, q, path, "grid");
                const auto dir = s.text(q, path, "direction", false).value_or("increasing");
                if (dir != "increasing" && dir != "decreasing")
                    s.fail(path + "/direction", "expected \"increasing\" or \"decreasing\"");
                c.increasing = dir == "increasing";
                expression_of(s, instantiate_template(c.family, 1), path + "/template",
                              std::max<std::size_t>(c.family_grid.size(), 1));
            } else if (family) {
                s.fail(path + "/family", "expected \"hitting\" or \"template\"");
            }
            out.body = c;
        } else if (kind) {
            s.fail(path + "/kind", "expected eval, transition, check or converge");
        }
        file.queries.push_back(std::move(out));
    }
    if (!s.diags.empty()) throw ParseError(s.diags);
    return file;
}

QueryFile parse_queries(const std::filesystem::path& path) { return parse_queries_text(read_file(path)); }

} // namespace subexp::io

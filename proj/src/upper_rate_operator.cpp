#include "subexp/upper_rate_operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "subexp/errors.hpp"
#include "subexp/kernels.hpp"

namespace subexp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

} // namespace

UpperRateOperator::UpperRateOperator(StateSpace space, GeneratorSpec spec)
    : space_(std::move(space)), spec_(std::move(spec)) {
    validate();
    compute_constants();
}

UpperRateOperator::UpperRateOperator(StateSpace space, GeneratorSpec spec, NoCheck)
    : space_(std::move(space)), spec_(std::move(spec)) {
    compute_constants();
}

UpperRateOperator UpperRateOperator::unchecked(StateSpace space, GeneratorSpec spec) {
    return UpperRateOperator(std::move(space), std::move(spec), NoCheck{});
}

void UpperRateOperator::validate() const {
    const auto n = static_cast<Eigen::Index>(space_.size());
    std::visit(
        overloaded{
            [&](const Extremes& e) {
                if (e.matrices.empty()) throw InvalidArgument("extreme set must be nonempty");
                for (const auto& q : e.matrices)
                    if (static_cast<Eigen::Index>(q.size()) != n)
                        throw DimensionMismatch("extreme matrix size " + std::to_string(q.size()) +
                                                " does not match state space size " +
                                                std::to_string(space_.size()));
            },
            [&](const RowIntervals& r) {
                if (r.lower.rows() != n || r.lower.cols() != n || r.upper.rows() != n ||
                    r.upper.cols() != n)
                    throw DimensionMismatch("row-interval bounds do not match state space size");
                for (Eigen::Index x = 0; x < n; ++x) {
                    double lo_sum = 0.0;
                    double up_sum = 0.0;
                    for (Eigen::Index y = 0; y < n; ++y) {
                        const double lo = r.lower(x, y);
                        const double up = r.upper(x, y);
                        if (!std::isfinite(lo) || !std::isfinite(up))
                            throw InvalidArgument("row-interval bounds must be finite");
                        if (lo > up)
                            throw InfeasibleIntervals("lower exceeds upper at (" + std::to_string(x) +
                                                      "," + std::to_string(y) + ")");
                        if (x != y && lo < 0.0)
                            throw InvalidArgument("negative off-diagonal lower bound at (" +
                                                  std::to_string(x) + "," + std::to_string(y) + ")");
                        lo_sum += lo;
                        up_sum += up;
                    }
                    if (lo_sum > 0.0 || up_sum < 0.0)
                        throw InfeasibleIntervals("row " + std::to_string(x) +
                                                  " admits no zero-sum selection");
                }
            },
            [&](const PoissonInterval&) {
                if (!space_.is_truncated())
                    throw InvalidArgument("Poisson generator needs a nonneg-integer state space");
            },
        },
        spec_);
}

void UpperRateOperator::compute_constants() {
    const std::size_t n = space_.size();
    if (const auto* e = std::get_if<Extremes>(&spec_)) {
        couplings_.clear();
        for (const auto& q : e->matrices) {
            std::vector<std::vector<Coupling>> rows(n);
            for (std::size_t x = 0; x < n && x < q.size(); ++x)
                for (std::size_t y = 0; y < q.size(); ++y)
                    if (y != x && q(x, y) != 0.0) rows[x].push_back({y, q(x, y)});
            couplings_.push_back(std::move(rows));
        }
    }
    if (const auto* r = std::get_if<RowIntervals>(&spec_)) {
        interval_lower_.resize(n * n);
        interval_upper_.resize(n * n);
        for (std::size_t x = 0; x < n; ++x)
            for (std::size_t y = 0; y < n; ++y) {
                interval_lower_[x * n + y] = r->lower(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
                interval_upper_[x * n + y] = r->upper(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
            }
    }

    bandwidth_ = 0;
    std::visit(overloaded{
                   [&](const Extremes&) {
                       for (const auto& rows : couplings_)
                           for (std::size_t x = 0; x < rows.size(); ++x)
                               for (const auto& c : rows[x])
                                   bandwidth_ = std::max(bandwidth_, c.y > x ? c.y - x : x - c.y);
                   },
                   [&](const RowIntervals& r) {
                       for (std::size_t x = 0; x < n; ++x)
                           for (std::size_t y = 0; y < n; ++y)
                               if (x != y && r.upper(static_cast<Eigen::Index>(x),
                                                     static_cast<Eigen::Index>(y)) > 0.0)
                                   bandwidth_ = std::max(bandwidth_, y > x ? y - x : x - y);
                   },
                   [&](const PoissonInterval&) { bandwidth_ = 1; },
               },
               spec_);

    if (const auto* p = std::get_if<PoissonInterval>(&spec_)) {
        rate_bound_ = p->rates.upper();
        return;
    }
    rate_bound_ = 0.0;
    for (std::size_t x = 0; x < n; ++x)
        rate_bound_ = std::max(rate_bound_, row_value(Gamble::complement_indicator(space_, x), x));
}

void UpperRateOperator::check_operand(const Gamble& f) const {
    if (!lives_on(f, space_))
        throw DimensionMismatch("gamble has " + std::to_string(f.size()) +
                                " values, state space has " + std::to_string(space_.size()));
}

std::vector<double> greedy_interval_row(std::span<const double> lower,
                                        std::span<const double> upper,
                                        std::span<const double> f, std::size_t x) {
    const std::size_t n = lower.size();
    std::vector<double> q(lower.begin(), lower.end());
    double budget = -std::accumulate(lower.begin(), lower.end(), 0.0);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Decreasing f(y) - f(x); stable sort keeps lowest index first on ties.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return f[a] - f[x] > f[b] - f[x];
    });
    for (std::size_t y : order) {
        if (budget <= 0.0) break;
        const double add = std::min(budget, upper[y] - lower[y]);
        q[y] += add;
        budget -= add;
    }
    return q;
}

double UpperRateOperator::row_value(const Gamble& f, std::size_t x) const {
    double out = 0.0;
    evaluate_rows(f, 0.0, false, x, x + 1, &out);
    return out;
}

void UpperRateOperator::evaluate_rows(const Gamble& f, double delta, bool euler, std::size_t begin,
                                      std::size_t end, double* out) const {
    const auto values = f.values();
    const std::size_t n = values.size();
    auto emit = [&](std::size_t x, double q) { out[x - begin] = euler ? values[x] + delta * q : q; };

    if (const auto* p = std::get_if<PoissonInterval>(&spec_)) {
        const double lo = p->rates.lower();
        const double up = p->rates.upper();
        for (std::size_t x = begin; x < end; ++x) {
            const double d = (x + 1 < n ? values[x + 1] : f.tail()) - values[x];
            emit(x, d >= 0.0 ? up * d : lo * d);
        }
        return;
    }
    if (std::holds_alternative<Extremes>(spec_)) {
        for (std::size_t x = begin; x < end; ++x) {
            const double fx = values[x];
            double best = -std::numeric_limits<double>::infinity();
            for (const auto& rows : couplings_) {
                double s = 0.0;
                for (const auto& c : rows[x]) s += c.rate * (values[c.y] - fx);
                best = std::max(best, s);
            }
            emit(x, best);
        }
        return;
    }
    // Greedy water-filling on each interval row, without per-row allocation.
    thread_local std::vector<double> diff;
    thread_local std::vector<double> q;
    thread_local std::vector<std::size_t> order;
    diff.resize(n);
    q.resize(n);
    order.resize(n);
    for (std::size_t x = begin; x < end; ++x) {
        const double* lo = interval_lower_.data() + x * n;
        const double* up = interval_upper_.data() + x * n;
        const double fx = values[x];
        double budget = 0.0;
        for (std::size_t y = 0; y < n; ++y) {
            diff[y] = values[y] - fx;
            q[y] = lo[y];
            budget -= lo[y];
        }
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return diff[a] > diff[b]; });
        for (std::size_t y : order) {
            if (budget <= 0.0) break;
            const double add = std::min(budget, up[y] - lo[y]);
            q[y] += add;
            budget -= add;
        }
        double s = 0.0;
        for (std::size_t y = 0; y < n; ++y)
            if (y != x) s += q[y] * diff[y];
        emit(x, s);
    }
}

Gamble UpperRateOperator::apply(const Gamble& f, Execution execution) const {
    check_operand(f);
    std::vector<double> out(space_.size());
    if (execution == Execution::parallel)
        kernels::apply_parallel(*this, f, out);
    else
        kernels::apply_serial(*this, f, out);
    return Gamble(std::move(out), 0.0);
}

bool UpperRateOperator::is_linear() const {
    return std::visit(overloaded{
                          [](const Extremes& e) {
                              return std::all_of(e.matrices.begin(), e.matrices.end(),
                                                 [&](const RateMatrix& q) { return q == e.matrices.front(); });
                          },
                          [](const RowIntervals& r) { return r.lower == r.upper; },
                          [](const PoissonInterval& p) { return p.rates.lower() == p.rates.upper(); },
                      },
                      spec_);
}

UpperRateOperator upper_envelope(const StateSpace& space, std::vector<RateMatrix> matrices) {
    if (matrices.empty()) throw InvalidArgument("upper envelope of an empty set");
    return UpperRateOperator(space, Extremes{std::move(matrices)});
}

UpperRateOperator upper_envelope(std::vector<RateMatrix> matrices) {
    if (matrices.empty()) throw InvalidArgument("upper envelope of an empty set");
    const auto n = matrices.front().size();
    return upper_envelope(StateSpace::finite(n), std::move(matrices));
}

} // namespace subexp

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "subexp/expression.hpp"
#include "subexp/report.hpp"
#include "subexp/poisson.hpp"
#include "subexp/semigroup.hpp"

namespace subexp {

/// Nonempty strictly increasing finite set of nonnegative times.
class TimeGrid {
public:
    explicit TimeGrid(std::vector<double> points);

    std::size_t size() const { return points_.size(); }
    double operator[](std::size_t k) const { return points_[k]; }
    std::span<const double> points() const { return points_; }
    double back() const { return points_.back(); }

    /// Index of t, if present (exact comparison).
    std::optional<std::size_t> index_of(double t) const;
    bool is_subset_of(const TimeGrid& other) const;
    TimeGrid without_last() const;
    /// Sorted union.
    static TimeGrid merge(const TimeGrid& a, const TimeGrid& b);
    /// 2^level + 1 equally spaced points on [0, horizon].
    static TimeGrid dyadic(double horizon, int level);

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    std::vector<double> points_;
};

/// A bounded function of the path states at the grid times.
class FinitaryGamble {
public:
    /// Throws InvalidArgument if `e` references coordinates beyond the grid.
    FinitaryGamble(TimeGrid grid, ExprPtr e);

    /// Dense table over codes^|grid| in row-major order. Size must not
    /// exceed dense_cap.
    static FinitaryGamble dense(TimeGrid grid, const StateSpace& space, std::vector<double> data);

    static constexpr std::size_t dense_cap = 10'000'000;

    const TimeGrid& grid() const { return grid_; }
    const ExprPtr& expression() const { return expr_; }
    double operator()(std::span<const std::size_t> codes) const { return evaluate(*expr_, codes); }

    /// Cylindrical extension f o pi_U^V onto a finer grid V containing U.
    FinitaryGamble lift(const TimeGrid& finer) const;

    FinitaryGamble negated() const;

private:
    TimeGrid grid_;
    ExprPtr expr_;
};

/// Indicator that the path differs between t1 and t2.
FinitaryGamble jump_gamble(double t1, double t2);

/// Grid-sampled hitting indicator: max over the 2^level + 1 dyadic points of
/// [0, horizon] of 1{X = target}.
FinitaryGamble hitting_gamble(double horizon, std::size_t target, int level);

/// Initial upper expectation on the retained states.
class InitialUpperExpectation {
public:
    struct Envelope { std::vector<std::vector<double>> pmfs; };
    struct Degenerate { std::size_t state; };
    struct Vacuous { std::vector<std::size_t> states; };
    using Spec = std::variant<Envelope, Degenerate, Vacuous>;

    InitialUpperExpectation(const StateSpace& space, Spec spec);

    static InitialUpperExpectation degenerate(const StateSpace& space, std::size_t x);

    const Spec& spec() const { return spec_; }
    double operator()(std::span<const double> g) const;

private:
    Spec spec_;
    std::size_t size_;
};

struct EvaluationStats {
    std::size_t engine_calls = 0;
    std::size_t distinct_residuals = 0;
    double max_step_error = 0.0;
    bool edge_flag = false;
};

/// Eliminates the last grid point: g(x_1..x_n) = [T_{t - s_n} f(x_1..x_n, .)](x_n).
/// The result is a dense gamble on the grid without its last point.
FinitaryGamble backward_reduce(const TransitionEngine& engine, const FinitaryGamble& f);

/// Upper expectation of a finitary gamble: time 0 is prepended when absent,
/// the recursion runs backwards over the grid and E0 is applied at time 0.
/// Sections are formed lazily by partial evaluation of the expression and
/// memoized by their residual, so only distinct future gambles reach the engine.
double evaluate_upper(const InitialUpperExpectation& initial, const TransitionEngine& engine,
                      const FinitaryGamble& f, EvaluationStats* stats = nullptr);

/// -evaluate_upper(-f)
double evaluate_lower(const InitialUpperExpectation& initial, const TransitionEngine& engine,
                      const FinitaryGamble& f, EvaluationStats* stats = nullptr);

/// E_U(f) versus E_V(f o pi_U^V).
CheckReport check_consistency(const InitialUpperExpectation& initial,
                              const TransitionEngine& engine, const TimeGrid& coarse,
                              const TimeGrid& fine, const FinitaryGamble& f, double tol);

struct RateProbe {
    std::vector<double> deltas;
    std::vector<double> ratios;  ///< E[d(t, t+delta)] / delta
    double rate_bound = 0.0;
    CheckReport report;
};

/// Ratios of the jump-gamble upper expectation over shrinking intervals,
/// checked against the generator's rate bound.
RateProbe rate_condition_probe(const InitialUpperExpectation& initial,
                               const TransitionEngine& engine, double t,
                               std::span<const double> deltas, double tol);

using GambleFamily = std::function<FinitaryGamble(int level)>;

struct GridLimit {
    std::vector<double> estimates;  ///< estimate for levels 1..levels
    bool converged = false;         ///< last two estimates within tol
    int converged_level = 0;        ///< first level after which estimates stay within tol (0: none)
    bool monotone = true;
};

/// Evaluates a pointwise-monotone family at levels 1..levels. Throws
/// NotMonotone if consecutive members are not ordered on sampled tuples.
GridLimit grid_limit(const InitialUpperExpectation& initial, const TransitionEngine& engine,
                     const GambleFamily& family, int levels, Monotonicity direction,
                     double tol, std::uint64_t seed = 1);

struct DownwardProbe {
    std::vector<double> estimates;
    double limit_value = 0.0;
    CheckReport report;
};

/// Numeric witness of downward continuity: E(f_n) for n = 1..count against
/// E(limit). Throws NotMonotone if the sequence is not decreasing.
DownwardProbe downward_probe(const InitialUpperExpectation& initial,
                             const TransitionEngine& engine, const GambleFamily& sequence,
                             int count, const FinitaryGamble& limit, double tol,
                             std::uint64_t seed = 1);

/// Checks f_b >= f_a (increasing) or f_b <= f_a (decreasing) on random path
/// tuples over the merged grid. Returns the worst violation.
double family_order_violation(const FinitaryGamble& a, const FinitaryGamble& b,
                              const StateSpace& space, Monotonicity direction,
                              std::size_t samples, std::uint64_t seed);

} // namespace subexp

#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "subexp/gamble.hpp"
#include "subexp/rate_interval.hpp"
#include "subexp/rate_matrix.hpp"
#include "subexp/state_space.hpp"

namespace subexp {

/// Pointwise upper envelope of finitely many rate matrices.
struct Extremes {
    std::vector<RateMatrix> matrices;
};

/// Elementwise bounds on the rows of a rate matrix. The credal set of row x
/// is {q : lower(x,.) <= q <= upper(x,.), sum q = 0}.
struct RowIntervals {
    Eigen::MatrixXd lower;
    Eigen::MatrixXd upper;
};

/// Sublinear Poisson generator: max over lambda in the interval of
/// lambda * (f(z+1) - f(z)).
struct PoissonInterval {
    RateInterval rates;
};

using GeneratorSpec = std::variant<Extremes, RowIntervals, PoissonInterval>;

enum class Execution { serial, parallel };

/// A sublinear, positively homogeneous operator that maps constants to zero
/// and satisfies the positive maximum principle. Immutable after construction.
class UpperRateOperator {
public:
    /// Validates the spec against the space; throws InvalidArgument,
    /// DimensionMismatch or InfeasibleIntervals.
    UpperRateOperator(StateSpace space, GeneratorSpec spec);

    /// Skips validation of the individual matrices (used for counterexamples).
    static UpperRateOperator unchecked(StateSpace space, GeneratorSpec spec);

    const StateSpace& space() const { return space_; }
    const GeneratorSpec& spec() const { return spec_; }

    /// [Q f](x) for one retained state x.
    double row_value(const Gamble& f, std::size_t x) const;

    /// Q f on every retained state; the tail of the result is zero.
    Gamble apply(const Gamble& f, Execution execution = Execution::parallel) const;

    /// out[x - begin] = [Q f](x), or f(x) + delta [Q f](x) when `euler`, for
    /// x in [begin, end). Each entry depends on f alone.
    void evaluate_rows(const Gamble& f, double delta, bool euler, std::size_t begin, std::size_t end,
                       double* out) const;

    /// max_x [Q(1 - 1_x)](x), cached at construction.
    double rate_bound() const { return rate_bound_; }

    /// Largest |x - y| over which the operator couples states.
    std::size_t bandwidth() const { return bandwidth_; }

    bool is_linear() const;

    void check_operand(const Gamble& f) const;

private:
    struct NoCheck {};
    UpperRateOperator(StateSpace space, GeneratorSpec spec, NoCheck);
    void validate() const;
    void compute_constants();

    struct Coupling {
        std::size_t y;
        double rate;
    };

    StateSpace space_;
    GeneratorSpec spec_;
    /// Nonzero off-diagonal entries of each extreme matrix, per row.
    std::vector<std::vector<std::vector<Coupling>>> couplings_;
    /// Row-major copies of the interval bounds.
    std::vector<double> interval_lower_;
    std::vector<double> interval_upper_;
    double rate_bound_ = 0.0;
    std::size_t bandwidth_ = 0;
};

/// Operator whose application is the pointwise maximum over `matrices`.
UpperRateOperator upper_envelope(const StateSpace& space, std::vector<RateMatrix> matrices);

/// Finite-space convenience: labels "0".."n-1".
UpperRateOperator upper_envelope(std::vector<RateMatrix> matrices);

/// Row maximization over an interval credal row by greedy water-filling.
/// `lower`/`upper` hold the bounds for row x; returns the maximizing row.
std::vector<double> greedy_interval_row(std::span<const double> lower,
                                        std::span<const double> upper,
                                        std::span<const double> f, std::size_t x);

} // namespace subexp

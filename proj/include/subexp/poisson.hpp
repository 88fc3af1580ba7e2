#pragma once

#include <cstddef>
#include <vector>

#include "subexp/gamble.hpp"
#include "subexp/rate_interval.hpp"
#include "subexp/report.hpp"
#include "subexp/upper_rate_operator.hpp"

namespace subexp {

/// Sublinear Poisson generator on a truncated nonnegative-integer space.
/// Throws InvalidArgument for finite spaces.
UpperRateOperator poisson_generator(RateInterval rates, const StateSpace& space);

/// Poisson masses e^{-p} p^k / k! for k = 0..K.
struct PoissonPmf {
    double parameter = 0.0;
    std::vector<double> masses;
    double tail_bound = 0.0;  ///< bound on the mass beyond K
};

/// Linear-space recurrence; accurate for parameters up to 50, rejected above
/// 700 where e^{-p} underflows.
PoissonPmf poisson_pmf(double parameter, std::size_t K);

enum class Monotonicity { increasing, decreasing };

bool is_monotone(const Gamble& f, Monotonicity direction);

/// Upper expectation of a monotone gamble after time t from state z:
/// sum_k f(z+k) psi(k) with psi Poisson(upper*t) for increasing f and
/// Poisson(lower*t) for decreasing f. Throws NotMonotone.
double monotone_closed_form(RateInterval rates, double t, std::size_t z, const Gamble& f,
                            Monotonicity direction, double tol = 1e-13);

/// Smallest truncation level keeping the Poisson tail negligible for states
/// up to z_max and horizons up to t_max.
std::size_t default_truncation(std::size_t z_max, double lambda_upper, double t_max);

/// Runs the Euler engine on a battery of monotone gambles and compares with
/// the closed form; also checks (1/t)[M_t(1 - 1_z)](z) = (1 - e^{-upper t})/t <= upper.
CheckReport check_poisson_semigroup(RateInterval rates, double t, double tol);

} // namespace subexp

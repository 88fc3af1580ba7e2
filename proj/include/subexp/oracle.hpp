#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "subexp/fidi.hpp"
#include "subexp/gamble.hpp"
#include "subexp/rate_matrix.hpp"

namespace subexp::oracle {

struct OracleResult {
    double value = 0.0;
    double error_bound = 0.0;
    std::string method;
};

struct VectorResult {
    Gamble value;
    double error_bound = 0.0;
    std::string method;
};

/// e^{tQ} f by a Taylor series with scaling and squaring. The bound covers
/// the series remainder propagated through the squarings.
VectorResult precise_exponential(const RateMatrix& q, double t, const Gamble& f);

struct TwoStateTransition {
    std::array<std::array<double, 2>, 2> p{};
    std::string note;
};

/// Transition matrix of [[-a, a], [b, -b]] at time t.
TwoStateTransition two_state_closed_form(double a, double b, double t);

/// 1 - e^{-lambda delta}
double poisson_jump_prob(double lambda, double delta);

/// Monte Carlo lower bound on the envelope upper expectation: random
/// piecewise-constant selections (one extreme per grid interval and state),
/// simulated paths, max empirical mean. error_bound holds the standard error
/// of the reported mean. When the selection space has at most n_policies
/// members it is enumerated instead of sampled.
OracleResult policy_mc_lower(const std::vector<RateMatrix>& extremes,
                             const InitialUpperExpectation& initial, const FinitaryGamble& f,
                             std::size_t n_policies, std::size_t n_paths, std::uint64_t seed);

} // namespace subexp::oracle

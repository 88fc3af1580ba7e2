#pragma once

#include <cstdint>
#include <functional>
#include <random>

#include "subexp/gamble.hpp"
#include "subexp/upper_rate_operator.hpp"

namespace subexp {

struct AxiomReport {
    bool passed = true;
    std::size_t samples = 0;
    double worst_constant = 0.0;       ///< max |Q c|
    double worst_subadditivity = 0.0;  ///< max of Q(f+g) - Qf - Qg beyond tolerance scale
    double worst_homogeneity = 0.0;    ///< max |Q(mu f) - mu Q f|
    double worst_pmp = 0.0;            ///< max [Qf](x*) over argmax states with f(x*) >= 0
};

/// Samples random gambles and checks the upper-rate-operator axioms:
/// constants to zero, subadditivity, positive homogeneity and the positive
/// maximum principle. Deterministic indicator-type probes -1_y are always
/// included for the maximum principle.
AxiomReport check_upper_rate_axioms(const UpperRateOperator& op, std::size_t sample_count,
                                    std::uint64_t seed);

struct NormBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// Bracket on the operator seminorm sup{||Qf|| : ||f|| = 1}. The lower end
/// comes from sign-vector gambles (enumerated while 2^states fits in
/// `budget`, sampled otherwise); the upper end from 2 max|Q(x,x)| over the
/// generating rate rows.
NormBounds operator_norm_estimate(const UpperRateOperator& op, std::size_t budget,
                                  std::uint64_t seed);

/// -U(-f) for an upper evaluator U.
Gamble lower_via_conjugacy(const std::function<Gamble(const Gamble&)>& apply_upper,
                           const Gamble& f);

/// Uniform values in [-scale, scale]; truncated spaces also get a random tail.
Gamble random_gamble(const StateSpace& space, std::mt19937_64& rng, double scale = 1.0);

/// Random rate matrix with off-diagonal entries uniform in [0, max_rate].
RateMatrix random_rate_matrix(std::size_t n, std::mt19937_64& rng, double max_rate);

} // namespace subexp

#pragma once

#include <cstddef>
#include <span>

#include "subexp/errors.hpp"
#include "subexp/gamble.hpp"
#include "subexp/rate_matrix.hpp"
#include "subexp/report.hpp"
#include "subexp/upper_rate_operator.hpp"

namespace subexp {

struct StepReport {
    std::size_t n_steps = 0;       ///< Euler steps in the finest iterate
    double estimated_error = 0.0;  ///< last successive difference (heuristic)
    bool edge_flag = false;        ///< some retained states may see the truncation edge
    std::size_t clean_states = 0;  ///< states [0, clean_states) are edge-free
    bool converged = true;
};

/// Thrown when the doubling schedule exceeds the iteration cap.
class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, StepReport report)
        : Error(what), report_(report) {}
    const StepReport& report() const { return report_; }

private:
    StepReport report_;
};

struct EngineOptions {
    /// Largest admissible Euler step; 0 selects 1 / rate_bound.
    double step_cap = 0.0;
    /// Sup-norm Cauchy tolerance on the extrapolated iterates.
    double tolerance = 1e-10;
    /// Largest n tried by the doubling schedule.
    std::size_t iteration_cap = std::size_t{1} << 20;
    /// Richardson levels applied to the Euler iterates (0 = plain Euler).
    int richardson_depth = 2;
    Execution execution = Execution::parallel;
};

struct Evolution {
    Gamble value;
    StepReport report;
};

/// Evaluates exp(t Q) f = lim (I + (t/n) Q)^n f for an upper rate operator Q.
class TransitionEngine {
public:
    explicit TransitionEngine(UpperRateOperator generator, EngineOptions options = {});

    const UpperRateOperator& generator() const { return generator_; }
    const StateSpace& space() const { return generator_.space(); }
    const EngineOptions& options() const { return options_; }
    double step_cap() const { return step_cap_; }
    double tolerance() const { return options_.tolerance; }

    /// Throws NonConvergence when the iteration cap is reached.
    Evolution apply(double t, const Gamble& f) const;

    /// Number of leading states whose value at horizon t cannot be influenced
    /// by the truncation edge (up to a 1e-15 Poisson tail bound on the jump count).
    std::size_t clean_states(double t) const;

private:
    UpperRateOperator generator_;
    EngineOptions options_;
    double step_cap_;
};

/// f + delta * Q f. Throws StepTooLarge unless delta * rate_bound <= 1.
Gamble transition_step(const UpperRateOperator& op, double delta, const Gamble& f,
                       Execution execution = Execution::parallel);

/// (I + delta Q)^n f
Gamble euler_iterate(const UpperRateOperator& op, double delta, std::size_t n, const Gamble& f,
                     Execution execution = Execution::parallel);

Evolution exponential_apply(const TransitionEngine& engine, double t, const Gamble& f);

/// Dynamic program over the extreme matrices: at each of n steps and each
/// state, pick the matrix maximizing f(x) + delta [Q f](x). Independent
/// reference for the envelope Euler product.
Gamble selection_dp(std::span<const RateMatrix> extremes, double delta, std::size_t n,
                    const Gamble& f);

/// ||T_{s+t} f - T_s T_t f|| on clean states, worst over fs.
CheckReport check_semigroup_law(const TransitionEngine& engine, double s, double t,
                                std::span<const Gamble> fs, double tol);

/// ||T_t f - T_t g|| <= ||f - g|| + 1e-12
CheckReport check_contraction(const TransitionEngine& engine, double t, const Gamble& f,
                              const Gamble& g);

/// Chernoff-type bound on P(Poisson(mean) >= k).
double poisson_tail_bound(double mean, std::size_t k);

} // namespace subexp

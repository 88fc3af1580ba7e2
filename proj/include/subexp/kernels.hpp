#pragma once

#include <cstddef>
#include <span>

#include "subexp/gamble.hpp"
#include "subexp/upper_rate_operator.hpp"

namespace subexp::kernels {

/// States below this count run the parallel kernels single-threaded; the
/// per-step fork/join would dominate otherwise.
inline constexpr std::size_t parallel_min_states = 512;

// Each pair computes identical values: every output state is a function of
// the input alone and no reduction crosses states, so the parallel kernels
// are bit-identical to the serial reference.

void apply_serial(const UpperRateOperator& op, const Gamble& f, std::span<double> out);
void apply_parallel(const UpperRateOperator& op, const Gamble& f, std::span<double> out);

/// out = f + delta * Q f on the retained states.
void euler_step_serial(const UpperRateOperator& op, double delta, const Gamble& f,
                       std::span<double> out);
void euler_step_parallel(const UpperRateOperator& op, double delta, const Gamble& f,
                         std::span<double> out);

inline void euler_step(Execution execution, const UpperRateOperator& op, double delta,
                       const Gamble& f, std::span<double> out) {
    if (execution == Execution::parallel)
        euler_step_parallel(op, delta, f, out);
    else
        euler_step_serial(op, delta, f, out);
}

} // namespace subexp::kernels

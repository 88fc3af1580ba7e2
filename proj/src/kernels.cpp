#include "subexp/kernels.hpp"

#include <algorithm>
#include <cstddef>

namespace subexp::kernels {
namespace {

constexpr std::size_t block = 256;

void rows_parallel(const UpperRateOperator& op, const Gamble& f, double delta, bool euler, std::span<double> out) {
    const std::size_t n = op.space().size();
    const auto blocks = static_cast<std::ptrdiff_t>((n + block - 1) / block);
#pragma omp parallel for schedule(static) if (n >= parallel_min_states)
    for (std::ptrdiff_t b = 0; b < blocks; ++b) {
        const std::size_t begin = static_cast<std::size_t>(b) * block;
        const std::size_t end = std::min(n, begin + block);
        op.evaluate_rows(f, delta, euler, begin, end, out.data() + begin);
    }
}

} // namespace

void apply_serial(const UpperRateOperator& op, const Gamble& f, std::span<double> out) {
    op.evaluate_rows(f, 0.0, false, 0, op.space().size(), out.data());
}

void apply_parallel(const UpperRateOperator& op, const Gamble& f, std::span<double> out) {
    rows_parallel(op, f, 0.0, false, out);
}

void euler_step_serial(const UpperRateOperator& op, double delta, const Gamble& f,
                       std::span<double> out) {
    op.evaluate_rows(f, delta, true, 0, op.space().size(), out.data());
}

void euler_step_parallel(const UpperRateOperator& op, double delta, const Gamble& f,
                         std::span<double> out) {
    rows_parallel(op, f, delta, true, out);
}

} // namespace subexp::kernels

// Serial reference kernels versus their OpenMP counterparts.
//   bench_kernels [repetitions]

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <vector>

#include "subexp/kernels.hpp"
#include "subexp/operator_checks.hpp"
#include "subexp/poisson.hpp"
#include "subexp/semigroup.hpp"

using namespace subexp;

namespace {

template <class F>
double seconds(int reps, F&& body) {
    const auto start = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) body();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void compare(const char* name, const UpperRateOperator& op, int reps) {
    std::mt19937_64 rng(7);
    const Gamble f = random_gamble(op.space(), rng);
    const double delta = 1.0 / op.rate_bound();
    std::vector<double> a(op.space().size()), b(op.space().size());
    const double ts = seconds(reps, [&] { kernels::euler_step_serial(op, delta, f, a); });
    const double tp = seconds(reps, [&] { kernels::euler_step_parallel(op, delta, f, b); });
    std::printf("%-28s states=%-7zu serial %9.3f ms  parallel %9.3f ms  speedup %5.2f  identical=%s\n", name,
                op.space().size(), 1e3 * ts / reps, 1e3 * tp / reps, ts / tp, a == b ? "yes" : "NO");
}

} // namespace

int main(int argc, char** argv) {
    const int reps = argc > 1 ? std::atoi(argv[1]) : 20;
    std::printf("threads: %d\n", omp_get_max_threads());

    compare("poisson-interval", poisson_generator(RateInterval(1.0, 2.0), StateSpace::truncated(200000)), reps);

    std::mt19937_64 rng(11);
    std::vector<RateMatrix> mats;
    for (int k = 0; k < 4; ++k) mats.push_back(random_rate_matrix(600, rng, 1.0));
    compare("envelope (4 dense 600x600)", upper_envelope(std::move(mats)), reps);

    const std::size_t n = 800;
    Eigen::MatrixXd lower = Eigen::MatrixXd::Zero(n, n), upper = Eigen::MatrixXd::Zero(n, n);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t y = 0; y < n; ++y) {
            if (x == y) continue;
            lower(x, y) = 0.1 * u(rng) / n;
            upper(x, y) = lower(x, y) + u(rng) / n;
        }
        lower(x, x) = -2.0;
        upper(x, x) = -0.01;
    }
    compare("row-intervals 800x800", UpperRateOperator(StateSpace::finite(n), RowIntervals{lower, upper}), reps);

    // Whole-engine comparison on a long Poisson evolution.
    const auto op = poisson_generator(RateInterval(1.0, 2.0), StateSpace::truncated(20000));
    std::vector<double> values(20000);
    for (std::size_t z = 0; z < values.size(); ++z) values[z] = std::sqrt(static_cast<double>(z));
    const Gamble f(values, std::sqrt(20000.0));
    EngineOptions serial, parallel;
    serial.execution = Execution::serial;
    serial.tolerance = parallel.tolerance = 1e-8;
    Gamble rs = f, rp = f;
    const double ts = seconds(1, [&] { rs = TransitionEngine(op, serial).apply(0.5, f).value; });
    const double tp = seconds(1, [&] { rp = TransitionEngine(op, parallel).apply(0.5, f).value; });
    std::printf("%-28s states=%-7zu serial %9.3f ms  parallel %9.3f ms  speedup %5.2f  identical=%s\n",
                "engine apply t=0.5", values.size(), 1e3 * ts, 1e3 * tp, ts / tp,
                std::ranges::equal(rs.values(), rp.values()) ? "yes" : "NO");
}

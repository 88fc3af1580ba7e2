#include "subexp/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "subexp/kernels.hpp"

namespace subexp {

namespace {

constexpr double step_slack = 1e-12;
constexpr double edge_tail_threshold = 1e-15;

void check_step(const UpperRateOperator& op, double delta) {
    if (!(delta >= 0.0)) throw InvalidArgument("step must be nonnegative");
    if (delta * op.rate_bound() > 1.0 + step_slack)
        throw StepTooLarge("step " + std::to_string(delta) + " times rate bound " +
                           std::to_string(op.rate_bound()) + " exceeds 1");
}

} // namespace

double poisson_tail_bound(double mean, std::size_t k) {
    if (k == 0) return 1.0;
    if (mean <= 0.0) return 0.0;
    const double kd = static_cast<double>(k);
    if (kd <= mean) return 1.0;
    return std::min(1.0, std::exp(-mean + kd * (1.0 + std::log(mean) - std::log(kd))));
}

TransitionEngine::TransitionEngine(UpperRateOperator generator, EngineOptions options)
    : generator_(std::move(generator)), options_(options) {
    if (!(options_.tolerance > 0.0)) throw InvalidArgument("engine tolerance must be positive");
    if (options_.iteration_cap < 1) throw InvalidArgument("iteration cap must be positive");
    if (options_.richardson_depth < 0) throw InvalidArgument("Richardson depth must be >= 0");
    const double rate = generator_.rate_bound();
    if (options_.step_cap == 0.0)
        step_cap_ = rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
    else
        step_cap_ = options_.step_cap;
    if (!(step_cap_ > 0.0)) throw InvalidArgument("step cap must be positive");
    if (step_cap_ * rate > 1.0 + step_slack)
        throw InvalidArgument("step cap times rate bound exceeds 1");
}

std::size_t TransitionEngine::clean_states(double t) const {
    const std::size_t n = space().size();
    if (!space().is_truncated()) return n;
    const std::size_t band = generator_.bandwidth();
    const double mean = generator_.rate_bound() * t;
    if (band == 0 || mean <= 0.0) return n;
    std::size_t k = 1;
    while (poisson_tail_bound(mean, k) > edge_tail_threshold) ++k;
    const std::size_t reach = band * (k - 1);
    return reach < n ? n - reach : 0;
}

Evolution TransitionEngine::apply(double t, const Gamble& f) const {
    if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("time must be finite and >= 0");
    generator_.check_operand(f);

    StepReport report;
    report.clean_states = clean_states(t);
    report.edge_flag = report.clean_states < f.size();
    if (t == 0.0) return {f, report};

    const std::size_t compare = report.clean_states == 0 ? f.size() : report.clean_states;
    const double rate = generator_.rate_bound();
    std::size_t n = 1;
    n = std::max(n, static_cast<std::size_t>(std::ceil(2.0 * t * rate)));
    if (std::isfinite(step_cap_)) n = std::max(n, static_cast<std::size_t>(std::ceil(t / step_cap_)));

    const int depth = options_.richardson_depth;
    const int min_level = std::min(2, std::max(depth, 1));
    std::vector<Gamble> previous_row;
    Gamble previous;
    for (int k = 0;; ++k) {
        if (n > options_.iteration_cap) {
            report.converged = false;
            throw NonConvergence("no convergence within " + std::to_string(options_.iteration_cap) +
                                     " Euler steps (last change " +
                                     std::to_string(report.estimated_error) + ")",
                                 report);
        }
        std::vector<Gamble> row;
        row.push_back(euler_iterate(generator_, t / static_cast<double>(n), n, f, options_.execution));
        for (int j = 1; j <= std::min(k, depth); ++j) {
            const double weight = 1.0 / (std::ldexp(1.0, j) - 1.0);
            row.push_back(row[j - 1] + weight * (row[j - 1] - previous_row[j - 1]));
        }
        if (k >= 1) {
            report.n_steps = n;
            report.estimated_error = sup_distance(row.back(), previous, compare);
            if (k >= min_level && report.estimated_error < options_.tolerance)
                return {row.back(), report};
        }
        previous = row.back();
        previous_row = std::move(row);
        n *= 2;
    }
}

Gamble transition_step(const UpperRateOperator& op, double delta, const Gamble& f,
                       Execution execution) {
    op.check_operand(f);
    check_step(op, delta);
    std::vector<double> out(f.size());
    kernels::euler_step(execution, op, delta, f, out);
    return Gamble(std::move(out), f.tail());
}

Gamble euler_iterate(const UpperRateOperator& op, double delta, std::size_t n, const Gamble& f,
                     Execution execution) {
    op.check_operand(f);
    check_step(op, delta);
    Gamble current = f;
    std::vector<double> buffer(f.size());
    for (std::size_t step = 0; step < n; ++step) {
        kernels::euler_step(execution, op, delta, current, buffer);
        current.swap_values(buffer);
    }
    return current;
}

Evolution exponential_apply(const TransitionEngine& engine, double t, const Gamble& f) {
    return engine.apply(t, f);
}

Gamble selection_dp(std::span<const RateMatrix> extremes, double delta, std::size_t n,
                    const Gamble& f) {
    if (extremes.empty()) throw InvalidArgument("selection DP needs at least one matrix");
    const std::size_t size = f.size();
    double rate = 0.0;
    for (const auto& q : extremes) {
        if (q.size() != size) throw DimensionMismatch("matrix size does not match gamble");
        rate = std::max(rate, q.max_exit_rate());
    }
    if (!(delta >= 0.0)) throw InvalidArgument("step must be nonnegative");
    if (delta * rate > 1.0 + step_slack) throw StepTooLarge("delta times max exit rate exceeds 1");

    std::vector<double> value(f.values().begin(), f.values().end());
    std::vector<double> next(size);
    for (std::size_t step = 0; step < n; ++step) {
        for (std::size_t x = 0; x < size; ++x) {
            double best = -std::numeric_limits<double>::infinity();
            for (const auto& q : extremes) {
                double drift = 0.0;
                for (std::size_t y = 0; y < size; ++y) drift += q(x, y) * value[y];
                best = std::max(best, value[x] + delta * drift);
            }
            next[x] = best;
        }
        value.swap(next);
    }
    return Gamble(std::move(value), f.tail());
}

CheckReport check_semigroup_law(const TransitionEngine& engine, double s, double t,
                                std::span<const Gamble> fs, double tol) {
    if (!(s >= 0.0) || !(t >= 0.0)) throw InvalidArgument("times must be nonnegative");
    CheckReport report{"semigroup", tol};
    for (const auto& f : fs) {
        const auto joint = engine.apply(s + t, f);
        const auto inner = engine.apply(t, f);
        const auto outer = engine.apply(s, inner.value);
        const std::size_t clean = joint.report.clean_states == 0 ? f.size() : joint.report.clean_states;
        report.record(sup_distance(joint.value, outer.value, clean));
    }
    return report;
}

CheckReport check_contraction(const TransitionEngine& engine, double t, const Gamble& f,
                              const Gamble& g) {
    CheckReport report{"contraction", 1e-12};
    const auto tf = engine.apply(t, f);
    const auto tg = engine.apply(t, g);
    report.record(gamble_norm(tf.value - tg.value) - gamble_norm(f - g));
    return report;
}

} // namespace subexp

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "subexp/errors.hpp"
#include "subexp/fidi.hpp"

namespace subexp {

CheckReport check_consistency(const InitialUpperExpectation& initial,
                              const TransitionEngine& engine, const TimeGrid& coarse,
                              const TimeGrid& fine, const FinitaryGamble& f, double tol) {
    if (!(f.grid() == coarse)) throw GridMismatch("gamble does not live on the coarse grid");
    if (!coarse.is_subset_of(fine)) throw GridMismatch("coarse grid is not contained in the fine grid");
    CheckReport report{"consistency", tol};
    const double a = evaluate_upper(initial, engine, f);
    const double b = evaluate_upper(initial, engine, f.lift(fine));
    report.record(std::abs(a - b));
    char buf[96];
    std::snprintf(buf, sizeof buf, "coarse %.12g fine %.12g", a, b);
    report.detail = buf;
    return report;
}

RateProbe rate_condition_probe(const InitialUpperExpectation& initial,
                               const TransitionEngine& engine, double t,
                               std::span<const double> deltas, double tol) {
    if (!(t >= 0.0)) throw InvalidArgument("probe time must be nonnegative");
    if (deltas.empty()) throw InvalidArgument("probe needs at least one interval length");
    for (std::size_t k = 0; k < deltas.size(); ++k) {
        if (!(deltas[k] > 0.0)) throw InvalidArgument("interval lengths must be positive");
        if (k > 0 && !(deltas[k] < deltas[k - 1]))
            throw InvalidArgument("interval lengths must be strictly decreasing");
    }
    RateProbe probe;
    probe.rate_bound = engine.generator().rate_bound();
    probe.report = CheckReport{"rate-condition", tol};
    for (double d : deltas) {
        const double ratio = evaluate_upper(initial, engine, jump_gamble(t, t + d)) / d;
        probe.deltas.push_back(d);
        probe.ratios.push_back(ratio);
        probe.report.record(std::max(0.0, ratio - probe.rate_bound));
    }
    return probe;
}

double family_order_violation(const FinitaryGamble& a, const FinitaryGamble& b,
                              const StateSpace& space, Monotonicity direction,
                              std::size_t samples, std::uint64_t seed) {
    const TimeGrid grid = TimeGrid::merge(a.grid(), b.grid());
    const FinitaryGamble fa = a.lift(grid);
    const FinitaryGamble fb = b.lift(grid);
    const std::size_t codes = space.codes();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, codes - 1);
    std::bernoulli_distribution stay(0.95);
    std::vector<std::size_t> tuple(grid.size(), 0);
    double worst = 0.0;
    auto probe = [&] {
        const double gap = direction == Monotonicity::increasing ? fa(tuple) - fb(tuple)
                                                                 : fb(tuple) - fa(tuple);
        worst = std::max(worst, gap);
    };
    probe();
    for (std::size_t s = 0; s < samples; ++s) {
        // Alternate between uniform tuples and slowly varying paths.
        const bool sticky = s % 2 == 1;
        for (std::size_t k = 0; k < tuple.size(); ++k)
            tuple[k] = (sticky && k > 0 && stay(rng)) ? tuple[k - 1] : pick(rng);
        probe();
    }
    return worst;
}

GridLimit grid_limit(const InitialUpperExpectation& initial, const TransitionEngine& engine,
                     const GambleFamily& family, int levels, Monotonicity direction,
                     double tol, std::uint64_t seed) {
    if (levels < 1) throw InvalidArgument("grid limit needs at least one level");
    GridLimit out;
    std::optional<FinitaryGamble> previous;
    for (int level = 1; level <= levels; ++level) {
        FinitaryGamble current = family(level);
        if (previous) {
            const double v = family_order_violation(*previous, current, engine.space(), direction, 256,
                                                    seed + static_cast<std::uint64_t>(level));
            if (v > 1e-12) throw NotMonotone("family is not monotone between consecutive levels");
        }
        const double e = evaluate_upper(initial, engine, current);
        if (!out.estimates.empty()) {
            const double step = e - out.estimates.back();
            if (direction == Monotonicity::increasing ? step < -1e-10 : step > 1e-10) out.monotone = false;
        }
        out.estimates.push_back(e);
        previous.emplace(std::move(current));
    }
    const auto& est = out.estimates;
    out.converged = est.size() >= 2 && std::abs(est.back() - est[est.size() - 2]) < tol;
    for (std::size_t l = 0; l < est.size() && out.converged_level == 0; ++l) {
        bool settled = true;
        for (std::size_t j = l + 1; j < est.size(); ++j)
            settled = settled && std::abs(est[j] - est[l]) < tol;
        if (settled && est.size() >= 2) out.converged_level = static_cast<int>(l) + 1;
    }
    return out;
}

DownwardProbe downward_probe(const InitialUpperExpectation& initial,
                             const TransitionEngine& engine, const GambleFamily& sequence,
                             int count, const FinitaryGamble& limit, double tol,
                             std::uint64_t seed) {
    if (count < 1) throw InvalidArgument("downward probe needs at least one member");
    DownwardProbe out;
    out.report = CheckReport{"downward-continuity", tol};
    std::optional<FinitaryGamble> previous;
    for (int n = 1; n <= count; ++n) {
        FinitaryGamble current = sequence(n);
        const std::uint64_t s = seed + static_cast<std::uint64_t>(n);
        if (previous &&
            family_order_violation(*previous, current, engine.space(), Monotonicity::decreasing, 256, s) > 1e-12)
            throw NotMonotone("sequence is not decreasing");
        if (family_order_violation(limit, current, engine.space(), Monotonicity::increasing, 256, s) > 1e-12)
            throw NotMonotone("sequence falls below its stated limit");
        out.estimates.push_back(evaluate_upper(initial, engine, current));
        previous.emplace(std::move(current));
    }
    out.limit_value = evaluate_upper(initial, engine, limit);
    out.report.record(std::abs(out.estimates.back() - out.limit_value));
    for (std::size_t k = 1; k < out.estimates.size(); ++k)
        if (out.estimates[k] > out.estimates[k - 1] + 1e-10) {
            out.report.passed = false;
            out.report.detail = "estimates increase along a decreasing sequence";
        }
    return out;
}

} // namespace subexp

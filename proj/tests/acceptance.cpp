// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

#include "subexp/fidi.hpp"
#include "subexp/operator_checks.hpp"
#include "subexp/oracle.hpp"
#include "subexp/poisson.hpp"
#include "subexp/semigroup.hpp"

using namespace subexp;
using subexp::expr::operator+;
using subexp::expr::operator*;

namespace {

struct Outcome {
    bool passed = true;
    double worst = 0.0;
    double tolerance = 0.0;
    std::string note;
    bool first = true;

    void record(double deviation, double tol) {
        if (!(deviation <= tol)) passed = false;
        // Keep the part closest to (or furthest past) its own tolerance.
        const auto ratio = [](double d, double t) { return t > 0.0 ? d / t : (d > 0.0 ? HUGE_VAL : 0.0); };
        if (first || ratio(deviation, tol) > ratio(worst, tolerance)) {
            worst = deviation;
            tolerance = tol;
        }
        first = false;
    }
};

std::string format(const char* fmt, double a, double b = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, fmt, a, b);
    return buf;
}

Gamble random_monotone(std::size_t n, std::mt19937_64& rng, Monotonicity dir) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(n);
    double level = u(rng) - 0.5;
    const double step = 0.5 * u(rng);
    for (auto& x : v) {
        if (u(rng) < 0.3) level += step * u(rng);
        x = level;
    }
    const double tail = level + step * u(rng);
    Gamble g(std::move(v), tail);
    return dir == Monotonicity::increasing ? g : -1.0 * g;
}

UpperRateOperator random_row_intervals(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd lo = Eigen::MatrixXd::Zero(n, n), up = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t x = 0; x < n; ++x) {
        double off_lo = 0.0, off_up = 0.0;
        for (std::size_t y = 0; y < n; ++y) {
            if (x == y) continue;
            lo(x, y) = u(rng);
            up(x, y) = lo(x, y) + u(rng);
            off_lo += lo(x, y);
            off_up += up(x, y);
        }
        lo(x, x) = -off_up - 0.5 * u(rng);
        up(x, x) = -off_lo + 0.5 * u(rng);
    }
    return UpperRateOperator(StateSpace::finite(n), RowIntervals{lo, up});
}

std::vector<double> random_pmf(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> p(n);
    double total = 0.0;
    for (auto& x : p) total += (x = u(rng));
    for (auto& x : p) x /= total;
    // Put the rounding residue on the last entry so the sum is exact enough.
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) s += p[k];
    p.back() = 1.0 - s;
    return p;
}

TimeGrid random_grid(std::size_t size, std::mt19937_64& rng) {
    std::vector<double> pts;
    std::uniform_int_distribution<int> tick(1, 64);
    while (pts.size() < size) {
        const double t = tick(rng) / 64.0;
        if (std::find(pts.begin(), pts.end(), t) == pts.end()) pts.push_back(t);
    }
    std::sort(pts.begin(), pts.end());
    return TimeGrid(pts);
}

FinitaryGamble random_dense(const TimeGrid& grid, const StateSpace& space, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::size_t total = 1;
    for (std::size_t k = 0; k < grid.size(); ++k) total *= space.codes();
    std::vector<double> data(total);
    for (auto& x : data) x = u(rng);
    return FinitaryGamble::dense(grid, space, std::move(data));
}

std::vector<double> dense_data(const FinitaryGamble& f) { return f.expression()->table->data; }

// ---------------------------------------------------------------------------

Outcome precise_case() {
    Outcome out;
    std::mt19937_64 rng(101);
    for (int k = 0; k < 10; ++k) {
        const std::size_t n = 2 + static_cast<std::size_t>(k) % 5;
        const RateMatrix q = random_rate_matrix(n, rng, 3.0);
        const TransitionEngine engine(upper_envelope({q}));
        for (double t : {0.1, 0.5, 1.0}) {
            for (int j = 0; j < 3; ++j) {
                const Gamble f = random_gamble(engine.space(), rng);
                const Gamble a = exponential_apply(engine, t, f).value;
                const Gamble b = oracle::precise_exponential(q, t, f).value;
                out.record(sup_distance(a, b, n), 1e-8);
            }
        }
    }
    return out;
}

Outcome poisson_closed_form() {
    Outcome out;
    const RateInterval rates(1.0, 2.0);
    const std::size_t n = default_truncation(3, 2.0, 1.0);
    const auto space = StateSpace::truncated(n);
    const TransitionEngine engine(poisson_generator(rates, space));
    std::mt19937_64 rng(202);
    for (double t : {0.1, 0.5, 1.0}) {
        // Mass the truncated chain can lose past the edge, from the worst start state.
        const double tail = poisson_tail_bound(2.0 * t, n - 3);
        for (int k = 0; k < 20; ++k) {
            const auto dir = k % 2 ? Monotonicity::decreasing : Monotonicity::increasing;
            const Gamble f = random_monotone(n, rng, dir);
            const Gamble v = engine.apply(t, f).value;
            const double tol = std::max(1e-6, tail * gamble_norm(f));
            for (std::size_t z : {0, 3}) out.record(std::abs(v[z] - monotone_closed_form(rates, t, z, f, dir)), tol);
        }
        std::vector<double> id(n);
        for (std::size_t z = 0; z < n; ++z) id[z] = static_cast<double>(z);
        const Gamble identity(id, static_cast<double>(n));
        const double tol = std::max(1e-6, tail * gamble_norm(identity));
        out.record(std::abs(engine.apply(t, identity).value[0] - 2.0 * t), tol);
        out.record(std::abs(engine.apply(t, Gamble::complement_indicator(space, 0)).value[0] + std::expm1(-2.0 * t)),
                   1e-6);
    }
    return out;
}

Outcome envelope_domination() {
    Outcome out;
    std::mt19937_64 rng(303);
    for (int k = 0; k < 10; ++k) {
        const std::size_t n = 2 + static_cast<std::size_t>(k) % 4;
        const RateMatrix q1 = random_rate_matrix(n, rng, 3.0), q2 = random_rate_matrix(n, rng, 3.0);
        const TransitionEngine engine(upper_envelope({q1, q2}));
        for (int j = 0; j < 50; ++j) {
            const double t = j % 2 ? 0.5 : 1.0;
            const Gamble f = random_gamble(engine.space(), rng);
            const Gamble up = engine.apply(t, f).value;
            for (const auto& q : {q1, q2}) {
                const Gamble p = oracle::precise_exponential(q, t, f).value;
                for (std::size_t x = 0; x < n; ++x) out.record(std::max(0.0, p[x] - up[x]), 1e-9);
            }
        }
    }
    return out;
}

Outcome selection_dp_equivalence() {
    Outcome out;
    std::mt19937_64 rng(404);
    std::size_t combos = 0;
    for (std::size_t states = 1; states <= 3; ++states)
        for (std::size_t m = 1; m <= 3; ++m)
            for (std::size_t steps = 1; steps <= 6; ++steps)
                for (int rep = 0; rep < 5; ++rep) {
                    std::vector<RateMatrix> mats;
                    for (std::size_t k = 0; k < m; ++k) mats.push_back(random_rate_matrix(states, rng, 3.0));
                    const auto op = upper_envelope(mats);
                    const Gamble f = random_gamble(op.space(), rng);
                    out.record(sup_distance(selection_dp(mats, 0.05, steps, f), euler_iterate(op, 0.05, steps, f), states),
                               1e-12);
                    ++combos;
                }
    out.note = std::to_string(combos) + " cases";
    return out;
}

Outcome semigroup_law() {
    Outcome out;
    std::mt19937_64 rng(505);
    std::vector<TransitionEngine> engines;
    engines.emplace_back(poisson_generator(RateInterval(1.0, 2.0), StateSpace::truncated(200)));
    for (int k = 0; k < 3; ++k)
        engines.emplace_back(upper_envelope({random_rate_matrix(4, rng, 3.0), random_rate_matrix(4, rng, 3.0)}));
    for (const auto& engine : engines) {
        std::vector<Gamble> fs;
        for (int j = 0; j < 20; ++j) fs.push_back(random_gamble(engine.space(), rng));
        for (auto [s, t] : {std::pair{0.2, 0.3}, std::pair{0.5, 0.5}}) {
            const CheckReport r = check_semigroup_law(engine, s, t, fs, 10.0 * engine.tolerance());
            out.record(r.worst, 10.0 * engine.tolerance());
        }
    }
    return out;
}

Outcome contraction() {
    Outcome out;
    std::mt19937_64 rng(606);
    std::vector<TransitionEngine> engines;
    engines.emplace_back(upper_envelope({random_rate_matrix(4, rng, 3.0), random_rate_matrix(4, rng, 3.0)}));
    engines.emplace_back(random_row_intervals(4, rng));
    engines.emplace_back(poisson_generator(RateInterval(1.0, 2.0), StateSpace::truncated(60)));
    std::size_t violations = 0;
    for (int k = 0; k < 200; ++k) {
        const auto& engine = engines[static_cast<std::size_t>(k) % engines.size()];
        const double t = (k / 3) % 3 == 0 ? 0.1 : ((k / 3) % 3 == 1 ? 0.5 : 1.0);
        const Gamble f = random_gamble(engine.space(), rng), g = random_gamble(engine.space(), rng, 0.5);
        const CheckReport r = check_contraction(engine, t, f, g);
        if (!r.passed) ++violations;
        out.record(std::max(0.0, r.worst), 1e-12);
    }
    out.note = std::to_string(violations) + " violations";
    return out;
}

Outcome expectation_axioms() {
    Outcome out;
    std::mt19937_64 rng(707);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<TransitionEngine> engines;
    engines.emplace_back(upper_envelope({random_rate_matrix(3, rng, 2.0), random_rate_matrix(3, rng, 2.0)}));
    engines.emplace_back(random_row_intervals(3, rng));
    engines.emplace_back(upper_envelope({two_state_matrix(1, 2), two_state_matrix(3, 0.5)}));
    for (int k = 0; k < 100; ++k) {
        const auto& engine = engines[static_cast<std::size_t>(k) % engines.size()];
        const auto& space = engine.space();
        const InitialUpperExpectation e0 =
            k % 2 ? InitialUpperExpectation(space, InitialUpperExpectation::Envelope{{random_pmf(space.size(), rng),
                                                                                      random_pmf(space.size(), rng)}})
                  : InitialUpperExpectation(space, InitialUpperExpectation::Vacuous{{0, space.size() - 1}});
        const TimeGrid grid = random_grid(1 + static_cast<std::size_t>(k) % 3, rng);
        const FinitaryGamble f = random_dense(grid, space, rng), g = random_dense(grid, space, rng);
        auto E = [&](const FinitaryGamble& h) { return evaluate_upper(e0, engine, h); };
        const double ef = E(f), eg = E(g);

        std::vector<double> bump = dense_data(f), sum = dense_data(f), scaled = dense_data(f);
        const std::vector<double> gd = dense_data(g);
        const double mu = 3.0 * u(rng);
        for (std::size_t i = 0; i < bump.size(); ++i) {
            bump[i] += 0.5 * u(rng);
            sum[i] += gd[i];
            scaled[i] *= mu;
        }
        const double c = 4.0 * u(rng) - 2.0;
        out.record(std::max(0.0, ef - E(FinitaryGamble::dense(grid, space, bump))), 1e-9);
        out.record(std::abs(E(FinitaryGamble(grid, expr::constant(c))) - c), 1e-9);
        out.record(std::max(0.0, E(FinitaryGamble::dense(grid, space, sum)) - ef - eg), 1e-9);
        out.record(std::abs(E(FinitaryGamble::dense(grid, space, scaled)) - mu * ef), 1e-9);
    }
    return out;
}

ExprPtr random_expression(const std::vector<std::size_t>& coords, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, coords.size() - 1);
    std::uniform_int_distribution<int> kind(0, 3);
    std::uniform_real_distribution<double> w(-1.0, 1.0);
    std::vector<ExprPtr> terms;
    for (int k = 0; k < 3; ++k) {
        const std::size_t i = coords[pick(rng)], j = coords[pick(rng)];
        switch (kind(rng)) {
        case 0: terms.push_back(w(rng) * expr::indicator_differ(i, j)); break;
        case 1: terms.push_back(w(rng) * expr::min({expr::constant(3.0), expr::coord(i)})); break;
        case 2: terms.push_back(w(rng) * expr::indicator_eq(i, static_cast<std::size_t>(pick(rng) % 3))); break;
        default: terms.push_back(expr::max({expr::indicator_eq(i, 1), expr::indicator_eq(j, 2)})); break;
        }
    }
    return expr::sum(std::move(terms));
}

Outcome consistency() {
    Outcome out;
    std::mt19937_64 rng(808);
    const TransitionEngine poisson(poisson_generator(RateInterval(1.0, 2.0), StateSpace::truncated(63)));
    const TransitionEngine two_state(upper_envelope({two_state_matrix(1, 2), two_state_matrix(3, 0.5)}));
    const auto p0 = InitialUpperExpectation::degenerate(poisson.space(), 0);
    for (int k = 0; k < 20; ++k) {
        const bool use_poisson = k % 2 == 0;
        const TimeGrid fine = random_grid(2 + static_cast<std::size_t>(k) % 3, rng);
        // Drop one or more fine points to obtain the coarse grid.
        std::vector<double> kept;
        std::vector<std::size_t> coords;
        for (std::size_t i = 0; i < fine.size(); ++i)
            if (i == static_cast<std::size_t>(k) % fine.size() || (kept.size() + 1 < fine.size() && rng() % 2))
                kept.push_back(fine[i]);
        if (kept.size() == fine.size()) kept.pop_back();
        const TimeGrid coarse(kept);
        for (std::size_t i = 0; i < coarse.size(); ++i) coords.push_back(i);
        if (use_poisson) {
            const FinitaryGamble f(coarse, random_expression(coords, rng));
            out.record(check_consistency(p0, poisson, coarse, fine, f, 10.0 * poisson.tolerance()).worst,
                       10.0 * poisson.tolerance());
        } else {
            const InitialUpperExpectation e0(two_state.space(),
                                             InitialUpperExpectation::Envelope{{random_pmf(2, rng), random_pmf(2, rng)}});
            const FinitaryGamble f = random_dense(coarse, two_state.space(), rng);
            out.record(check_consistency(e0, two_state, coarse, fine, f, 10.0 * two_state.tolerance()).worst,
                       10.0 * two_state.tolerance());
        }
    }
    return out;
}

Outcome rate_condition() {
    Outcome out;
    const TransitionEngine engine(poisson_generator(RateInterval(1.0, 2.0), StateSpace::truncated(40)));
    const auto e0 = InitialUpperExpectation::degenerate(engine.space(), 0);
    std::vector<double> deltas;
    for (int k = 1; k <= 10; ++k) deltas.push_back(std::ldexp(1.0, -k));
    const RateProbe probe = rate_condition_probe(e0, engine, 0.3, deltas, 0.0);
    double largest = 0.0;
    for (std::size_t k = 0; k < deltas.size(); ++k) {
        const double d = deltas[k];
        out.record(std::abs(probe.ratios[k] - oracle::poisson_jump_prob(2.0, d) / d), 1e-6);
        largest = std::max(largest, probe.ratios[k]);
    }
    if (largest > 2.0) out.passed = false;
    out.note = format("max ratio %.9f", largest);
    return out;
}

Outcome monotone_limits() {
    Outcome out;
    const TransitionEngine two_state(upper_envelope({two_state_matrix(1.0, 2.0)}));
    const auto from0 = InitialUpperExpectation::degenerate(two_state.space(), 0);
    const double target = -std::expm1(-0.7);
    const GridLimit hit = grid_limit(
        from0, two_state, [](int level) { return hitting_gamble(0.7, 1, level); }, 10, Monotonicity::increasing, 1e-3);
    if (!hit.monotone) out.passed = false;
    for (double e : hit.estimates)
        if (e > target + 1e-9) out.passed = false;
    out.record(std::abs(hit.estimates.back() - target), 1e-3);

    const TransitionEngine poisson(poisson_generator(RateInterval(1.0, 2.0), StateSpace::truncated(63)));
    const auto p0 = InitialUpperExpectation::degenerate(poisson.space(), 0);
    const TimeGrid at1({1.0});
    const DownwardProbe down = downward_probe(
        p0, poisson,
        [&](int n) { return FinitaryGamble(at1, expr::indicator_at_least(0, static_cast<std::size_t>(n))); }, 20,
        FinitaryGamble(at1, expr::constant(0.0)), 1e-6);
    if (!down.report.passed) out.passed = false;
    out.record(down.report.worst, 1e-6);
    out.note = format("hitting level 10 %.7f (tol 1e-3), P(X_1 >= 20) %.2e (tol 1e-6)", hit.estimates.back(), down.estimates.back());
    return out;
}

Outcome monte_carlo() {
    Outcome out;
    struct Instance {
        std::vector<RateMatrix> extremes;
        InitialUpperExpectation::Spec initial;
        TimeGrid grid;
        ExprPtr f;
    };
    const std::vector<RateMatrix> a{two_state_matrix(1, 2), two_state_matrix(3, 1)};
    const std::vector<RateMatrix> b{two_state_matrix(0.5, 0.5), two_state_matrix(2, 3)};
    const std::vector<Instance> instances{
        {a, InitialUpperExpectation::Degenerate{0}, TimeGrid({0.7}), expr::indicator_eq(0, 1)},
        {a, InitialUpperExpectation::Degenerate{0}, TimeGrid({0.0, 0.5}), expr::indicator_differ(0, 1)},
        {a, InitialUpperExpectation::Vacuous{{0, 1}}, TimeGrid({0.6}), expr::indicator_eq(0, 0)},
        {a, InitialUpperExpectation::Degenerate{0}, TimeGrid({0.4, 1.0}),
         expr::indicator_eq(0, 1) + expr::indicator_eq(1, 1)},
        {b, InitialUpperExpectation::Degenerate{1}, TimeGrid({0.5, 1.0}),
         expr::indicator_eq(0, 0) + 0.5 * expr::indicator_eq(1, 1)},
    };
    std::string note;
    for (std::size_t k = 0; k < instances.size(); ++k) {
        const auto& in = instances[k];
        const TransitionEngine engine(upper_envelope(in.extremes));
        const InitialUpperExpectation e0(engine.space(), in.initial);
        const FinitaryGamble f(in.grid, in.f);
        const double up = evaluate_upper(e0, engine, f);
        const auto mc = oracle::policy_mc_lower(in.extremes, e0, f, 32, 10000, 1000 + k);
        const double se = mc.error_bound;
        // Distance outside [up - 3se - 1e-3, up + 3se], scaled to the allowed slack.
        const double above = std::max(0.0, mc.value - (up + 3.0 * se));
        const double below = std::max(0.0, (up - 3.0 * se - 1e-3) - mc.value);
        out.record(above + below, 0.0);
        note += format(k ? ", %+.4f" : "mc - engine: %+.4f", mc.value - up);
    }
    out.note = note;
    return out;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome cli_determinism() {
    Outcome out;
    const std::filesystem::path base =
        std::filesystem::temp_directory_path() / ("subexp_acceptance_" + std::to_string(::getpid()));
    std::filesystem::remove_all(base);
    const std::string tutorial = SUBEXP_TUTORIAL_DIR;
    std::string reports[2];
    for (int run = 0; run < 2; ++run) {
        const auto dir = base / ("run" + std::to_string(run));
        const std::string cmd = std::string(SUBEXP_CLI) + " eval --model " + tutorial + "/poisson_model.json" +
                                " --queries " + tutorial + "/poisson_queries.json --out " + dir.string() +
                                " 2>/dev/null";
        const int status = std::system(cmd.c_str());
        if (status != 0) {
            out.passed = false;
            out.note = "cli exit status " + std::to_string(status);
        }
        reports[run] = slurp(dir / "report.json");
    }
    if (reports[0].empty() || reports[0] != reports[1]) out.passed = false;
    if (out.note.empty()) out.note = std::to_string(reports[0].size()) + " bytes, identical";
    std::filesystem::remove_all(base);
    return out;
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const Criterion criteria[] = {
        {"precise-case agreement", precise_case},
        {"poisson closed form", poisson_closed_form},
        {"envelope domination", envelope_domination},
        {"selection DP equivalence", selection_dp_equivalence},
        {"semigroup law", semigroup_law},
        {"contraction", contraction},
        {"upper-expectation axioms", expectation_axioms},
        {"consistency", consistency},
        {"rate condition", rate_condition},
        {"monotone-limit extension", monotone_limits},
        {"monte carlo sanity", monte_carlo},
        {"cli determinism", cli_determinism},
    };
    int failures = 0;
    int index = 0;
    for (const auto& c : criteria) {
        ++index;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.passed = false;
            o.note = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!o.passed) ++failures;
        std::printf("%s %2d %-26s worst %.3e (tol %.1e) %6.2fs  %s\n", o.passed ? "PASS" : "FAIL", index, c.name,
                    o.worst, o.tolerance, secs, o.note.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria passed\n", index - failures, index);
    return failures == 0 ? 0 : 1;
}

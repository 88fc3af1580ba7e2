#include <doctest.h>

#include <cmath>
#include <random>

#include "subexp/errors.hpp"
#include "subexp/fidi.hpp"
#include "subexp/oracle.hpp"
#include "subexp/poisson.hpp"

using namespace subexp;

namespace {

TransitionEngine two_state_engine() { return TransitionEngine(upper_envelope({two_state_matrix(1.0, 2.0)})); }

} // namespace

TEST_CASE("time grids") {
    CHECK_THROWS_AS(TimeGrid({}), InvalidArgument);
    CHECK_THROWS_AS(TimeGrid({0.5, 0.5}), InvalidArgument);
    CHECK_THROWS_AS(TimeGrid({-0.1, 0.5}), InvalidArgument);
    const TimeGrid g({0.0, 0.25, 1.0});
    CHECK(g.index_of(0.25) == 1);
    CHECK_FALSE(g.index_of(0.3));
    CHECK(TimeGrid::merge(g, TimeGrid({0.5})) == TimeGrid({0.0, 0.25, 0.5, 1.0}));
    for (int level = 0; level < 8; ++level) {
        const TimeGrid coarse = TimeGrid::dyadic(0.7, level);
        CHECK(coarse.size() == (std::size_t{1} << level) + 1);
        CHECK(coarse.is_subset_of(TimeGrid::dyadic(0.7, level + 1)));
        CHECK(coarse.back() == 0.7);
    }
}

TEST_CASE("finitary gambles") {
    CHECK_THROWS_AS(FinitaryGamble(TimeGrid({0.5}), parse_expression("coord(1)")), InvalidArgument);
    const FinitaryGamble d = jump_gamble(0.6, 0.5);
    CHECK(d.grid() == TimeGrid({0.5, 0.6}));
    const FinitaryGamble lifted = d.lift(TimeGrid({0.1, 0.5, 0.55, 0.6}));
    const std::vector<std::size_t> path{0, 1, 0, 1};
    CHECK(lifted(path) == 0.0);
    CHECK_THROWS_AS(d.lift(TimeGrid({0.5, 0.7})), GridMismatch);
    CHECK_THROWS_AS(jump_gamble(0.5, 0.5), InvalidArgument);
    const auto space = StateSpace::finite(10);
    CHECK_THROWS_AS(FinitaryGamble::dense(TimeGrid({0, 1, 2, 3, 4, 5, 6, 7}), space, {}), InvalidArgument);
}

TEST_CASE("initial upper expectations") {
    const auto s = StateSpace::finite(3);
    const std::vector<double> g{1.0, 4.0, -2.0};
    CHECK(InitialUpperExpectation::degenerate(s, 1)(g) == 4.0);
    CHECK(InitialUpperExpectation(s, InitialUpperExpectation::Vacuous{{0, 2}})(g) == 1.0);
    const InitialUpperExpectation env(s, InitialUpperExpectation::Envelope{{{0.5, 0.5, 0.0}, {0.0, 0.0, 1.0}}});
    CHECK(env(g) == doctest::Approx(2.5));
    CHECK_THROWS(InitialUpperExpectation(s, InitialUpperExpectation::Envelope{{{0.5, 0.6, 0.0}}}));
    CHECK_THROWS(InitialUpperExpectation::degenerate(s, 3));
}

TEST_CASE("single time point reduces to the transition operator") {
    const auto engine = two_state_engine();
    const auto e0 = InitialUpperExpectation::degenerate(engine.space(), 0);
    const double v = evaluate_upper(e0, engine, FinitaryGamble(TimeGrid({0.7}), parse_expression("indicator(coord(0) == 1)")));
    CHECK(std::abs(v - (1.0 / 3.0) * (1.0 - std::exp(-2.1))) < 1e-9);
}

TEST_CASE("poisson jump probability over an interval") {
    const TransitionEngine engine(poisson_generator(RateInterval(1.0, 2.0), StateSpace::truncated(40)));
    const auto e0 = InitialUpperExpectation::degenerate(engine.space(), 0);
    EvaluationStats stats;
    const double up = evaluate_upper(e0, engine, jump_gamble(0.5, 0.6), &stats);
    CHECK(std::abs(up - oracle::poisson_jump_prob(2.0, 0.1)) < 1e-9);
    CHECK(stats.engine_calls > 0);
    const double low = evaluate_lower(e0, engine, jump_gamble(0.5, 0.6));
    CHECK(std::abs(low - oracle::poisson_jump_prob(1.0, 0.1)) < 1e-9);
}

TEST_CASE("backward reduction preserves the upper expectation") {
    const TransitionEngine engine(upper_envelope({two_state_matrix(1, 2), two_state_matrix(3, 0.5)}));
    const InitialUpperExpectation e0(engine.space(), InitialUpperExpectation::Envelope{{{0.3, 0.7}, {1.0, 0.0}}});
    const FinitaryGamble f(TimeGrid({0.2, 0.5, 0.9}),
                           parse_expression("indicator(coord(0) != coord(1)) + 2 * indicator(coord(2) == 0) - coord(1)"));
    const double direct = evaluate_upper(e0, engine, f);
    const FinitaryGamble once = backward_reduce(engine, f);
    CHECK(once.grid() == TimeGrid({0.2, 0.5}));
    CHECK(std::abs(evaluate_upper(e0, engine, once) - direct) < 1e-10);
    CHECK(std::abs(evaluate_upper(e0, engine, backward_reduce(engine, once)) - direct) < 1e-10);
    CHECK_THROWS_AS(backward_reduce(engine, FinitaryGamble(TimeGrid({0.5}), parse_expression("coord(0)"))), GridMismatch);
}

TEST_CASE("upper expectation sits above the lower one") {
    const TransitionEngine engine(upper_envelope({two_state_matrix(1, 2), two_state_matrix(3, 0.5)}));
    const auto e0 = InitialUpperExpectation::degenerate(engine.space(), 0);
    const FinitaryGamble f(TimeGrid({0.3, 0.6}), parse_expression("indicator(coord(0) != coord(1))"));
    CHECK(evaluate_lower(e0, engine, f) <= evaluate_upper(e0, engine, f));
}

TEST_CASE("inserting a grid point keeps a precise chain consistent") {
    const auto engine = two_state_engine();
    const auto e0 = InitialUpperExpectation::degenerate(engine.space(), 0);
    const TimeGrid coarse({0.2, 0.9});
    const FinitaryGamble f(coarse, parse_expression("indicator(coord(0) == coord(1)) + coord(1)"));
    const CheckReport r = check_consistency(e0, engine, coarse, TimeGrid({0.2, 0.4, 0.9}), f, 1e-8);
    CHECK(r.passed);
    CHECK_THROWS_AS(check_consistency(e0, engine, coarse, TimeGrid({0.2, 0.4}), f, 1e-8), GridMismatch);
}

TEST_CASE("rate probe on a precise chain stays below max(a, b)") {
    const auto engine = two_state_engine();
    const InitialUpperExpectation e0(engine.space(), InitialUpperExpectation::Vacuous{{0, 1}});
    const std::vector<double> deltas{0.5, 0.1, 0.01};
    const RateProbe p = rate_condition_probe(e0, engine, 0.3, deltas, 1e-9);
    CHECK(p.report.passed);
    CHECK(p.rate_bound == doctest::Approx(2.0));
    for (double r : p.ratios) CHECK(r <= 2.0 + 1e-9);
    CHECK(p.ratios.back() > p.ratios.front());
}

TEST_CASE("grid limits") {
    const auto engine = two_state_engine();
    const auto e0 = InitialUpperExpectation::degenerate(engine.space(), 0);
    const GridLimit hit = grid_limit(
        e0, engine, [](int level) { return hitting_gamble(0.7, 1, level); }, 6, Monotonicity::increasing, 1e-2);
    CHECK(hit.monotone);
    for (double e : hit.estimates) CHECK(e <= -std::expm1(-0.7) + 1e-9);

    const GridLimit flat = grid_limit(
        e0, engine, [](int) { return FinitaryGamble(TimeGrid({0.5}), expr::constant(0.25)); }, 3,
        Monotonicity::increasing, 1e-9);
    CHECK(flat.converged);
    CHECK(flat.converged_level == 1);
    for (double e : flat.estimates) CHECK(e == doctest::Approx(0.25));

    // Members whose grids are not nested break pointwise monotonicity.
    CHECK_THROWS_AS(grid_limit(
                        e0, engine,
                        [](int level) {
                            return FinitaryGamble(TimeGrid({0.1 * level}), expr::indicator_eq(0, level % 2));
                        },
                        3, Monotonicity::increasing, 1e-3),
                    NotMonotone);
}

TEST_CASE("downward probe") {
    const TransitionEngine engine(poisson_generator(RateInterval(1.0, 2.0), StateSpace::truncated(60)));
    const auto e0 = InitialUpperExpectation::degenerate(engine.space(), 0);
    const TimeGrid grid({1.0});
    const DownwardProbe p = downward_probe(
        e0, engine, [&](int n) { return FinitaryGamble(grid, expr::indicator_at_least(0, static_cast<std::size_t>(n))); },
        12, FinitaryGamble(grid, expr::constant(0.0)), 1e-5);
    CHECK(p.report.passed);
    CHECK(p.estimates.front() == doctest::Approx(-std::expm1(-2.0)).epsilon(1e-8));
    CHECK_THROWS_AS(downward_probe(
                        e0, engine, [&](int n) { return FinitaryGamble(grid, expr::constant(n)); }, 3,
                        FinitaryGamble(grid, expr::constant(0.0)), 1e-5),
                    NotMonotone);
}

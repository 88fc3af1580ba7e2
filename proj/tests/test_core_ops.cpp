#include <doctest.h>

#include <cmath>
#include <random>

#include "subexp/errors.hpp"
#include "subexp/operator_checks.hpp"
#include "subexp/poisson.hpp"
#include "subexp/upper_rate_operator.hpp"

using namespace subexp;

namespace {

Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index r = 0;
    for (const auto& row : rows) {
        Eigen::Index c = 0;
        for (double v : row) m(r, c++) = v;
        ++r;
    }
    return m;
}

// Maximizes sum_y q(y) f(y) over {lower <= q <= upper, sum q = 0} by visiting
// every vertex: all coordinates but one at an endpoint, the last one solving
// the sum constraint.
double brute_force_row(const Eigen::MatrixXd& lower, const Eigen::MatrixXd& upper, const Gamble& f,
                       std::size_t x) {
    const std::size_t n = f.size();
    const auto X = static_cast<Eigen::Index>(x);
    double best = -INFINITY;
    for (std::size_t free = 0; free < n; ++free) {
        for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
            if (mask >> free & 1) continue;
            double sum = 0.0, value = 0.0;
            for (std::size_t y = 0; y < n; ++y) {
                if (y == free) continue;
                const auto Y = static_cast<Eigen::Index>(y);
                const double q = (mask >> y & 1) ? upper(X, Y) : lower(X, Y);
                sum += q;
                value += q * f[y];
            }
            const auto F = static_cast<Eigen::Index>(free);
            const double q = -sum;
            if (q < lower(X, F) - 1e-12 || q > upper(X, F) + 1e-12) continue;
            best = std::max(best, value + q * f[free]);
        }
    }
    return best;
}

} // namespace

TEST_CASE("state spaces and gambles") {
    const auto s = StateSpace::finite({"off", "on"});
    CHECK(s.size() == 2);
    CHECK(s.codes() == 2);
    CHECK(s.index_of("on") == 1);
    CHECK_FALSE(s.index_of("idle"));
    CHECK_THROWS_AS(StateSpace::truncated(1), InvalidArgument);

    const auto t = StateSpace::truncated(5);
    CHECK(t.codes() == 6);
    const auto c = Gamble::constant(t, 2.5);
    CHECK(c.tail() == 2.5);
    CHECK(Gamble::constant(s, 2.5).tail() == 0.0);
    CHECK(Gamble::complement_indicator(t, 1).tail() == 1.0);
    CHECK_THROWS_AS(Gamble({1.0, NAN}), InvalidArgument);

    const Gamble f({1.0, -3.0}, 4.0);
    CHECK(gamble_norm(f) == 4.0);
    CHECK(f.max() == 1.0);
    CHECK(f.at(7) == 4.0);
}

TEST_CASE("rate matrices are validated") {
    CHECK_NOTHROW(RateMatrix(mat({{-1, 1}, {2, -2}})));
    CHECK_THROWS_AS(RateMatrix(mat({{-1, 1}, {-2, 2}})), InvalidArgument);
    CHECK_THROWS_AS(RateMatrix(mat({{-1, 2}, {2, -2}})), InvalidArgument);
    CHECK_THROWS(RateMatrix(mat({{-1, 1, 0}, {2, -2, 0}})));
    CHECK(two_state_matrix(1, 2) == RateMatrix(mat({{-1, 1}, {2, -2}})));
}

TEST_CASE("envelope of two extremes") {
    const auto q = upper_envelope({RateMatrix(mat({{-1, 1}, {2, -2}})), RateMatrix(mat({{-3, 3}, {1, -1}}))});
    const Gamble f({0.0, 1.0});
    const Gamble r = q.apply(f);
    CHECK(r[0] == doctest::Approx(3.0));
    CHECK(r[1] == doctest::Approx(-1.0));
    CHECK(q.rate_bound() == doctest::Approx(3.0));
    CHECK_FALSE(q.is_linear());
    CHECK(upper_envelope({two_state_matrix(1, 2)}).is_linear());
}

TEST_CASE("row intervals: two-state example and brute-force vertex enumeration") {
    const UpperRateOperator q(StateSpace::finite(2),
                              RowIntervals{mat({{-3, 1}, {2, -2}}), mat({{-1, 3}, {2, -2}})});
    CHECK(q.apply(Gamble({0.0, 1.0}))[0] == doctest::Approx(3.0));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 2 + trial % 5;
        Eigen::MatrixXd lo = Eigen::MatrixXd::Zero(n, n), up = Eigen::MatrixXd::Zero(n, n);
        for (std::size_t x = 0; x < n; ++x) {
            double off_lo = 0.0, off_up = 0.0;
            for (std::size_t y = 0; y < n; ++y) {
                if (x == y) continue;
                lo(x, y) = u(rng);
                up(x, y) = lo(x, y) + 2.0 * u(rng);
                off_lo += lo(x, y);
                off_up += up(x, y);
            }
            lo(x, x) = -off_up - u(rng);
            up(x, x) = -off_lo + u(rng);
        }
        const UpperRateOperator op(StateSpace::finite(n), RowIntervals{lo, up});
        for (int k = 0; k < 5; ++k) {
            const Gamble f = random_gamble(op.space(), rng, 3.0);
            for (std::size_t x = 0; x < n; ++x)
                CHECK(op.row_value(f, x) == doctest::Approx(brute_force_row(lo, up, f, x)).epsilon(1e-12));
        }
    }
}

TEST_CASE("infeasible row intervals are rejected") {
    CHECK_THROWS_AS(UpperRateOperator(StateSpace::finite(2), RowIntervals{mat({{-1, 2}, {1, -1}}), mat({{-1, 3}, {1, -1}})}),
                    InfeasibleIntervals);
    CHECK_THROWS_AS(UpperRateOperator(StateSpace::finite(2), RowIntervals{mat({{-3, 0}, {1, -1}}), mat({{-2, 1}, {1, -1}})}),
                    InfeasibleIntervals);
}

TEST_CASE("poisson interval generator") {
    const auto space = StateSpace::truncated(10);
    const auto q = poisson_generator(RateInterval(1.0, 2.0), space);
    std::vector<double> v(10);
    for (std::size_t z = 0; z < 10; ++z) v[z] = (z % 3 == 0) ? 1.0 : -0.5 * z;
    const Gamble f(v, 2.0);
    const Gamble r = q.apply(f);
    for (std::size_t z = 0; z < 10; ++z) {
        const double d = f.at(z + 1) - f.at(z);
        CHECK(r[z] == doctest::Approx(d >= 0 ? 2.0 * d : 1.0 * d));
    }
    CHECK(q.rate_bound() == 2.0);
    CHECK(q.bandwidth() == 1);
    CHECK_THROWS_AS(RateInterval(2.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(poisson_generator(RateInterval(1.0, 2.0), StateSpace::finite(3)), InvalidArgument);
}

TEST_CASE("axiom check passes on valid operators and catches a maximum-principle breach") {
    std::mt19937_64 rng(5);
    const auto env = upper_envelope({random_rate_matrix(5, rng, 3.0), random_rate_matrix(5, rng, 3.0)});
    CHECK(check_upper_rate_axioms(env, 200, 1).passed);
    CHECK(check_upper_rate_axioms(poisson_generator(RateInterval(0.5, 1.5), StateSpace::truncated(30)), 200, 2).passed);

    const auto broken = UpperRateOperator::unchecked(
        StateSpace::finite(2), Extremes{{RateMatrix::unchecked(mat({{1, -1}, {2, -2}}))}});
    const AxiomReport r = check_upper_rate_axioms(broken, 50, 3);
    CHECK_FALSE(r.passed);
    CHECK(r.worst_pmp > 0.0);
}

TEST_CASE("operator norm bracket") {
    const auto linear = upper_envelope({two_state_matrix(1.0, 2.0)});
    const NormBounds b = operator_norm_estimate(linear, 1024, 1);
    CHECK(b.lower == doctest::Approx(4.0));
    CHECK(b.upper == doctest::Approx(4.0));

    std::mt19937_64 rng(9);
    const auto env = upper_envelope({random_rate_matrix(4, rng, 2.0), random_rate_matrix(4, rng, 2.0)});
    const NormBounds e = operator_norm_estimate(env, 1024, 1);
    CHECK(e.lower <= e.upper + 1e-12);
    CHECK(e.lower > 0.0);
}

TEST_CASE("lower operator by conjugacy") {
    const auto q = upper_envelope({two_state_matrix(1, 2), two_state_matrix(3, 1)});
    const Gamble f({0.0, 1.0});
    const Gamble lower = lower_via_conjugacy([&](const Gamble& g) { return q.apply(g); }, f);
    CHECK(lower[0] == doctest::Approx(1.0));
    CHECK(lower[1] == doctest::Approx(-2.0));
}

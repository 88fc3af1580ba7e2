#include "subexp/operator_checks.hpp"

#include <algorithm>
#include <cmath>

#include "subexp/errors.hpp"

namespace subexp {

namespace {

constexpr double constant_tol = 1e-12;
constexpr double subadditivity_tol = 1e-9;
constexpr double homogeneity_tol = 1e-12;
constexpr double pmp_tol = 1e-12;

// [Q h](x) over every x where h attains a nonnegative supremum.
double pmp_excess(const UpperRateOperator& op, const Gamble& h) {
    const double sup = h.max();
    if (sup < 0.0) return 0.0;
    const Gamble qh = op.apply(h);
    double worst = 0.0;
    for (std::size_t x = 0; x < h.size(); ++x)
        if (h[x] == sup) worst = std::max(worst, qh[x]);
    return worst;
}

double pmp_scale(const Gamble& h) { return pmp_tol * (1.0 + gamble_norm(h)); }

} // namespace

Gamble random_gamble(const StateSpace& space, std::mt19937_64& rng, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    std::vector<double> v(space.size());
    for (double& x : v) x = u(rng);
    const double tail = space.is_truncated() ? u(rng) : 0.0;
    return Gamble(std::move(v), tail);
}

RateMatrix random_rate_matrix(std::size_t n, std::mt19937_64& rng, double max_rate) {
    std::uniform_real_distribution<double> u(0.0, max_rate);
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index x = 0; x < q.rows(); ++x) {
        double out = 0.0;
        for (Eigen::Index y = 0; y < q.cols(); ++y) {
            if (x == y) continue;
            q(x, y) = u(rng);
            out += q(x, y);
        }
        q(x, x) = -out;
    }
    return RateMatrix(std::move(q));
}

AxiomReport check_upper_rate_axioms(const UpperRateOperator& op, std::size_t sample_count,
                                    std::uint64_t seed) {
    if (sample_count < 1) throw InvalidArgument("sample_count must be at least 1");
    const StateSpace& space = op.space();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    AxiomReport report;

    for (double c : {-2.5, 0.0, 1.0, 3.75, 1e3}) {
        const double v = gamble_norm(op.apply(Gamble::constant(space, c)));
        report.worst_constant = std::max(report.worst_constant, v);
        if (v > constant_tol * std::max(1.0, std::abs(c))) report.passed = false;
    }

    // Indicator-type probes: -1_y attains its supremum 0 everywhere but y,
    // 1_y attains it at y.
    for (std::size_t y = 0; y < space.size(); ++y) {
        for (double sign : {-1.0, 1.0}) {
            const Gamble h = sign * Gamble::indicator(space, y);
            const double excess = pmp_excess(op, h);
            report.worst_pmp = std::max(report.worst_pmp, excess);
            if (excess > pmp_scale(h)) report.passed = false;
        }
    }

    for (std::size_t i = 0; i < sample_count; ++i) {
        ++report.samples;
        Gamble f = random_gamble(space, rng);
        Gamble g = random_gamble(space, rng);
        if (i % 4 == 3) {
            // Coarse values produce ties at the maximum.
            std::vector<double> v(f.values().begin(), f.values().end());
            for (double& x : v) x = std::round(2.0 * x);
            f = Gamble(std::move(v), space.is_truncated() ? std::round(2.0 * f.tail()) : 0.0);
        }

        const double c = 4.0 * unit(rng) - 2.0;
        const double vc = gamble_norm(op.apply(Gamble::constant(space, c)));
        report.worst_constant = std::max(report.worst_constant, vc);
        if (vc > constant_tol * std::max(1.0, std::abs(c))) report.passed = false;

        const Gamble qf = op.apply(f);
        const Gamble qg = op.apply(g);
        const Gamble qfg = op.apply(f + g);
        const double sub_tol = subadditivity_tol * (gamble_norm(f) + gamble_norm(g));
        for (std::size_t x = 0; x < space.size(); ++x) {
            const double excess = qfg[x] - qf[x] - qg[x];
            report.worst_subadditivity = std::max(report.worst_subadditivity, excess);
            if (excess > sub_tol) report.passed = false;
        }

        const double mu = 5.0 * unit(rng);
        const Gamble qmu = op.apply(mu * f);
        const double hom_tol = homogeneity_tol * (1.0 + mu) * (1.0 + gamble_norm(qf));
        for (std::size_t x = 0; x < space.size(); ++x) {
            const double dev = std::abs(qmu[x] - mu * qf[x]);
            report.worst_homogeneity = std::max(report.worst_homogeneity, dev);
            if (dev > hom_tol) report.passed = false;
        }

        // Shift so the retained maximum is nonnegative and dominates the tail.
        std::vector<double> hv(f.values().begin(), f.values().end());
        const double top = *std::max_element(hv.begin(), hv.end());
        const double shift = unit(rng) - top;
        for (double& x : hv) x += shift;
        const double tail = space.is_truncated() ? std::min(f.tail() + shift, top + shift) : 0.0;
        const Gamble h(std::move(hv), tail);
        const double excess = pmp_excess(op, h);
        report.worst_pmp = std::max(report.worst_pmp, excess);
        if (excess > pmp_scale(h)) report.passed = false;
    }
    return report;
}

NormBounds operator_norm_estimate(const UpperRateOperator& op, std::size_t budget,
                                  std::uint64_t seed) {
    if (budget < 1) throw InvalidArgument("budget must be at least 1");
    const StateSpace& space = op.space();
    const std::size_t n = space.size();
    const std::size_t m = n + (space.is_truncated() ? 1 : 0);

    NormBounds bounds;
    if (const auto* e = std::get_if<Extremes>(&op.spec())) {
        for (const auto& q : e->matrices)
            for (std::size_t x = 0; x < q.size(); ++x) {
                double off = 0.0;
                for (std::size_t y = 0; y < q.size(); ++y)
                    if (y != x) off += std::abs(q(x, y));
                bounds.upper = std::max(bounds.upper, 2.0 * off);
            }
    } else {
        bounds.upper = 2.0 * op.rate_bound();
    }

    auto probe = [&](const std::vector<double>& signs) {
        std::vector<double> v(signs.begin(), signs.begin() + static_cast<std::ptrdiff_t>(n));
        const Gamble f(std::move(v), space.is_truncated() ? signs[n] : 0.0);
        bounds.lower = std::max(bounds.lower, gamble_norm(op.apply(f)));
    };

    std::vector<double> signs(m);
    if (m < 63 && (std::uint64_t{1} << m) <= budget) {
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
            for (std::size_t k = 0; k < m; ++k) signs[k] = (mask >> k) & 1 ? 1.0 : -1.0;
            probe(signs);
        }
    } else {
        for (int parity = 0; parity < 2; ++parity) {
            for (std::size_t k = 0; k < m; ++k) signs[k] = (k + parity) % 2 ? 1.0 : -1.0;
            probe(signs);
        }
        std::mt19937_64 rng(seed);
        std::bernoulli_distribution coin(0.5);
        for (std::size_t b = 2; b < budget; ++b) {
            for (double& s : signs) s = coin(rng) ? 1.0 : -1.0;
            probe(signs);
        }
    }
    bounds.lower = std::min(bounds.lower, bounds.upper);
    return bounds;
}

Gamble lower_via_conjugacy(const std::function<Gamble(const Gamble&)>& apply_upper,
                           const Gamble& f) {
    return -apply_upper(-f);
}

} // namespace subexp

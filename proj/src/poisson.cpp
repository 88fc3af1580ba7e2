#include "subexp/poisson.hpp"

#include <cmath>
#include <string>

#include "subexp/errors.hpp"
#include "subexp/semigroup.hpp"

namespace subexp {

RateInterval::RateInterval(double lower, double upper) : lower_(lower), upper_(upper) {
    if (!std::isfinite(lower) || !std::isfinite(upper))
        throw InvalidArgument("rate interval bounds must be finite");
    if (lower < 0.0) throw InvalidArgument("lambda_lower must be nonnegative");
    if (lower > upper) throw InvalidArgument("lambda_lower exceeds lambda_upper");
}

UpperRateOperator poisson_generator(RateInterval rates, const StateSpace& space) {
    if (!space.is_truncated())
        throw InvalidArgument("Poisson generator needs a nonneg-integer state space");
    return UpperRateOperator(space, PoissonInterval{rates});
}

PoissonPmf poisson_pmf(double parameter, std::size_t K) {
    if (!(parameter >= 0.0)) throw InvalidArgument("Poisson parameter must be nonnegative");
    if (parameter > 700.0) throw InvalidArgument("Poisson parameter too large for linear-space recurrence");
    PoissonPmf pmf;
    pmf.parameter = parameter;
    pmf.masses.resize(K + 1);
    double mass = std::exp(-parameter);
    double total = 0.0;
    for (std::size_t k = 0; k <= K; ++k) {
        if (k > 0) mass *= parameter / static_cast<double>(k);
        pmf.masses[k] = mass;
        total += mass;
    }
    pmf.tail_bound = std::max({0.0, 1.0 - total, poisson_tail_bound(parameter, K + 1)});
    pmf.tail_bound = std::min(pmf.tail_bound, 1.0);
    return pmf;
}

bool is_monotone(const Gamble& f, Monotonicity direction) {
    const auto v = f.values();
    for (std::size_t z = 0; z < f.size(); ++z) {
        const double next = f.at(z + 1);
        if (direction == Monotonicity::increasing ? next < v[z] : next > v[z]) return false;
    }
    return true;
}

double monotone_closed_form(RateInterval rates, double t, std::size_t z, const Gamble& f,
                            Monotonicity direction, double tol) {
    if (!(t >= 0.0)) throw InvalidArgument("time must be nonnegative");
    if (!is_monotone(f, direction))
        throw NotMonotone(std::string("gamble is not ") +
                          (direction == Monotonicity::increasing ? "increasing" : "decreasing"));
    if (z >= f.size()) return f.tail();

    const double lambda = direction == Monotonicity::increasing ? rates.upper() : rates.lower();
    const double p = lambda * t;
    if (p > 700.0) throw InvalidArgument("Poisson parameter too large for linear-space recurrence");
    double oscillation = 0.0;
    for (std::size_t y = z; y < f.size(); ++y) oscillation = std::max(oscillation, std::abs(f[y] - f.tail()));

    // f is constant (= tail) from f.size() on, so the sum over k runs to the
    // last retained state unless the remaining Poisson mass is negligible.
    double mass = std::exp(-p);
    double sum = 0.0;
    for (std::size_t k = 0; z + k < f.size(); ++k) {
        if (k > 0) mass *= p / static_cast<double>(k);
        sum += (f[z + k] - f.tail()) * mass;
        if (static_cast<double>(k) > p && poisson_tail_bound(p, k + 1) * oscillation <= tol) break;
    }
    return sum + f.tail();
}

std::size_t default_truncation(std::size_t z_max, double lambda_upper, double t_max) {
    return z_max + static_cast<std::size_t>(std::ceil(20.0 * (1.0 + lambda_upper * t_max)));
}

CheckReport check_poisson_semigroup(RateInterval rates, double t, double tol) {
    if (!(t > 0.0)) throw InvalidArgument("t must be positive");
    const std::size_t n = default_truncation(5, rates.upper(), t);
    const StateSpace space = StateSpace::truncated(n);
    const TransitionEngine engine(poisson_generator(rates, space));
    CheckReport report{"poisson-semigroup", tol};

    auto make = [&](auto fn) {
        std::vector<double> v(n);
        for (std::size_t z = 0; z < n; ++z) v[z] = fn(static_cast<double>(z));
        return Gamble(std::move(v), fn(static_cast<double>(n)));
    };
    const std::vector<Gamble> increasing = {
        make([](double z) { return z; }),
        make([](double z) { return z >= 1.0 ? 1.0 : 0.0; }),
        make([](double z) { return z >= 3.0 ? 1.0 : 0.0; }),
        make([](double z) { return std::sqrt(z); }),
        make([](double z) { return 1.0 - std::pow(2.0, -z); }),
    };
    const std::vector<std::size_t> states = {0, 1, 3, 5};
    for (const auto& f : increasing) {
        for (const Gamble& g : {f, -f}) {
            const auto dir = is_monotone(g, Monotonicity::increasing) ? Monotonicity::increasing
                                                                      : Monotonicity::decreasing;
            const auto evolved = engine.apply(t, g);
            for (std::size_t z : states)
                report.record(std::abs(evolved.value[z] - monotone_closed_form(rates, t, z, g, dir)));
        }
    }

    const double expected = -std::expm1(-rates.upper() * t);
    for (std::size_t z : states) {
        const auto evolved = engine.apply(t, Gamble::complement_indicator(space, z));
        const double value = evolved.value[z];
        report.record(std::abs(value - expected));
        report.record(std::max(0.0, value / t - rates.upper()));
    }
    return report;
}

} // namespace subexp

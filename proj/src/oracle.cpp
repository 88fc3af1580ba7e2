#include "subexp/oracle.hpp"

#include <cmath>
#include <random>

#include "subexp/errors.hpp"

namespace subexp::oracle {

VectorResult precise_exponential(const RateMatrix& q, double t, const Gamble& f) {
    const std::size_t n = q.size();
    if (f.size() != n) throw DimensionMismatch("gamble length does not match the rate matrix");
    if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("time must be finite and nonnegative");
    if (t == 0.0) return {f, 0.0, "identity"};

    const Eigen::MatrixXd a = t * q.matrix();
    const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
    int s = 0;
    while (std::ldexp(norm, -s) > 0.5) ++s;
    const double b = std::ldexp(norm, -s);
    const double squarings = std::ldexp(1.0, s);
    const double fnorm = std::max(1.0, gamble_norm(f));

    // Smallest K whose propagated remainder is negligible.
    int order = 1;
    double remainder = 0.0;
    for (;; ++order) {
        double term = std::exp(b);
        for (int k = 1; k <= order + 1; ++k) term *= b / k;
        remainder = squarings * term * std::pow(1.0 + term, squarings - 1.0) * fnorm;
        if (remainder < 1e-15 * fnorm || order >= 40) break;
    }

    const Eigen::MatrixXd bm = std::ldexp(1.0, -s) * a;
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (int k = order; k >= 1; --k)
        p = Eigen::MatrixXd::Identity(p.rows(), p.cols()) + (bm * p) / static_cast<double>(k);
    for (int k = 0; k < s; ++k) p = p * p;

    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (std::size_t x = 0; x < n; ++x) v[static_cast<Eigen::Index>(x)] = f[x];
    const Eigen::VectorXd out = p * v;
    const double rounding = 1e-16 * (order + s + static_cast<double>(n)) * fnorm * 4.0;
    return {Gamble(std::vector<double>(out.data(), out.data() + out.size()), f.tail()), remainder + rounding,
            "taylor-scaling-squaring"};
}

TwoStateTransition two_state_closed_form(double a, double b, double t) {
    if (!(a >= 0.0) || !(b >= 0.0) || !(t >= 0.0)) throw InvalidArgument("rates and time must be nonnegative");
    TwoStateTransition out;
    const double r = a + b;
    if (r == 0.0) {
        out.p = {{{1.0, 0.0}, {0.0, 1.0}}};
        out.note = "zero rates: identity";
        return out;
    }
    const double e = -std::expm1(-r * t);
    out.p[0][1] = a / r * e;
    out.p[0][0] = 1.0 - out.p[0][1];
    out.p[1][0] = b / r * e;
    out.p[1][1] = 1.0 - out.p[1][0];
    return out;
}

double poisson_jump_prob(double lambda, double delta) {
    if (!(lambda >= 0.0) || !(delta >= 0.0)) throw InvalidArgument("rate and interval must be nonnegative");
    return -std::expm1(-lambda * delta);
}

namespace {

struct InitialOption {
    std::vector<double> pmf;  // empty: start in `state`
    std::size_t state = 0;
};

std::vector<InitialOption> initial_options(const InitialUpperExpectation& initial) {
    std::vector<InitialOption> out;
    const auto& spec = initial.spec();
    if (const auto* e = std::get_if<InitialUpperExpectation::Envelope>(&spec)) {
        for (const auto& p : e->pmfs) out.push_back({p, 0});
    } else if (const auto* d = std::get_if<InitialUpperExpectation::Degenerate>(&spec)) {
        out.push_back({{}, d->state});
    } else {
        for (auto x : std::get<InitialUpperExpectation::Vacuous>(spec).states) out.push_back({{}, x});
    }
    return out;
}

} // namespace

OracleResult policy_mc_lower(const std::vector<RateMatrix>& extremes,
                             const InitialUpperExpectation& initial, const FinitaryGamble& f,
                             std::size_t n_policies, std::size_t n_paths, std::uint64_t seed) {
    if (extremes.empty()) throw InvalidArgument("need at least one extreme matrix");
    if (n_policies == 0 || n_paths == 0) throw InvalidArgument("need at least one policy and one path");
    const std::size_t n = extremes.front().size();
    for (const auto& q : extremes)
        if (q.size() != n) throw DimensionMismatch("extreme matrices differ in size");

    const FinitaryGamble g = f.grid()[0] == 0.0 ? f : f.lift(TimeGrid::merge(TimeGrid({0.0}), f.grid()));
    const auto times = g.grid().points();
    const std::size_t intervals = times.size() - 1;
    const std::size_t slots = intervals * n;
    const std::size_t m = extremes.size();

    // Enumerate the selection space when it is small enough.
    bool enumerate = true;
    std::size_t space_size = 1;
    for (std::size_t k = 0; k < slots && enumerate; ++k) {
        if (space_size > n_policies / m) enumerate = false;
        else space_size *= m;
    }
    const std::size_t policies = enumerate ? space_size : n_policies;

    const auto options = initial_options(initial);
    std::mt19937_64 policy_rng(seed);
    std::uniform_int_distribution<std::size_t> pick_extreme(0, m - 1);

    OracleResult best{-std::numeric_limits<double>::infinity(), 0.0,
                      enumerate ? "policy-mc (enumerated selections)" : "policy-mc (sampled selections)"};
    std::vector<std::size_t> policy(slots);
    std::vector<std::size_t> path(times.size());
    for (std::size_t p = 0; p < policies; ++p) {
        if (enumerate) {
            std::size_t code = p;
            for (auto& c : policy) {
                c = code % m;
                code /= m;
            }
        } else {
            for (auto& c : policy) c = pick_extreme(policy_rng);
        }
        for (std::size_t o = 0; o < options.size(); ++o) {
            std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL * (p * options.size() + o + 1)));
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            std::discrete_distribution<std::size_t> start(options[o].pmf.begin(), options[o].pmf.end());
            double sum = 0.0;
            double sum_sq = 0.0;
            for (std::size_t r = 0; r < n_paths; ++r) {
                std::size_t x = options[o].pmf.empty() ? options[o].state : start(rng);
                path[0] = x;
                for (std::size_t k = 0; k < intervals; ++k) {
                    double remaining = times[k + 1] - times[k];
                    for (;;) {
                        const auto& q = extremes[policy[k * n + x]];
                        const double rate = -q(x, x);
                        if (!(rate > 0.0)) break;
                        const double hold = std::exponential_distribution<double>(rate)(rng);
                        if (hold >= remaining) break;
                        remaining -= hold;
                        double u = unit(rng) * rate;
                        std::size_t next = x;
                        for (std::size_t y = 0; y < n; ++y) {
                            if (y == x) continue;
                            next = y;
                            u -= q(x, y);
                            if (u < 0.0) break;
                        }
                        x = next;
                    }
                    path[k + 1] = x;
                }
                const double v = g(path);
                sum += v;
                sum_sq += v * v;
            }
            const double count = static_cast<double>(n_paths);
            const double mean = sum / count;
            const double var = n_paths > 1 ? std::max(0.0, (sum_sq - count * mean * mean) / (count - 1.0)) : 0.0;
            if (mean > best.value) {
                best.value = mean;
                best.error_bound = std::sqrt(var / count);
            }
        }
    }
    return best;
}

} // namespace subexp::oracle

#include "subexp/fidi.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <numeric>

#include "subexp/errors.hpp"

namespace subexp {

TimeGrid::TimeGrid(std::vector<double> points) : points_(std::move(points)) {
    if (points_.empty()) throw InvalidArgument("time grid must be nonempty");
    for (std::size_t k = 0; k < points_.size(); ++k) {
        if (!std::isfinite(points_[k]) || points_[k] < 0.0)
            throw InvalidArgument("time points must be finite and nonnegative");
        if (k > 0 && !(points_[k] > points_[k - 1]))
            throw InvalidArgument("time grid must be strictly increasing");
    }
}

std::optional<std::size_t> TimeGrid::index_of(double t) const {
    auto it = std::lower_bound(points_.begin(), points_.end(), t);
    if (it == points_.end() || *it != t) return std::nullopt;
    return static_cast<std::size_t>(it - points_.begin());
}

bool TimeGrid::is_subset_of(const TimeGrid& other) const {
    return std::all_of(points_.begin(), points_.end(),
                       [&](double t) { return other.index_of(t).has_value(); });
}

TimeGrid TimeGrid::without_last() const {
    if (points_.size() < 2) throw GridMismatch("cannot drop the only time point");
    return TimeGrid(std::vector<double>(points_.begin(), points_.end() - 1));
}

TimeGrid TimeGrid::merge(const TimeGrid& a, const TimeGrid& b) {
    std::vector<double> out;
    std::set_union(a.points_.begin(), a.points_.end(), b.points_.begin(), b.points_.end(),
                   std::back_inserter(out));
    return TimeGrid(std::move(out));
}

TimeGrid TimeGrid::dyadic(double horizon, int level) {
    if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive");
    if (level < 0 || level > 24) throw InvalidArgument("dyadic level out of range");
    const std::size_t count = (std::size_t{1} << level) + 1;
    std::vector<double> points(count);
    for (std::size_t k = 0; k < count; ++k)
        points[k] = std::ldexp(static_cast<double>(k), -level) * horizon;
    return TimeGrid(std::move(points));
}

FinitaryGamble::FinitaryGamble(TimeGrid grid, ExprPtr e) : grid_(std::move(grid)), expr_(std::move(e)) {
    if (!expr_) throw InvalidArgument("finitary gamble needs an expression");
    if (max_coord(*expr_) >= static_cast<long>(grid_.size()))
        throw InvalidArgument("expression references a coordinate beyond the grid");
}

FinitaryGamble FinitaryGamble::dense(TimeGrid grid, const StateSpace& space, std::vector<double> data) {
    const std::size_t codes = space.codes();
    std::size_t total = 1;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (total > dense_cap / codes)
            throw InvalidArgument("dense table exceeds the 1e7 entry cap; use an expression");
        total *= codes;
    }
    if (data.size() != total) throw DimensionMismatch("dense table has the wrong number of entries");
    auto table = std::make_shared<Table>();
    table->extents.assign(grid.size(), codes);
    table->data = std::move(data);
    std::vector<std::size_t> coords(grid.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    return FinitaryGamble(std::move(grid), expr::table(std::move(table), std::move(coords)));
}

FinitaryGamble FinitaryGamble::lift(const TimeGrid& finer) const {
    std::vector<std::size_t> mapping(grid_.size());
    for (std::size_t k = 0; k < grid_.size(); ++k) {
        auto idx = finer.index_of(grid_[k]);
        if (!idx) throw GridMismatch("coarse grid is not contained in the finer grid");
        mapping[k] = *idx;
    }
    return FinitaryGamble(finer, remap_coords(expr_, mapping));
}

FinitaryGamble FinitaryGamble::negated() const { return FinitaryGamble(grid_, expr::scale(-1.0, expr_)); }

FinitaryGamble jump_gamble(double t1, double t2) {
    if (t1 == t2) throw InvalidArgument("jump gamble needs two distinct times");
    return FinitaryGamble(TimeGrid({std::min(t1, t2), std::max(t1, t2)}), expr::indicator_differ(0, 1));
}

FinitaryGamble hitting_gamble(double horizon, std::size_t target, int level) {
    TimeGrid grid = TimeGrid::dyadic(horizon, level);
    std::vector<ExprPtr> hits;
    hits.reserve(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) hits.push_back(expr::indicator_eq(k, target));
    return FinitaryGamble(std::move(grid), expr::max(std::move(hits)));
}

InitialUpperExpectation::InitialUpperExpectation(const StateSpace& space, Spec spec)
    : spec_(std::move(spec)), size_(space.size()) {
    if (const auto* e = std::get_if<Envelope>(&spec_)) {
        if (e->pmfs.empty()) throw InvalidArgument("initial envelope needs at least one pmf");
        for (const auto& p : e->pmfs) {
            if (p.size() != size_) throw DimensionMismatch("initial pmf length does not match state space");
            double total = 0.0;
            for (double v : p) {
                if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("pmf entries must be nonnegative");
                total += v;
            }
            if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("pmf must sum to 1");
        }
    } else if (const auto* d = std::get_if<Degenerate>(&spec_)) {
        if (d->state >= size_) throw InvalidArgument("degenerate initial state out of range");
    } else {
        const auto& v = std::get<Vacuous>(spec_);
        if (v.states.empty()) throw InvalidArgument("vacuous initial set must be nonempty");
        for (auto x : v.states)
            if (x >= size_) throw InvalidArgument("vacuous initial state out of range");
    }
}

InitialUpperExpectation InitialUpperExpectation::degenerate(const StateSpace& space, std::size_t x) {
    return InitialUpperExpectation(space, Degenerate{x});
}

double InitialUpperExpectation::operator()(std::span<const double> g) const {
    if (g.size() < size_) throw DimensionMismatch("initial expectation operand too short");
    if (const auto* e = std::get_if<Envelope>(&spec_)) {
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& p : e->pmfs) {
            double s = 0.0;
            for (std::size_t x = 0; x < size_; ++x) s += p[x] * g[x];
            best = std::max(best, s);
        }
        return best;
    }
    if (const auto* d = std::get_if<Degenerate>(&spec_)) return g[d->state];
    double best = -std::numeric_limits<double>::infinity();
    for (auto x : std::get<Vacuous>(spec_).states) best = std::max(best, g[x]);
    return best;
}

FinitaryGamble backward_reduce(const TransitionEngine& engine, const FinitaryGamble& f) {
    const TimeGrid& grid = f.grid();
    const std::size_t m = grid.size();
    if (m < 2) throw GridMismatch("backward reduction needs at least two time points");
    const StateSpace& space = engine.space();
    const std::size_t codes = space.codes();
    const std::size_t retained = space.size();

    std::size_t prefixes = 1;
    for (std::size_t k = 0; k + 1 < m; ++k) {
        if (prefixes > FinitaryGamble::dense_cap / codes)
            throw InvalidArgument("reduced table exceeds the 1e7 entry cap");
        prefixes *= codes;
    }
    const double delta = grid[m - 1] - grid[m - 2];

    // Pass 1: sections, deduplicated by content. Constant sections are their
    // own image under any upper transition operator.
    constexpr std::size_t constant_section = static_cast<std::size_t>(-1);
    std::map<std::vector<double>, std::size_t> index;
    std::vector<std::vector<double>> sections;
    std::vector<std::size_t> section_of(prefixes, constant_section);
    std::vector<double> data(prefixes);
    std::vector<std::size_t> tuple(m, 0);
    std::vector<double> section(codes);
    for (std::size_t p = 0; p < prefixes; ++p) {
        for (std::size_t y = 0; y < codes; ++y) {
            tuple[m - 1] = y;
            section[y] = f(tuple);
        }
        const bool constant = std::all_of(section.begin(), section.end(),
                                          [&](double v) { return v == section.front(); });
        if (constant) {
            data[p] = section.front();
        } else {
            auto [it, inserted] = index.emplace(section, sections.size());
            if (inserted) sections.push_back(section);
            section_of[p] = it->second;
        }
        for (std::size_t k = m - 1; k-- > 0;) {
            if (++tuple[k] < codes) break;
            tuple[k] = 0;
        }
    }

    // Pass 2: one engine call per distinct section.
    std::vector<std::vector<double>> evolved(sections.size());
    std::exception_ptr failure;
    const auto count = static_cast<std::ptrdiff_t>(sections.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t s = 0; s < count; ++s) {
        try {
            const auto& sec = sections[static_cast<std::size_t>(s)];
            const Gamble g(std::vector<double>(sec.begin(), sec.begin() + static_cast<std::ptrdiff_t>(retained)),
                           space.is_truncated() ? sec[retained] : 0.0);
            const auto result = engine.apply(delta, g);
            std::vector<double> out(result.value.values().begin(), result.value.values().end());
            if (space.is_truncated()) out.push_back(result.value.tail());
            evolved[static_cast<std::size_t>(s)] = std::move(out);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    // Pass 3: evaluate each evolved section at the prefix's last coordinate.
    for (std::size_t p = 0; p < prefixes; ++p) {
        if (section_of[p] == constant_section) continue;
        const std::size_t last = p % codes;
        data[p] = evolved[section_of[p]][last];
    }
    return FinitaryGamble::dense(grid.without_last(), space, std::move(data));
}

} // namespace subexp

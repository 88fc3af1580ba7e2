#include "subexp/gamble.hpp"

#include <algorithm>
#include <cmath>

#include "subexp/errors.hpp"

namespace subexp {

Gamble::Gamble(std::vector<double> values, double tail) : values_(std::move(values)), tail_(tail) {
    for (double v : values_)
        if (!std::isfinite(v)) throw InvalidArgument("gamble values must be finite");
    if (!std::isfinite(tail_)) throw InvalidArgument("gamble tail must be finite");
}

Gamble Gamble::constant(const StateSpace& space, double c) {
    return Gamble(std::vector<double>(space.size(), c), space.is_truncated() ? c : 0.0);
}

Gamble Gamble::indicator(const StateSpace& space, std::size_t x) {
    if (x >= space.size()) throw InvalidArgument("indicator state out of range");
    std::vector<double> v(space.size(), 0.0);
    v[x] = 1.0;
    return Gamble(std::move(v), 0.0);
}

Gamble Gamble::complement_indicator(const StateSpace& space, std::size_t x) {
    if (x >= space.size()) throw InvalidArgument("indicator state out of range");
    std::vector<double> v(space.size(), 1.0);
    v[x] = 0.0;
    return Gamble(std::move(v), space.is_truncated() ? 1.0 : 0.0);
}

double Gamble::max() const {
    double m = tail_;
    if (!values_.empty()) m = *std::max_element(values_.begin(), values_.end());
    return m;
}

double Gamble::min() const {
    double m = tail_;
    if (!values_.empty()) m = *std::min_element(values_.begin(), values_.end());
    return m;
}

Gamble& Gamble::operator+=(const Gamble& other) {
    if (other.size() != size()) throw DimensionMismatch("gamble sizes differ");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    tail_ += other.tail_;
    return *this;
}

Gamble& Gamble::operator-=(const Gamble& other) {
    if (other.size() != size()) throw DimensionMismatch("gamble sizes differ");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    tail_ -= other.tail_;
    return *this;
}

Gamble& Gamble::operator*=(double s) {
    for (double& v : values_) v *= s;
    tail_ *= s;
    return *this;
}

Gamble& Gamble::operator+=(double c) {
    for (double& v : values_) v += c;
    tail_ += c;
    return *this;
}

double gamble_norm(const Gamble& f) {
    double n = std::abs(f.tail());
    for (double v : f.values()) n = std::max(n, std::abs(v));
    return n;
}

double sup_distance(const Gamble& f, const Gamble& g, std::size_t count) {
    if (f.size() != g.size()) throw DimensionMismatch("gamble sizes differ");
    count = std::min(count, f.size());
    double d = 0.0;
    for (std::size_t i = 0; i < count; ++i) d = std::max(d, std::abs(f[i] - g[i]));
    if (count == f.size()) d = std::max(d, std::abs(f.tail() - g.tail()));
    return d;
}

bool lives_on(const Gamble& f, const StateSpace& space) { return f.size() == space.size(); }

} // namespace subexp

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "subexp/state_space.hpp"

namespace subexp {

/// A bounded real function on a (possibly truncated) state space: explicit
/// values on the retained states plus one tail value shared by every state
/// beyond the truncation level. On finite spaces the tail is kept at zero.
class Gamble {
public:
    Gamble() = default;
    explicit Gamble(std::vector<double> values, double tail = 0.0);

    static Gamble constant(const StateSpace& space, double c);
    static Gamble indicator(const StateSpace& space, std::size_t x);
    /// 1 - 1_x, the complement indicator used by the rate bound.
    static Gamble complement_indicator(const StateSpace& space, std::size_t x);

    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    double tail() const { return tail_; }

    double operator[](std::size_t x) const { return values_[x]; }
    /// Value at any state, including states beyond the retained ones.
    double at(std::size_t z) const { return z < values_.size() ? values_[z] : tail_; }

    /// Exchanges the value buffer with `other` (same length, finite entries
    /// assumed). Used by the Euler loops to avoid reallocation.
    void swap_values(std::vector<double>& other) { values_.swap(other); }

    /// Extremes over the retained states (the tail only when there are none).
    double max() const;
    double min() const;

    Gamble& operator+=(const Gamble& other);
    Gamble& operator-=(const Gamble& other);
    Gamble& operator*=(double s);
    Gamble& operator+=(double c);

    friend Gamble operator+(Gamble a, const Gamble& b) { return a += b; }
    friend Gamble operator-(Gamble a, const Gamble& b) { return a -= b; }
    friend Gamble operator*(double s, Gamble a) { return a *= s; }
    friend Gamble operator+(Gamble a, double c) { return a += c; }
    friend Gamble operator-(Gamble a) { return a *= -1.0; }

    friend bool operator==(const Gamble&, const Gamble&) = default;

private:
    std::vector<double> values_;
    double tail_ = 0.0;
};

/// Sup-norm, tail included.
double gamble_norm(const Gamble& f);

/// Sup-norm of f - g restricted to the first `count` states (the tail is
/// included only when count covers every retained state).
double sup_distance(const Gamble& f, const Gamble& g, std::size_t count);

/// Whether f has the right shape for `space` (length, zero tail on finite spaces).
bool lives_on(const Gamble& f, const StateSpace& space);

} // namespace subexp

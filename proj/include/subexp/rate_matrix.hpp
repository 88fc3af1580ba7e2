#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace subexp {

/// A linear rate operator on the retained states: nonnegative off-diagonal
/// entries and zero row sums.
class RateMatrix {
public:
    static constexpr double row_sum_tolerance = 1e-12;

    RateMatrix() = default;
    /// Validates the rate-matrix invariants; throws InvalidArgument.
    explicit RateMatrix(Eigen::MatrixXd entries);

    /// Skips validation. Only for constructing counterexamples in checks.
    static RateMatrix unchecked(Eigen::MatrixXd entries);

    std::size_t size() const { return static_cast<std::size_t>(entries_.rows()); }
    double operator()(std::size_t x, std::size_t y) const {
        return entries_(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
    }
    const Eigen::MatrixXd& matrix() const { return entries_; }

    /// max_x |Q(x,x)|
    double max_exit_rate() const;

    friend bool operator==(const RateMatrix& a, const RateMatrix& b) {
        return a.entries_ == b.entries_;
    }

private:
    struct NoCheck {};
    RateMatrix(Eigen::MatrixXd entries, NoCheck) : entries_(std::move(entries)) {}

    Eigen::MatrixXd entries_;
};

/// Birth-only matrix of a precise Poisson process with rate `lambda`,
/// truncated to `n` states; the last state is absorbing.
RateMatrix poisson_birth_matrix(double lambda, std::size_t n);

/// [[-a, a], [b, -b]]
RateMatrix two_state_matrix(double a, double b);

} // namespace subexp

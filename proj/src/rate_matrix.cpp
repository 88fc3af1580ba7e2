#include "subexp/rate_matrix.hpp"

#include <cmath>
#include <string>

#include "subexp/errors.hpp"

namespace subexp {

RateMatrix::RateMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols() || entries_.rows() == 0)
        throw InvalidArgument("rate matrix must be square and nonempty");
    const Eigen::Index n = entries_.rows();
    for (Eigen::Index x = 0; x < n; ++x) {
        double row_sum = 0.0;
        double scale = 1.0;
        for (Eigen::Index y = 0; y < n; ++y) {
            const double q = entries_(x, y);
            if (!std::isfinite(q)) throw InvalidArgument("rate matrix entries must be finite");
            if (x != y && q < 0.0)
                throw InvalidArgument("negative off-diagonal rate at (" + std::to_string(x) + "," +
                                      std::to_string(y) + ")");
            row_sum += q;
            scale = std::max(scale, std::abs(q));
        }
        if (std::abs(row_sum) > row_sum_tolerance * scale)
            throw InvalidArgument("row " + std::to_string(x) + " of rate matrix does not sum to 0");
    }
}

RateMatrix RateMatrix::unchecked(Eigen::MatrixXd entries) {
    return RateMatrix(std::move(entries), NoCheck{});
}

double RateMatrix::max_exit_rate() const {
    double m = 0.0;
    for (Eigen::Index x = 0; x < entries_.rows(); ++x) m = std::max(m, std::abs(entries_(x, x)));
    return m;
}

RateMatrix poisson_birth_matrix(double lambda, std::size_t n) {
    if (lambda < 0.0) throw InvalidArgument("Poisson rate must be nonnegative");
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t z = 0; z + 1 < n; ++z) {
        q(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(z)) = -lambda;
        q(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(z + 1)) = lambda;
    }
    return RateMatrix(std::move(q));
}

RateMatrix two_state_matrix(double a, double b) {
    Eigen::MatrixXd q(2, 2);
    q << -a, a, b, -b;
    return RateMatrix(std::move(q));
}

} // namespace subexp

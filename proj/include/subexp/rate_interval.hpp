#pragma once

namespace subexp {

/// Interval [lower, upper] of Poisson jump rates, 0 <= lower <= upper < inf.
class RateInterval {
public:
    RateInterval(double lower, double upper);

    double lower() const { return lower_; }
    double upper() const { return upper_; }

    friend bool operator==(const RateInterval&, const RateInterval&) = default;

private:
    double lower_;
    double upper_;
};

} // namespace subexp

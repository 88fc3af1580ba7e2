#pragma once

#include <algorithm>
#include <string>
#include <utility>

namespace subexp {

/// Outcome of a numeric check: the worst observed deviation against a
/// tolerance. Checks never throw on failure; they report.
struct CheckReport {
    CheckReport() = default;
    CheckReport(std::string name_, double tolerance_) : name(std::move(name_)), tolerance(tolerance_) {}

    std::string name;
    double tolerance = 0.0;
    double worst = 0.0;
    std::size_t cases = 0;
    bool passed = true;
    std::string detail;

    void record(double deviation) {
        ++cases;
        worst = std::max(worst, deviation);
        if (!(deviation <= tolerance)) passed = false;
    }
};

} // namespace subexp

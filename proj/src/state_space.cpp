#include "subexp/state_space.hpp"

#include <algorithm>
#include <set>

#include "subexp/errors.hpp"

namespace subexp {

StateSpace StateSpace::finite(std::vector<std::string> labels) {
    if (labels.empty()) throw InvalidArgument("finite state space needs at least one label");
    std::set<std::string> seen(labels.begin(), labels.end());
    if (seen.size() != labels.size()) throw InvalidArgument("state labels must be distinct");
    const auto n = labels.size();
    return StateSpace(Kind::finite, n, std::move(labels));
}

StateSpace StateSpace::finite(std::size_t n) {
    std::vector<std::string> labels;
    labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
    return finite(std::move(labels));
}

StateSpace StateSpace::truncated(std::size_t retained) {
    if (retained < 2) throw InvalidArgument("truncation level must be at least 2");
    return StateSpace(Kind::nonneg_integers, retained, {});
}

std::optional<std::size_t> StateSpace::index_of(std::string_view label) const {
    if (is_truncated()) {
        std::size_t value = 0;
        if (label.empty()) return std::nullopt;
        for (char c : label) {
            if (c < '0' || c > '9') return std::nullopt;
            value = value * 10 + static_cast<std::size_t>(c - '0');
        }
        if (value >= size_) return std::nullopt;
        return value;
    }
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - labels_.begin());
}

} // namespace subexp

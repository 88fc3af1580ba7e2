#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace subexp {

/// Either a finite set of labelled states or the nonnegative integers,
/// retained up to a truncation level N (states 0..N-1). Every state >= N
/// of a truncated space is represented by a single tail value.
class StateSpace {
public:
    enum class Kind { finite, nonneg_integers };

    static StateSpace finite(std::vector<std::string> labels);
    /// Labels "0".."n-1".
    static StateSpace finite(std::size_t n);
    static StateSpace truncated(std::size_t retained);

    Kind kind() const { return kind_; }
    bool is_truncated() const { return kind_ == Kind::nonneg_integers; }

    /// Number of retained states.
    std::size_t size() const { return size_; }

    /// Number of coordinate codes in a path tuple: the retained states plus,
    /// for truncated spaces, one code (== size()) standing for "beyond".
    std::size_t codes() const { return size_ + (is_truncated() ? 1 : 0); }

    const std::vector<std::string>& labels() const { return labels_; }
    std::optional<std::size_t> index_of(std::string_view label) const;

    friend bool operator==(const StateSpace&, const StateSpace&) = default;

private:
    StateSpace(Kind kind, std::size_t size, std::vector<std::string> labels)
        : kind_(kind), size_(size), labels_(std::move(labels)) {}

    Kind kind_ = Kind::finite;
    std::size_t size_ = 0;
    std::vector<std::string> labels_;
};

} // namespace subexp

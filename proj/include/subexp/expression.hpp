#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace subexp {

/// Dense values indexed by a tuple of coordinate codes (row-major).
struct Table {
    std::vector<std::size_t> extents;
    std::vector<double> data;
};

/// Immutable expression tree over the coordinates of a path tuple.
/// Coordinates are indices into a time grid; a coordinate's value is its
/// state code (for truncated spaces, code N stands for every state >= N).
struct Expr {
    enum class Op {
        constant,   ///< value
        coord,      ///< state code of coordinate i
        eq_state,   ///< 1 if coordinate i == s
        eq_coord,   ///< 1 if coordinates i and j agree
        neq_coord,  ///< 1 if coordinates i and j differ
        sum,        ///< sum of args
        scale,      ///< value * args[0]
        min,
        max,
        table,      ///< table lookup at (coords[0], coords[1], ...)
    };

    Op op = Op::constant;
    double value = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;
    std::vector<std::shared_ptr<const Expr>> args;
    std::shared_ptr<const Table> table;
    std::vector<std::size_t> coords;
};

using ExprPtr = std::shared_ptr<const Expr>;

namespace expr {

ExprPtr constant(double c);
ExprPtr coord(std::size_t i);
ExprPtr indicator_eq(std::size_t i, std::size_t state);
ExprPtr indicator_same(std::size_t i, std::size_t j);
ExprPtr indicator_differ(std::size_t i, std::size_t j);
ExprPtr sum(std::vector<ExprPtr> terms);
ExprPtr scale(double s, ExprPtr e);
ExprPtr min(std::vector<ExprPtr> args);
ExprPtr max(std::vector<ExprPtr> args);
ExprPtr table(std::shared_ptr<const Table> t, std::vector<std::size_t> coords);

inline ExprPtr operator+(ExprPtr a, ExprPtr b) { return sum({std::move(a), std::move(b)}); }
inline ExprPtr operator-(ExprPtr a, ExprPtr b) { return sum({std::move(a), scale(-1.0, std::move(b))}); }
inline ExprPtr operator*(double s, ExprPtr e) { return scale(s, std::move(e)); }

/// 1 if coordinate i holds a state >= n (n >= 1), built from the grammar
/// as min(1, max(0, coord(i) - (n - 1))).
ExprPtr indicator_at_least(std::size_t i, std::size_t n);

} // namespace expr

/// Value at a tuple of coordinate codes.
double evaluate(const Expr& e, std::span<const std::size_t> codes);

/// Highest coordinate index referenced, or -1 for constant expressions.
long max_coord(const Expr& e);

/// Rewrites coordinate i to mapping[i].
ExprPtr remap_coords(const ExprPtr& e, std::span<const std::size_t> mapping);

/// Serializes in the query-file grammar (tables print as table#<extent list>).
std::string to_string(const Expr& e);

/// Parses the query-file grammar:
///   expr   := term (('+' | '-') term)*
///   term   := unary ('*' unary)*         (at least one side constant)
///   unary  := '-' unary | atom
///   atom   := number | coord(i) | indicator(coord(i) == s)
///           | indicator(coord(i) == coord(j)) | indicator(coord(i) != coord(j))
///           | min(expr, ...) | max(expr, ...) | '(' expr ')'
/// Throws InvalidArgument with the offending position.
ExprPtr parse_expression(std::string_view text);

} // namespace subexp

#include "subexp/expression.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

#include "subexp/errors.hpp"

namespace subexp {

namespace expr {

namespace {

std::shared_ptr<Expr> node(Expr::Op op) {
    auto e = std::make_shared<Expr>();
    e->op = op;
    return e;
}

void require_args(const std::vector<ExprPtr>& args, const char* what) {
    if (args.empty()) throw InvalidArgument(std::string(what) + " needs at least one argument");
    for (const auto& a : args)
        if (!a) throw InvalidArgument(std::string(what) + " argument is null");
}

} // namespace

ExprPtr constant(double c) {
    if (!std::isfinite(c)) throw InvalidArgument("expression constants must be finite");
    auto e = node(Expr::Op::constant);
    e->value = c;
    return e;
}

ExprPtr coord(std::size_t i) {
    auto e = node(Expr::Op::coord);
    e->i = i;
    return e;
}

ExprPtr indicator_eq(std::size_t i, std::size_t state) {
    auto e = node(Expr::Op::eq_state);
    e->i = i;
    e->j = state;
    return e;
}

ExprPtr indicator_same(std::size_t i, std::size_t j) {
    auto e = node(Expr::Op::eq_coord);
    e->i = i;
    e->j = j;
    return e;
}

ExprPtr indicator_differ(std::size_t i, std::size_t j) {
    auto e = node(Expr::Op::neq_coord);
    e->i = i;
    e->j = j;
    return e;
}

ExprPtr sum(std::vector<ExprPtr> terms) {
    if (terms.empty()) return constant(0.0);
    require_args(terms, "sum");
    auto e = node(Expr::Op::sum);
    e->args = std::move(terms);
    return e;
}

ExprPtr scale(double s, ExprPtr arg) {
    if (!std::isfinite(s)) throw InvalidArgument("scale factor must be finite");
    if (!arg) throw InvalidArgument("scale argument is null");
    if (arg->op == Expr::Op::constant) return constant(s * arg->value);
    auto e = node(Expr::Op::scale);
    e->value = s;
    e->args = {std::move(arg)};
    return e;
}

ExprPtr min(std::vector<ExprPtr> args) {
    require_args(args, "min");
    auto e = node(Expr::Op::min);
    e->args = std::move(args);
    return e;
}

ExprPtr max(std::vector<ExprPtr> args) {
    require_args(args, "max");
    auto e = node(Expr::Op::max);
    e->args = std::move(args);
    return e;
}

ExprPtr table(std::shared_ptr<const Table> t, std::vector<std::size_t> coords) {
    if (!t) throw InvalidArgument("table is null");
    if (t->extents.size() != coords.size())
        throw InvalidArgument("table rank does not match coordinate count");
    std::size_t total = 1;
    for (auto x : t->extents) total *= x;
    if (total != t->data.size()) throw InvalidArgument("table data size does not match extents");
    for (double v : t->data)
        if (!std::isfinite(v)) throw InvalidArgument("table values must be finite");
    auto e = node(Expr::Op::table);
    e->table = std::move(t);
    e->coords = std::move(coords);
    return e;
}

ExprPtr indicator_at_least(std::size_t i, std::size_t n) {
    if (n == 0) return constant(1.0);
    return min({constant(1.0),
                max({constant(0.0), sum({coord(i), constant(-static_cast<double>(n - 1))})})});
}

} // namespace expr

double evaluate(const Expr& e, std::span<const std::size_t> codes) {
    switch (e.op) {
    case Expr::Op::constant: return e.value;
    case Expr::Op::coord: return static_cast<double>(codes[e.i]);
    case Expr::Op::eq_state: return codes[e.i] == e.j ? 1.0 : 0.0;
    case Expr::Op::eq_coord: return codes[e.i] == codes[e.j] ? 1.0 : 0.0;
    case Expr::Op::neq_coord: return codes[e.i] != codes[e.j] ? 1.0 : 0.0;
    case Expr::Op::sum: {
        double s = 0.0;
        for (const auto& a : e.args) s += evaluate(*a, codes);
        return s;
    }
    case Expr::Op::scale: return e.value * evaluate(*e.args[0], codes);
    case Expr::Op::min: {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& a : e.args) m = std::min(m, evaluate(*a, codes));
        return m;
    }
    case Expr::Op::max: {
        double m = -std::numeric_limits<double>::infinity();
        for (const auto& a : e.args) m = std::max(m, evaluate(*a, codes));
        return m;
    }
    case Expr::Op::table: {
        std::size_t index = 0;
        for (std::size_t a = 0; a < e.coords.size(); ++a) {
            const std::size_t c = codes[e.coords[a]];
            if (c >= e.table->extents[a]) throw InvalidArgument("table coordinate out of range");
            index = index * e.table->extents[a] + c;
        }
        return e.table->data[index];
    }
    }
    return 0.0;
}

long max_coord(const Expr& e) {
    switch (e.op) {
    case Expr::Op::constant: return -1;
    case Expr::Op::coord:
    case Expr::Op::eq_state: return static_cast<long>(e.i);
    case Expr::Op::eq_coord:
    case Expr::Op::neq_coord: return static_cast<long>(std::max(e.i, e.j));
    case Expr::Op::table: {
        long m = -1;
        for (auto c : e.coords) m = std::max(m, static_cast<long>(c));
        return m;
    }
    default: {
        long m = -1;
        for (const auto& a : e.args) m = std::max(m, max_coord(*a));
        return m;
    }
    }
}

ExprPtr remap_coords(const ExprPtr& e, std::span<const std::size_t> mapping) {
    auto at = [&](std::size_t i) {
        if (i >= mapping.size()) throw InvalidArgument("coordinate outside remapping");
        return mapping[i];
    };
    auto copy = std::make_shared<Expr>(*e);
    switch (e->op) {
    case Expr::Op::constant: return e;
    case Expr::Op::coord:
    case Expr::Op::eq_state: copy->i = at(e->i); break;
    case Expr::Op::eq_coord:
    case Expr::Op::neq_coord:
        copy->i = at(e->i);
        copy->j = at(e->j);
        break;
    case Expr::Op::table:
        for (auto& c : copy->coords) c = at(c);
        break;
    default:
        for (auto& a : copy->args) a = remap_coords(a, mapping);
        break;
    }
    return copy;
}

namespace {

std::string number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join(const std::vector<ExprPtr>& args, const char* sep) {
    std::string out;
    for (std::size_t k = 0; k < args.size(); ++k) {
        if (k) out += sep;
        out += to_string(*args[k]);
    }
    return out;
}

} // namespace

std::string to_string(const Expr& e) {
    switch (e.op) {
    case Expr::Op::constant: return number(e.value);
    case Expr::Op::coord: return "coord(" + std::to_string(e.i) + ")";
    case Expr::Op::eq_state:
        return "indicator(coord(" + std::to_string(e.i) + ") == " + std::to_string(e.j) + ")";
    case Expr::Op::eq_coord:
        return "indicator(coord(" + std::to_string(e.i) + ") == coord(" + std::to_string(e.j) + "))";
    case Expr::Op::neq_coord:
        return "indicator(coord(" + std::to_string(e.i) + ") != coord(" + std::to_string(e.j) + "))";
    case Expr::Op::sum: return "(" + join(e.args, " + ") + ")";
    case Expr::Op::scale: {
        const auto& a = *e.args[0];
        const bool bare = a.op != Expr::Op::scale && a.op != Expr::Op::sum;
        return number(e.value) + " * " + (bare ? to_string(a) : "(" + to_string(a) + ")");
    }
    case Expr::Op::min: return "min(" + join(e.args, ", ") + ")";
    case Expr::Op::max: return "max(" + join(e.args, ", ") + ")";
    case Expr::Op::table: {
        std::string out = "table#";
        for (std::size_t a = 0; a < e.table->extents.size(); ++a)
            out += (a ? "x" : "") + std::to_string(e.table->extents[a]);
        return out;
    }
    }
    return {};
}

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    ExprPtr parse() {
        auto e = expression();
        skip();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw InvalidArgument("expression: " + why + " at offset " + std::to_string(pos_) + " in \"" +
                              std::string(text_) + "\"");
    }

    void skip() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(std::string_view token) {
        skip();
        if (text_.substr(pos_, token.size()) == token) {
            pos_ += token.size();
            return true;
        }
        return false;
    }

    void expect(std::string_view token) {
        if (!accept(token)) fail("expected '" + std::string(token) + "'");
    }

    bool peek_word(std::string_view word) {
        skip();
        if (text_.substr(pos_, word.size()) != word) return false;
        const std::size_t end = pos_ + word.size();
        return end >= text_.size() || !std::isalnum(static_cast<unsigned char>(text_[end]));
    }

    std::size_t integer() {
        skip();
        std::size_t value = 0;
        auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
        if (ec != std::errc()) fail("expected a nonnegative integer");
        pos_ = static_cast<std::size_t>(ptr - text_.data());
        return value;
    }

    std::size_t coord_index() {
        if (!peek_word("coord")) fail("expected coord(i)");
        pos_ += 5;
        expect("(");
        const std::size_t i = integer();
        expect(")");
        return i;
    }

    ExprPtr expression() {
        std::vector<ExprPtr> terms{term()};
        for (;;) {
            if (accept("+"))
                terms.push_back(term());
            else if (accept("-"))
                terms.push_back(expr::scale(-1.0, term()));
            else
                break;
        }
        return terms.size() == 1 ? terms.front() : expr::sum(std::move(terms));
    }

    ExprPtr term() {
        ExprPtr left = unary();
        while (accept("*")) {
            ExprPtr right = unary();
            if (right->op == Expr::Op::constant)
                left = expr::scale(right->value, left);
            else if (left->op == Expr::Op::constant)
                left = expr::scale(left->value, right);
            else
                fail("multiplication needs a constant operand");
        }
        return left;
    }

    ExprPtr unary() {
        if (accept("-")) {
            ExprPtr inner = unary();
            if (inner->op == Expr::Op::constant) return expr::constant(-inner->value);
            return expr::scale(-1.0, inner);
        }
        return atom();
    }

    std::vector<ExprPtr> arguments() {
        expect("(");
        std::vector<ExprPtr> args{expression()};
        while (accept(",")) args.push_back(expression());
        expect(")");
        return args;
    }

    ExprPtr atom() {
        skip();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
            if (ec != std::errc()) fail("malformed number");
            pos_ = static_cast<std::size_t>(ptr - text_.data());
            return expr::constant(value);
        }
        if (accept("(")) {
            ExprPtr inner = expression();
            expect(")");
            return inner;
        }
        if (peek_word("coord")) return expr::coord(coord_index());
        if (peek_word("indicator")) {
            pos_ += 9;
            expect("(");
            const std::size_t i = coord_index();
            bool equal = true;
            if (accept("=="))
                equal = true;
            else if (accept("!="))
                equal = false;
            else
                fail("expected '==' or '!='");
            ExprPtr result;
            if (peek_word("coord")) {
                const std::size_t j = coord_index();
                result = equal ? expr::indicator_same(i, j) : expr::indicator_differ(i, j);
            } else {
                if (!equal) fail("'!=' needs a coordinate on the right");
                result = expr::indicator_eq(i, integer());
            }
            expect(")");
            return result;
        }
        if (peek_word("min")) {
            pos_ += 3;
            return expr::min(arguments());
        }
        if (peek_word("max")) {
            pos_ += 3;
            return expr::max(arguments());
        }
        fail("unknown token");
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

} // namespace

ExprPtr parse_expression(std::string_view text) { return Parser(text).parse(); }

} // namespace subexp

#pragma once

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "hvrfif/errors.hpp"
#include "hvrfif/util.hpp"

namespace hvrfif {

namespace detail {
class Parser;
}

/// Arithmetic expression in the variables x (curves) or x,y (surfaces):
/// literals, + - * /, unary -, and sin/cos/abs/exp. Immutable after parse;
/// evaluation is pure.
class Expr {
public:
    enum class Op : std::uint8_t { constant, var_x, var_y, add, sub, mul, div, neg, fn_sin, fn_cos, fn_abs, fn_exp };

    struct Node {
        Op op{};
        double value = 0.0;  // constants only
        int a = -1;          // left / only child
        int b = -1;          // right child
    };

    Expr() = default;

    bool empty() const { return nodes_.empty(); }
    int root() const { return root_; }
    const std::vector<Node>& nodes() const { return nodes_; }
    bool uses_y() const { return uses_y_; }

    double eval(double x, double y = 0.0) const { return eval_node(root_, x, y); }

    std::string to_string() const { return print_node(root_, 0); }

    static Expr constant(double v) {
        Expr e;
        e.root_ = e.add_node({Op::constant, v, -1, -1});
        return e;
    }

    /// Structural sum of two expressions (used for factor perturbation s+δ).
    static Expr sum(const Expr& lhs, const Expr& rhs) {
        Expr e;
        e.nodes_ = lhs.nodes_;
        int off = static_cast<int>(e.nodes_.size());
        for (Node n : rhs.nodes_) {
            if (n.a >= 0) n.a += off;
            if (n.b >= 0) n.b += off;
            e.nodes_.push_back(n);
        }
        e.root_ = e.add_node({Op::add, 0.0, lhs.root_, off + rhs.root_});
        e.uses_y_ = lhs.uses_y_ || rhs.uses_y_;
        return e;
    }

private:
    friend Expr parse_expr(std::string_view, bool);
    friend class detail::Parser;

    std::vector<Node> nodes_;
    int root_ = -1;
    bool uses_y_ = false;

    int add_node(Node n) {
        nodes_.push_back(n);
        return static_cast<int>(nodes_.size()) - 1;
    }

    double eval_node(int idx, double x, double y) const {
        const Node& n = nodes_[static_cast<std::size_t>(idx)];
        switch (n.op) {
            case Op::constant: return n.value;
            case Op::var_x: return x;
            case Op::var_y: return y;
            case Op::add: return eval_node(n.a, x, y) + eval_node(n.b, x, y);
            case Op::sub: return eval_node(n.a, x, y) - eval_node(n.b, x, y);
            case Op::mul: return eval_node(n.a, x, y) * eval_node(n.b, x, y);
            case Op::div: {
                double den = eval_node(n.b, x, y);
                if (std::abs(den) < 1e-12)
                    raise(errc::domain_error, "division by near-zero denominator");
                return eval_node(n.a, x, y) / den;
            }
            case Op::neg: return -eval_node(n.a, x, y);
            case Op::fn_sin: return std::sin(eval_node(n.a, x, y));
            case Op::fn_cos: return std::cos(eval_node(n.a, x, y));
            case Op::fn_abs: return std::abs(eval_node(n.a, x, y));
            case Op::fn_exp: return std::exp(eval_node(n.a, x, y));
        }
        return 0.0;
    }

    // precedence: additive 1, multiplicative 2, unary 3, atoms 4
    static int prec(Op op) {
        switch (op) {
            case Op::add:
            case Op::sub: return 1;
            case Op::mul:
            case Op::div: return 2;
            case Op::neg: return 3;
            default: return 4;
        }
    }

    std::string print_node(int idx, int parent_prec) const {
        const Node& n = nodes_[static_cast<std::size_t>(idx)];
        std::string out;
        int p = prec(n.op);
        switch (n.op) {
            case Op::constant:
                out = format_double(n.value);
                // a leading '-' from a negative literal binds like unary minus
                if (n.value < 0 && parent_prec >= 3) out = "(" + out + ")";
                return out;
            case Op::var_x: return "x";
            case Op::var_y: return "y";
            case Op::add: out = print_node(n.a, p) + " + " + print_node(n.b, p + 1); break;
            case Op::sub: out = print_node(n.a, p) + " - " + print_node(n.b, p + 1); break;
            case Op::mul: out = print_node(n.a, p) + "*" + print_node(n.b, p + 1); break;
            case Op::div: out = print_node(n.a, p) + "/" + print_node(n.b, p + 1); break;
            case Op::neg: return parent_prec > p ? "(-" + print_node(n.a, p) + ")" : "-" + print_node(n.a, p);
            case Op::fn_sin: return "sin(" + print_node(n.a, 0) + ")";
            case Op::fn_cos: return "cos(" + print_node(n.a, 0) + ")";
            case Op::fn_abs: return "abs(" + print_node(n.a, 0) + ")";
            case Op::fn_exp: return "exp(" + print_node(n.a, 0) + ")";
        }
        if (parent_prec > p) out = "(" + out + ")";
        return out;
    }
};

namespace detail {

class Parser {
public:
    Parser(std::string_view text, bool allow_y, Expr& out)
        : text_(text), allow_y_(allow_y), out_(out) {}

    int parse() {
        skip_ws();
        if (pos_ >= text_.size())
            raise(errc::syntax_error, "empty expression", pos_);
        int root = additive();
        skip_ws();
        if (pos_ < text_.size())
            raise(errc::syntax_error, "unexpected trailing input '" + std::string(text_.substr(pos_)) + "'", pos_);
        return root;
    }

private:
    std::string_view text_;
    bool allow_y_;
    Expr& out_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    int additive() {
        int lhs = multiplicative();
        for (;;) {
            if (eat('+')) lhs = out_.add_node({Expr::Op::add, 0.0, lhs, multiplicative()});
            else if (eat('-')) lhs = out_.add_node({Expr::Op::sub, 0.0, lhs, multiplicative()});
            else return lhs;
        }
    }

    int multiplicative() {
        int lhs = unary();
        for (;;) {
            if (eat('*')) lhs = out_.add_node({Expr::Op::mul, 0.0, lhs, unary()});
            else if (eat('/')) lhs = out_.add_node({Expr::Op::div, 0.0, lhs, unary()});
            else return lhs;
        }
    }

    int unary() {
        if (eat('-')) return out_.add_node({Expr::Op::neg, 0.0, unary(), -1});
        return primary();
    }

    int primary() {
        skip_ws();
        if (pos_ >= text_.size())
            raise(errc::syntax_error, "expected operand at end of input", pos_);
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            int e = additive();
            if (!eat(')')) raise(errc::syntax_error, "expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        raise(errc::syntax_error, std::string("unexpected character '") + c + "'", pos_);
    }

    int number() {
        const char* begin = text_.data() + pos_;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin) raise(errc::syntax_error, "malformed number", pos_);
        pos_ += static_cast<std::size_t>(end - begin);
        return out_.add_node({Expr::Op::constant, v, -1, -1});
    }

    int identifier() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string name(text_.substr(start, pos_ - start));
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == '(') {
            ++pos_;
            Expr::Op op;
            if (name == "sin") op = Expr::Op::fn_sin;
            else if (name == "cos") op = Expr::Op::fn_cos;
            else if (name == "abs") op = Expr::Op::fn_abs;
            else if (name == "exp") op = Expr::Op::fn_exp;
            else raise(errc::unknown_function, "'" + name + "'", start);
            int arg = additive();
            if (!eat(')')) raise(errc::syntax_error, "expected ')' after function argument", pos_);
            return out_.add_node({op, 0.0, arg, -1});
        }
        if (name == "x") return out_.add_node({Expr::Op::var_x, 0.0, -1, -1});
        if (name == "y") {
            if (!allow_y_)
                raise(errc::unknown_identifier, "'y' is not declared for one-variable factors", start);
            out_.uses_y_ = true;
            return out_.add_node({Expr::Op::var_y, 0.0, -1, -1});
        }
        raise(errc::unknown_identifier, "'" + name + "'", start);
    }
};

}  // namespace detail

/// Parses one factor expression. Errors carry the byte offset of the defect.
inline Expr parse_expr(std::string_view text, bool allow_y = false) {
    std::string owned(text);  // strtod needs NUL termination
    Expr e;
    detail::Parser p(owned, allow_y, e);
    e.root_ = p.parse();
    return e;
}

inline double eval_expr(const Expr& e, double x) { return e.eval(x); }
inline double eval_expr(const Expr& e, double x, double y) { return e.eval(x, y); }

/// Sampled sup/inf/Lipschitz estimates of a factor over a region. All three
/// fields are grid estimates, not certified extrema.
struct FactorProfile {
    double sup_abs = 0.0;
    double inf_abs = 0.0;
    double sup_signed = -std::numeric_limits<double>::infinity();
    double inf_signed = std::numeric_limits<double>::infinity();
    double lipschitz = 0.0;
    double lo = 0.0, hi = 0.0;      // profiled x-interval
    double ylo = 0.0, yhi = 0.0;    // profiled y-interval (surfaces)
    bool rect = false;
};

inline constexpr int kDefaultProfileSamples = 4096;

/// Uniform sampling over [lo, hi] including both endpoints.
inline FactorProfile profile_expr(const Expr& e, double lo, double hi, int samples = kDefaultProfileSamples) {
    require(samples >= 256, errc::invalid_parameter, "profile needs at least 256 samples");
    require(hi >= lo, errc::invalid_parameter, "profile interval reversed");
    FactorProfile p;
    p.lo = lo;
    p.hi = hi;
    double prev = 0.0;
    double step = (hi - lo) / (samples - 1);
    double inf_abs = std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
        double x = (i == samples - 1) ? hi : lo + i * step;
        double v = e.eval(x);
        if (!std::isfinite(v)) raise(errc::domain_error, "factor evaluates to non-finite value");
        p.sup_abs = std::max(p.sup_abs, std::abs(v));
        inf_abs = std::min(inf_abs, std::abs(v));
        p.sup_signed = std::max(p.sup_signed, v);
        p.inf_signed = std::min(p.inf_signed, v);
        if (i > 0 && step > 0) p.lipschitz = std::max(p.lipschitz, std::abs(v - prev) / step);
        prev = v;
    }
    p.inf_abs = inf_abs;
    return p;
}

/// Rectangle variant: samples on a sqrt(samples)-per-axis grid including edges.
inline FactorProfile profile_expr_rect(const Expr& e, double xlo, double xhi, double ylo, double yhi,
                                       int samples = kDefaultProfileSamples) {
    require(samples >= 256, errc::invalid_parameter, "profile needs at least 256 samples");
    int side = std::max(2, static_cast<int>(std::sqrt(static_cast<double>(samples))));
    FactorProfile p;
    p.lo = xlo;
    p.hi = xhi;
    p.ylo = ylo;
    p.yhi = yhi;
    p.rect = true;
    double sx = (xhi - xlo) / (side - 1);
    double sy = (yhi - ylo) / (side - 1);
    std::vector<double> row_prev(static_cast<std::size_t>(side));
    double inf_abs = std::numeric_limits<double>::infinity();
    for (int j = 0; j < side; ++j) {
        double y = (j == side - 1) ? yhi : ylo + j * sy;
        double prev = 0.0;
        for (int i = 0; i < side; ++i) {
            double x = (i == side - 1) ? xhi : xlo + i * sx;
            double v = e.eval(x, y);
            if (!std::isfinite(v)) raise(errc::domain_error, "factor evaluates to non-finite value");
            p.sup_abs = std::max(p.sup_abs, std::abs(v));
            inf_abs = std::min(inf_abs, std::abs(v));
            p.sup_signed = std::max(p.sup_signed, v);
            p.inf_signed = std::min(p.inf_signed, v);
            if (i > 0 && sx > 0) p.lipschitz = std::max(p.lipschitz, std::abs(v - prev) / sx);
            if (j > 0 && sy > 0)
                p.lipschitz = std::max(p.lipschitz, std::abs(v - row_prev[static_cast<std::size_t>(i)]) / sy);
            prev = v;
            row_prev[static_cast<std::size_t>(i)] = v;
        }
    }
    p.inf_abs = inf_abs;
    return p;
}

}  // namespace hvrfif

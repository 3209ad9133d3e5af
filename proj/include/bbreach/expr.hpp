#ifndef BBREACH_EXPR_HPP
#define BBREACH_EXPR_HPP

#include <cctype>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bbreach/interval.hpp"

namespace bbreach {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, std::size_t offset)
        : std::runtime_error(msg + " at offset " + std::to_string(offset)), offset_(offset)
    {
    }
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

enum class FuncKind { Sin, Cos, Exp, Tanh, Sqrt };

// Scalar overloads so the generic evaluator works on plain doubles with the
// same domain-error behavior as the interval path. Declared before ExprAst:
// plain lookup from the member template must see them (no ADL for double).
inline double pow_int(double x, int n)
{
    if (n < 0)
        throw DomainError("negative integer exponent");
    double r = 1.0;
    for (int i = 0; i < n; ++i)
        r *= x;
    return r;
}

inline double checked_div(double a, double b)
{
    if (b == 0.0)
        throw DomainError("division by zero");
    return a / b;
}

inline Interval checked_div(const Interval& a, const Interval& b) { return a / b; }

inline double sin(double x) { return std::sin(x); }
inline double cos(double x) { return std::cos(x); }
inline double exp(double x) { return std::exp(x); }
inline double tanh(double x) { return std::tanh(x); }

inline double sqrt(double x)
{
    if (x < 0.0)
        throw DomainError("sqrt of negative value");
    return std::sqrt(x);
}

// ODE right-hand-side AST. State variables are x1..xn, action symbols a1..am
// (bare "a" reads as a1). Supported functions: sin, cos, exp, tanh, sqrt.
// Grammar (precedence ^ > unary- > */ > +-, left-associative):
//   expr   := term (('+'|'-') term)*
//   term   := unary (('*'|'/') unary)*
//   unary  := '-' unary | factor
//   factor := atom ['^' integer]
//   atom   := number | ident | '(' expr ')' | func '(' expr ')'
class ExprAst {
public:
    enum class Kind { Constant, StateVar, ActionVar, Neg, Add, Sub, Mul, Div, Pow, Func };

    struct Node {
        Kind kind;
        double value = 0.0;   // Constant
        std::size_t index = 0;  // StateVar/ActionVar (0-based)
        int exponent = 0;     // Pow
        FuncKind func = FuncKind::Sin;
        int a = -1;
        int b = -1;
    };

    ExprAst() = default;

    const std::vector<Node>& nodes() const { return nodes_; }
    int root() const { return root_; }
    std::size_t state_dim() const { return n_; }
    std::size_t action_dim() const { return m_; }

    template <class V>
    V eval(std::span<const V> state, std::span<const V> action) const
    {
        if (state.size() != n_ || action.size() != m_)
            throw DimensionMismatch("expression evaluated with wrong state/action dimension");
        return eval_node<V>(root_, state, action);
    }

    std::string to_string() const { return print_node(root_, 0); }

    static ExprAst parse(std::string_view text, std::size_t n, std::size_t m);

private:
    template <class V>
    V eval_node(int id, std::span<const V> state, std::span<const V> action) const
    {
        const Node& node = nodes_[static_cast<std::size_t>(id)];
        switch (node.kind) {
        case Kind::Constant:
            return V(node.value);
        case Kind::StateVar:
            return state[node.index];
        case Kind::ActionVar:
            return action[node.index];
        case Kind::Neg:
            return -eval_node<V>(node.a, state, action);
        case Kind::Add:
            return eval_node<V>(node.a, state, action) + eval_node<V>(node.b, state, action);
        case Kind::Sub:
            return eval_node<V>(node.a, state, action) - eval_node<V>(node.b, state, action);
        case Kind::Mul:
            return eval_node<V>(node.a, state, action) * eval_node<V>(node.b, state, action);
        case Kind::Div:
            return checked_div(eval_node<V>(node.a, state, action),
                               eval_node<V>(node.b, state, action));
        case Kind::Pow:
            return pow_int(eval_node<V>(node.a, state, action), node.exponent);
        case Kind::Func: {
            V arg = eval_node<V>(node.a, state, action);
            switch (node.func) {
            case FuncKind::Sin: return sin(arg);
            case FuncKind::Cos: return cos(arg);
            case FuncKind::Exp: return exp(arg);
            case FuncKind::Tanh: return tanh(arg);
            case FuncKind::Sqrt: return sqrt(arg);
            }
            throw std::logic_error("unreachable");
        }
        }
        throw std::logic_error("unreachable");
    }

    // Precedence levels for printing: 0 add, 1 mul, 2 unary, 3 pow/atom.
    std::string print_node(int id, int parent_level) const;

    int add_node(Node node)
    {
        nodes_.push_back(node);
        return static_cast<int>(nodes_.size()) - 1;
    }

    std::vector<Node> nodes_;
    int root_ = -1;
    std::size_t n_ = 0;
    std::size_t m_ = 0;

    friend class ExprParser;
};

class ExprParser {
public:
    ExprParser(std::string_view text, std::size_t n, std::size_t m)
        : text_(text), n_(n), m_(m)
    {
    }

    ExprAst run()
    {
        ExprAst ast;
        ast.n_ = n_;
        ast.m_ = m_;
        ast_ = &ast;
        pos_ = 0;
        ast.root_ = parse_expr();
        skip_ws();
        if (pos_ != text_.size())
            throw ParseError("unexpected trailing input", pos_);
        return ast;
    }

private:
    void skip_ws()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    char peek()
    {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    bool consume(char c)
    {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    int parse_expr()
    {
        int lhs = parse_term();
        for (;;) {
            if (consume('+')) {
                int rhs = parse_term();
                lhs = ast_->add_node({ExprAst::Kind::Add, 0, 0, 0, FuncKind::Sin, lhs, rhs});
            } else if (consume('-')) {
                int rhs = parse_term();
                lhs = ast_->add_node({ExprAst::Kind::Sub, 0, 0, 0, FuncKind::Sin, lhs, rhs});
            } else {
                return lhs;
            }
        }
    }

    int parse_term()
    {
        int lhs = parse_unary();
        for (;;) {
            if (consume('*')) {
                int rhs = parse_unary();
                lhs = ast_->add_node({ExprAst::Kind::Mul, 0, 0, 0, FuncKind::Sin, lhs, rhs});
            } else if (consume('/')) {
                int rhs = parse_unary();
                lhs = ast_->add_node({ExprAst::Kind::Div, 0, 0, 0, FuncKind::Sin, lhs, rhs});
            } else {
                return lhs;
            }
        }
    }

    int parse_unary()
    {
        if (consume('-')) {
            int a = parse_unary();
            return ast_->add_node({ExprAst::Kind::Neg, 0, 0, 0, FuncKind::Sin, a, -1});
        }
        return parse_factor();
    }

    int parse_factor()
    {
        int base = parse_atom();
        if (consume('^')) {
            skip_ws();
            const std::size_t start = pos_;
            if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
                throw ParseError("expected non-negative integer exponent", pos_);
            int exponent = 0;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                exponent = exponent * 10 + (text_[pos_] - '0');
                if (exponent > 64)
                    throw ParseError("exponent too large", start);
                ++pos_;
            }
            return ast_->add_node(
                {ExprAst::Kind::Pow, 0, 0, exponent, FuncKind::Sin, base, -1});
        }
        return base;
    }

    int parse_atom()
    {
        skip_ws();
        if (pos_ >= text_.size())
            throw ParseError("unexpected end of expression", pos_);
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            int inner = parse_expr();
            if (!consume(')'))
                throw ParseError("expected ')'", pos_);
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)))
            return parse_ident();
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    int parse_number()
    {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
            ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-'))
                ++pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                ++pos_;
        }
        const std::string token(text_.substr(start, pos_ - start));
        try {
            const double v = std::stod(token);
            return ast_->add_node({ExprAst::Kind::Constant, v, 0, 0, FuncKind::Sin, -1, -1});
        } catch (const std::exception&) {
            throw ParseError("malformed number '" + token + "'", start);
        }
    }

    int parse_ident()
    {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        const std::string_view name = text_.substr(start, pos_ - start);

        if (name == "sin" || name == "cos" || name == "exp" || name == "tanh" ||
            name == "sqrt") {
            FuncKind f = FuncKind::Sin;
            if (name == "cos")
                f = FuncKind::Cos;
            else if (name == "exp")
                f = FuncKind::Exp;
            else if (name == "tanh")
                f = FuncKind::Tanh;
            else if (name == "sqrt")
                f = FuncKind::Sqrt;
            if (!consume('('))
                throw ParseError("expected '(' after function name", pos_);
            int arg = parse_expr();
            if (!consume(')'))
                throw ParseError("expected ')'", pos_);
            return ast_->add_node({ExprAst::Kind::Func, 0, 0, 0, f, arg, -1});
        }

        if (name.size() >= 1 && (name[0] == 'x' || name[0] == 'a')) {
            const bool is_state = name[0] == 'x';
            std::size_t index = 0;
            if (name.size() == 1) {
                if (is_state)
                    throw ParseError("unknown identifier 'x'", start);
                index = 1;  // bare "a" means a1
            } else {
                for (char d : name.substr(1)) {
                    if (!std::isdigit(static_cast<unsigned char>(d)))
                        throw ParseError("unknown identifier '" + std::string(name) + "'",
                                         start);
                    index = index * 10 + static_cast<std::size_t>(d - '0');
                }
            }
            if (index == 0)
                throw ParseError("variable indices are 1-based", start);
            const std::size_t limit = is_state ? n_ : m_;
            if (index > limit)
                throw ParseError("variable '" + std::string(name) + "' out of range (" +
                                     (is_state ? "state" : "action") + " dimension is " +
                                     std::to_string(limit) + ")",
                                 start);
            return ast_->add_node({is_state ? ExprAst::Kind::StateVar : ExprAst::Kind::ActionVar,
                                   0, index - 1, 0, FuncKind::Sin, -1, -1});
        }
        throw ParseError("unknown identifier '" + std::string(name) + "'", start);
    }

    std::string_view text_;
    std::size_t n_;
    std::size_t m_;
    std::size_t pos_ = 0;
    ExprAst* ast_ = nullptr;
};

inline ExprAst ExprAst::parse(std::string_view text, std::size_t n, std::size_t m)
{
    return ExprParser(text, n, m).run();
}

inline std::string ExprAst::print_node(int id, int parent_level) const
{
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    std::string out;
    int level = 3;
    switch (node.kind) {
    case Kind::Constant: {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", node.value);
        out = buf;
        break;
    }
    case Kind::StateVar:
        out = "x" + std::to_string(node.index + 1);
        break;
    case Kind::ActionVar:
        out = "a" + std::to_string(node.index + 1);
        break;
    case Kind::Neg:
        level = 2;
        out = "-" + print_node(node.a, 2);
        break;
    case Kind::Add:
        level = 0;
        out = print_node(node.a, 0) + " + " + print_node(node.b, 1);
        break;
    case Kind::Sub:
        level = 0;
        out = print_node(node.a, 0) + " - " + print_node(node.b, 1);
        break;
    case Kind::Mul:
        level = 1;
        out = print_node(node.a, 1) + " * " + print_node(node.b, 2);
        break;
    case Kind::Div:
        level = 1;
        out = print_node(node.a, 1) + " / " + print_node(node.b, 2);
        break;
    case Kind::Pow:
        level = 3;
        out = print_node(node.a, 4) + "^" + std::to_string(node.exponent);
        break;
    case Kind::Func: {
        const char* names[] = {"sin", "cos", "exp", "tanh", "sqrt"};
        out = std::string(names[static_cast<int>(node.func)]) + "(" + print_node(node.a, 0) +
              ")";
        break;
    }
    }
    if (level < parent_level)
        out = "(" + out + ")";
    return out;
}

// Parsed right-hand sides of s' = f(s, a), one expression per state dimension.
struct Dynamics {
    std::size_t state_dim = 0;
    std::size_t action_dim = 0;
    std::vector<ExprAst> rhs;

    static Dynamics parse(const std::vector<std::string>& exprs, std::size_t n, std::size_t m)
    {
        if (exprs.size() != n)
            throw DimensionMismatch("dynamics needs one expression per state dimension");
        Dynamics dyn;
        dyn.state_dim = n;
        dyn.action_dim = m;
        dyn.rhs.reserve(n);
        for (const auto& e : exprs)
            dyn.rhs.push_back(ExprAst::parse(e, n, m));
        return dyn;
    }
};

inline double eval_point(const ExprAst& ast, std::span<const double> s,
                         std::span<const double> act)
{
    return ast.eval<double>(s, act);
}

inline Interval eval_box(const ExprAst& ast, const IntervalBox& box,
                         std::span<const double> act)
{
    std::vector<Interval> state(box.dims());
    std::vector<Interval> action;
    action.reserve(act.size());
    for (double a : act)
        action.emplace_back(a);
    return ast.eval<Interval>(state, action);
}

}  // namespace bbreach

#endif

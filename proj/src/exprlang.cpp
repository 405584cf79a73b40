#include "pucci/exprlang.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace pucci::expr {

namespace {

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += items[i];
    }
    return out;
}

NodePtr make_leaf_number(double v) { return std::make_shared<const Node>(Node{NodeKind::Number, v, 0, {}, {}}); }
NodePtr make_variable(std::size_t i) { return std::make_shared<const Node>(Node{NodeKind::Variable, 0.0, i, {}, {}}); }
NodePtr make_node(NodeKind k, NodePtr a, NodePtr b = {}) {
    return std::make_shared<const Node>(Node{k, 0.0, 0, std::move(a), std::move(b)});
}

class Parser {
public:
    Parser(std::string_view text, std::size_t n) : text_(text), n_(n) {}

    NodePtr parse_all() {
        NodePtr root = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) syntax_error({"'+'", "'-'", "'*'", "'/'", "end of input"});
        return root;
    }

private:
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) syntax_error({std::string("'") + c + "'"});
    }

    [[noreturn]] void syntax_error(std::vector<std::string> expected) {
        skip_ws();
        std::string found = pos_ < text_.size() ? std::string("'") + text_[pos_] + "'" : "end of input";
        std::string msg = "syntax error at offset " + std::to_string(pos_) + ": found " + found +
                          ", expected one of " + join(expected);
        throw ParseError(ParseErrorKind::Syntax, pos_, std::move(expected), std::move(msg));
    }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        for (;;) {
            if (accept('+')) lhs = make_node(NodeKind::Add, lhs, parse_term());
            else if (accept('-')) lhs = make_node(NodeKind::Subtract, lhs, parse_term());
            else return lhs;
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_unary();
        for (;;) {
            if (accept('*')) lhs = make_node(NodeKind::Multiply, lhs, parse_unary());
            else if (accept('/')) lhs = make_node(NodeKind::Divide, lhs, parse_unary());
            else return lhs;
        }
    }

    NodePtr parse_unary() {
        if (accept('-')) return make_node(NodeKind::Negate, parse_unary());
        return parse_primary();
    }

    NodePtr parse_primary() {
        skip_ws();
        if (pos_ >= text_.size()) syntax_error({"number", "variable", "'exp'", "'pow'", "'('", "'-'"});
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr inner = parse_expr();
            expect(')');
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
        syntax_error({"number", "variable", "'exp'", "'pow'", "'('", "'-'"});
    }

    NodePtr parse_number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            std::size_t count = 0;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_, ++count;
            return count;
        };
        std::size_t mantissa = digits();
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            mantissa += digits();
        }
        if (mantissa == 0) {
            pos_ = start;
            syntax_error({"digit"});
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            const std::size_t save = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (digits() == 0) pos_ = save;  // 'e' belongs to something else
        }
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
        if (ec != std::errc() || ptr != text_.data() + pos_ || !std::isfinite(value)) {
            pos_ = start;
            syntax_error({"finite number"});
        }
        return make_leaf_number(value);
    }

    NodePtr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        const std::string_view ident = text_.substr(start, pos_ - start);

        if (ident == "exp") {
            expect('(');
            NodePtr arg = parse_expr();
            expect(')');
            return make_node(NodeKind::Exp, arg);
        }
        if (ident == "pow") {
            expect('(');
            NodePtr base = parse_expr();
            expect(',');
            NodePtr exponent = parse_expr();
            expect(')');
            return make_node(NodeKind::Pow, base, exponent);
        }
        if (ident.size() >= 2 && ident[0] == 'u') {
            std::size_t index = 0;
            const auto digits = ident.substr(1);
            const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
            if (ec == std::errc() && ptr == digits.data() + digits.size()) {
                if (index < 1 || index > n_) {
                    throw ParseError(ParseErrorKind::VariableOutOfRange, start, {},
                                     "variable " + std::string(ident) + " at offset " + std::to_string(start) +
                                         " is out of range u1..u" + std::to_string(n_));
                }
                return make_variable(index);
            }
        }
        throw ParseError(ParseErrorKind::UnknownIdentifier, start, {},
                         "unknown identifier '" + std::string(ident) + "' at offset " + std::to_string(start));
    }

    std::string_view text_;
    std::size_t n_;
    std::size_t pos_ = 0;
};

double checked(double v, const char* what) {
    if (!std::isfinite(v)) throw EvalError(EvalErrorKind::NonFinite, std::string("non-finite result in ") + what);
    return v;
}

double eval_node(const Node& node, std::span<const double> x) {
    switch (node.kind) {
        case NodeKind::Number: return node.number;
        case NodeKind::Variable: return x[node.variable - 1];
        case NodeKind::Negate: return -eval_node(*node.lhs, x);
        case NodeKind::Add: return checked(eval_node(*node.lhs, x) + eval_node(*node.rhs, x), "addition");
        case NodeKind::Subtract: return checked(eval_node(*node.lhs, x) - eval_node(*node.rhs, x), "subtraction");
        case NodeKind::Multiply: return checked(eval_node(*node.lhs, x) * eval_node(*node.rhs, x), "multiplication");
        case NodeKind::Divide: {
            const double num = eval_node(*node.lhs, x);
            const double den = eval_node(*node.rhs, x);
            if (den == 0.0) throw EvalError(EvalErrorKind::DivisionByZero, "division by zero");
            return checked(num / den, "division");
        }
        case NodeKind::Pow: {
            const double base = eval_node(*node.lhs, x);
            const double p = eval_node(*node.rhs, x);
            if (base == 0.0) {
                if (p > 0.0) return 0.0;
                if (p == 0.0) return 1.0;
                throw EvalError(EvalErrorKind::DivisionByZero, "pow of zero with negative exponent");
            }
            if (base < 0.0 && p != std::trunc(p)) {
                throw EvalError(EvalErrorKind::InvalidPow, "pow of negative base with non-integer exponent");
            }
            return checked(std::pow(base, p), "pow");
        }
        case NodeKind::Exp: return checked(std::exp(eval_node(*node.lhs, x)), "exp");
    }
    return 0.0;
}

void print_node(const Node& node, std::string& out) {
    switch (node.kind) {
        case NodeKind::Number: {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", node.number);
            out += buf;
            return;
        }
        case NodeKind::Variable: out += "u" + std::to_string(node.variable); return;
        case NodeKind::Negate:
            out += "(-";
            print_node(*node.lhs, out);
            out += ")";
            return;
        case NodeKind::Exp:
            out += "exp(";
            print_node(*node.lhs, out);
            out += ")";
            return;
        case NodeKind::Pow:
            out += "pow(";
            print_node(*node.lhs, out);
            out += ", ";
            print_node(*node.rhs, out);
            out += ")";
            return;
        default: break;
    }
    const char* op = node.kind == NodeKind::Add        ? " + "
                     : node.kind == NodeKind::Subtract ? " - "
                     : node.kind == NodeKind::Multiply ? " * "
                                                       : " / ";
    out += "(";
    print_node(*node.lhs, out);
    out += op;
    print_node(*node.rhs, out);
    out += ")";
}

}  // namespace

ParseError::ParseError(ParseErrorKind kind, std::size_t offset, std::vector<std::string> expected, std::string detail)
    : Error(std::move(detail)), kind_(kind), offset_(offset), expected_(std::move(expected)) {}

bool operator==(const Node& a, const Node& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case NodeKind::Number: return a.number == b.number;
        case NodeKind::Variable: return a.variable == b.variable;
        case NodeKind::Negate:
        case NodeKind::Exp: return *a.lhs == *b.lhs;
        default: return *a.lhs == *b.lhs && *a.rhs == *b.rhs;
    }
}

bool operator==(const Expr& a, const Expr& b) { return a.arity() == b.arity() && a.root() == b.root(); }

Expr parse(std::string_view text, std::size_t n) {
    if (n < 1) throw PreconditionError("expression arity must be >= 1");
    return Expr(Parser(text, n).parse_all(), n);
}

double eval(const Expr& e, std::span<const double> x) {
    if (x.size() != e.arity()) {
        throw EvalError(EvalErrorKind::ArityMismatch, "expected " + std::to_string(e.arity()) + " arguments, got " +
                                                          std::to_string(x.size()));
    }
    return eval_node(e.root(), x);
}

std::string print(const Expr& e) {
    std::string out;
    print_node(e.root(), out);
    return out;
}

}  // namespace pucci::expr

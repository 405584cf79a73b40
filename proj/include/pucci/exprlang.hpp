#pragma once

// A small expression language for the right-hand sides f_i(u1, ..., un).
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | primary
//   primary := NUMBER | 'u' INDEX | 'exp' '(' expr ')'
//            | 'pow' '(' expr ',' expr ')' | '(' expr ')'
//
// Literals are nonnegative (a leading '-' is unary negation). Whitespace is
// insignificant. ASTs are immutable and can be shared between threads.

#include "pucci/errors.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pucci::expr {

enum class NodeKind { Number, Variable, Negate, Add, Subtract, Multiply, Divide, Pow, Exp };

struct Node {
    NodeKind kind;
    double number = 0.0;        // Number
    std::size_t variable = 0;   // Variable, 1-based
    std::shared_ptr<const Node> lhs;  // unary operand / left operand / pow base / exp argument
    std::shared_ptr<const Node> rhs;  // right operand / pow exponent
};

using NodePtr = std::shared_ptr<const Node>;

/// Parsed expression over u1..u_arity.
class Expr {
public:
    Expr(NodePtr root, std::size_t arity) : root_(std::move(root)), arity_(arity) {}

    const Node& root() const { return *root_; }
    std::size_t arity() const { return arity_; }

private:
    NodePtr root_;
    std::size_t arity_;
};

/// Structural equality (literal values compared exactly).
bool operator==(const Node& a, const Node& b);
bool operator==(const Expr& a, const Expr& b);

enum class ParseErrorKind { Syntax, UnknownIdentifier, VariableOutOfRange };

class ParseError : public Error {
public:
    ParseError(ParseErrorKind kind, std::size_t offset, std::vector<std::string> expected, std::string detail);

    ParseErrorKind kind() const { return kind_; }
    /// Byte offset into the source text.
    std::size_t offset() const { return offset_; }
    /// Tokens that would have been accepted at offset (syntax errors only).
    const std::vector<std::string>& expected() const { return expected_; }

private:
    ParseErrorKind kind_;
    std::size_t offset_;
    std::vector<std::string> expected_;
};

enum class EvalErrorKind { DivisionByZero, InvalidPow, NonFinite, ArityMismatch };

class EvalError : public Error {
public:
    EvalError(EvalErrorKind kind, std::string detail) : Error(std::move(detail)), kind_(kind) {}
    EvalErrorKind kind() const { return kind_; }

private:
    EvalErrorKind kind_;
};

/// Recursive-descent parse; n is the number of admissible variables (n >= 1).
Expr parse(std::string_view text, std::size_t n);

/// Real arithmetic with checked division, pow and overflow.
/// pow(0, p) = 0 for p > 0 and pow(0, 0) = 1.
double eval(const Expr& e, std::span<const double> x);

/// Fully parenthesised rendering that parses back to the same tree.
std::string print(const Expr& e);

}  // namespace pucci::expr

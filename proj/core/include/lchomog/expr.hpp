#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "lchomog/fields.hpp"

namespace lchomog {

/// Immutable analytic expression in the variables x, y and t.
///
/// Grammar (whitespace ignored):
///
///     expr   := term (('+' | '-') term)*
///     term   := unary (('*' | '/') unary)*
///     unary  := '-' unary | power
///     power  := base ('^' unary)?          right-associative
///     base   := number | 'pi' | 'x' | 'y' | 't' | func '(' expr ')' | '(' expr ')'
///     func   := sin | cos | exp | sqrt | abs
///
/// Unary minus binds looser than '^', so "-x^2" is -(x^2). Input nested or
/// chained more than 256 levels deep is rejected with ParseError.
class Expr {
public:
    enum class Kind { constant, variable, unary, binary };

    /// Default-constructed expression is the constant 0.
    Expr();

    /// Throws ParseError or UnknownIdentifier.
    static Expr parse(std::string_view text);

    /// Throws EvalError if any intermediate value is not finite.
    double eval(double x, double y, double t) const;

    /// Fully parenthesised text that reparses to an equivalent tree.
    std::string to_string() const;

    /// The text the expression was parsed from (or to_string() if built otherwise).
    const std::string& source() const { return source_; }

    Kind kind() const;
    bool is_zero_constant() const;
    /// True if the variable 'x', 'y' or 't' occurs in the tree.
    bool depends_on(char variable) const;

    /// Same source text.
    friend bool operator==(const Expr& a, const Expr& b) { return a.source_ == b.source_; }

    struct Node;

private:
    explicit Expr(std::shared_ptr<const Node> root, std::string source);
    std::shared_ptr<const Node> root_;
    std::string source_;
};

/// Two-component expression, e.g. a forcing field or an initial director.
struct VectorExpr {
    Expr first;
    Expr second;

    static VectorExpr parse(std::string_view a, std::string_view b) { return {Expr::parse(a), Expr::parse(b)}; }
    Vec2 eval(double x, double y, double t) const { return {first.eval(x, y, t), second.eval(x, y, t)}; }
    bool is_zero() const { return first.is_zero_constant() && second.is_zero_constant(); }
    bool depends_on(char variable) const { return first.depends_on(variable) || second.depends_on(variable); }

    friend bool operator==(const VectorExpr&, const VectorExpr&) = default;
};

}  // namespace lchomog

#include "lchomog/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include "lchomog/errors.hpp"

namespace lchomog {

enum class UnaryOp { neg, sin, cos, exp, sqrt, abs };
enum class BinaryOp { add, sub, mul, div, pow };

struct Expr::Node {
    Kind kind = Kind::constant;
    double value = 0.0;
    char variable = 'x';
    UnaryOp unary = UnaryOp::neg;
    BinaryOp binary = BinaryOp::add;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
    int depth = 1;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make_constant(double v) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = Expr::Kind::constant;
    n->value = v;
    return n;
}

NodePtr make_variable(char c) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = Expr::Kind::variable;
    n->variable = c;
    return n;
}

NodePtr make_unary(UnaryOp op, NodePtr arg) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = Expr::Kind::unary;
    n->unary = op;
    n->depth = arg->depth + 1;
    n->lhs = std::move(arg);
    return n;
}

NodePtr make_binary(BinaryOp op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = Expr::Kind::binary;
    n->binary = op;
    n->depth = std::max(a->depth, b->depth) + 1;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
}

const std::vector<std::string> kOperandTokens = {"number", "identifier", "'('", "'-'"};

// Bounds both the parser recursion and the tree depth walked by eval.
constexpr int kMaxDepth = 256;

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    NodePtr parse() {
        auto node = expr();
        skip_ws();
        if (pos_ != text_.size()) fail({"operator", "end of input"});
        return node;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    int nesting_ = 0;

    struct Nest {
        Parser& p;
        explicit Nest(Parser& parser) : p(parser) {
            if (++p.nesting_ > kMaxDepth) p.fail({"less deeply nested input"});
        }
        ~Nest() { --p.nesting_; }
    };

    NodePtr bounded(NodePtr n) const {
        if (n->depth > kMaxDepth) fail({"a shorter expression"});
        return n;
    }

    [[noreturn]] void fail(std::vector<std::string> expected) const {
        std::string msg = "parse error at offset " + std::to_string(pos_) + ": expected ";
        for (std::size_t k = 0; k < expected.size(); ++k) msg += (k ? " or " : "") + expected[k];
        throw ParseError(pos_, std::move(expected), msg);
    }

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' || text_[pos_] == '\r'))
            ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr() {
        auto node = term();
        for (;;) {
            if (accept('+')) node = bounded(make_binary(BinaryOp::add, node, term()));
            else if (accept('-')) node = bounded(make_binary(BinaryOp::sub, node, term()));
            else return node;
        }
    }

    NodePtr term() {
        auto node = unary();
        for (;;) {
            if (accept('*')) node = bounded(make_binary(BinaryOp::mul, node, unary()));
            else if (accept('/')) node = bounded(make_binary(BinaryOp::div, node, unary()));
            else return node;
        }
    }

    NodePtr unary() {
        const Nest guard(*this);
        if (accept('-')) return bounded(make_unary(UnaryOp::neg, unary()));
        return power();
    }

    NodePtr power() {
        auto node = base();
        if (accept('^')) node = bounded(make_binary(BinaryOp::pow, node, unary()));
        return node;
    }

    static bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
    static bool is_digit(char c) { return c >= '0' && c <= '9'; }

    NodePtr base() {
        skip_ws();
        if (pos_ >= text_.size()) fail(kOperandTokens);
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            auto node = expr();
            if (!accept(')')) fail({"')'"});
            return node;
        }
        if (is_digit(c) || (c == '.' && pos_ + 1 < text_.size() && is_digit(text_[pos_ + 1]))) return number();
        if (is_ident_start(c)) return identifier();
        fail(kOperandTokens);
    }

    NodePtr number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
            if (p < text_.size() && is_digit(text_[p])) {
                while (p < text_.size() && is_digit(text_[p])) ++p;
                pos_ = p;
            }
        }
        double value = 0.0;
        const auto* first = text_.data() + start;
        const auto* last = text_.data() + pos_;
        const auto res = std::from_chars(first, last, value);
        if (res.ec != std::errc() || res.ptr != last) {
            pos_ = start;
            fail({"number"});
        }
        return make_constant(value);
    }

    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && (is_ident_start(text_[pos_]) || is_digit(text_[pos_]))) ++pos_;
        const std::string_view name = text_.substr(start, pos_ - start);
        if (name == "pi") return make_constant(std::numbers::pi);
        if (name == "x" || name == "y" || name == "t") return make_variable(name[0]);
        UnaryOp op;
        if (name == "sin") op = UnaryOp::sin;
        else if (name == "cos") op = UnaryOp::cos;
        else if (name == "exp") op = UnaryOp::exp;
        else if (name == "sqrt") op = UnaryOp::sqrt;
        else if (name == "abs") op = UnaryOp::abs;
        else throw UnknownIdentifier(start, std::string(name));
        if (!accept('(')) fail({"'('"});
        auto arg = expr();
        if (!accept(')')) fail({"')'"});
        return bounded(make_unary(op, std::move(arg)));
    }
};

double checked(double v) {
    if (!std::isfinite(v)) throw EvalError("expression produced a non-finite value");
    return v;
}

double evaluate(const Expr::Node& n, double x, double y, double t) {
    switch (n.kind) {
    case Expr::Kind::constant:
        return n.value;
    case Expr::Kind::variable:
        return n.variable == 'x' ? x : n.variable == 'y' ? y : t;
    case Expr::Kind::unary: {
        const double a = evaluate(*n.lhs, x, y, t);
        switch (n.unary) {
        case UnaryOp::neg: return -a;
        case UnaryOp::sin: return checked(std::sin(a));
        case UnaryOp::cos: return checked(std::cos(a));
        case UnaryOp::exp: return checked(std::exp(a));
        case UnaryOp::sqrt: return checked(std::sqrt(a));
        case UnaryOp::abs: return std::abs(a);
        }
        break;
    }
    case Expr::Kind::binary: {
        const double a = evaluate(*n.lhs, x, y, t);
        const double b = evaluate(*n.rhs, x, y, t);
        switch (n.binary) {
        case BinaryOp::add: return checked(a + b);
        case BinaryOp::sub: return checked(a - b);
        case BinaryOp::mul: return checked(a * b);
        case BinaryOp::div: return checked(a / b);
        case BinaryOp::pow: return checked(std::pow(a, b));
        }
        break;
    }
    }
    return 0.0;
}

void print(const Expr::Node& n, std::string& out) {
    switch (n.kind) {
    case Expr::Kind::constant: {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", n.value);
        out += buf;
        return;
    }
    case Expr::Kind::variable:
        out += n.variable;
        return;
    case Expr::Kind::unary: {
        static constexpr const char* names[] = {"-", "sin", "cos", "exp", "sqrt", "abs"};
        out += names[static_cast<int>(n.unary)];
        out += '(';
        print(*n.lhs, out);
        out += ')';
        return;
    }
    case Expr::Kind::binary: {
        static constexpr char ops[] = {'+', '-', '*', '/', '^'};
        out += '(';
        print(*n.lhs, out);
        out += ops[static_cast<int>(n.binary)];
        print(*n.rhs, out);
        out += ')';
        return;
    }
    }
}

bool mentions(const Expr::Node& n, char v) {
    switch (n.kind) {
    case Expr::Kind::constant: return false;
    case Expr::Kind::variable: return n.variable == v;
    case Expr::Kind::unary: return mentions(*n.lhs, v);
    case Expr::Kind::binary: return mentions(*n.lhs, v) || mentions(*n.rhs, v);
    }
    return false;
}

}  // namespace

Expr::Expr() : Expr(make_constant(0.0), "0") {}

Expr::Expr(std::shared_ptr<const Node> root, std::string source) : root_(std::move(root)), source_(std::move(source)) {}

Expr Expr::parse(std::string_view text) {
    Parser p(text);
    auto root = p.parse();
    return Expr(std::move(root), std::string(text));
}

double Expr::eval(double x, double y, double t) const { return checked(evaluate(*root_, x, y, t)); }

std::string Expr::to_string() const {
    std::string out;
    print(*root_, out);
    return out;
}

Expr::Kind Expr::kind() const { return root_->kind; }

bool Expr::depends_on(char variable) const { return mentions(*root_, variable); }

bool Expr::is_zero_constant() const { return root_->kind == Kind::constant && root_->value == 0.0; }

}  // namespace lchomog

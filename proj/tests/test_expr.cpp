#include <cmath>
#include <random>

#include "doctest.h"
#include "lchomog/errors.hpp"
#include "lchomog/expr.hpp"

using namespace lchomog;

TEST_CASE("basic evaluation") {
    CHECK(std::abs(Expr::parse("sin(pi*x)*cos(pi*y)").eval(0.5, 0.5, 0.0)) < 1e-15);
    CHECK(Expr::parse("x^2 + t").eval(2, 0, 3) == 7.0);
    CHECK(Expr::parse("-x^2").eval(3, 0, 0) == -9.0);
    CHECK(Expr::parse("2^3^2").eval(0, 0, 0) == 512.0);
    CHECK(Expr::parse("(-2)^2").eval(0, 0, 0) == 4.0);
    CHECK(Expr::parse("--x").eval(4, 0, 0) == 4.0);
    CHECK(Expr::parse("2*-x").eval(4, 0, 0) == -8.0);
    CHECK(Expr::parse("1 - 2 - 3").eval(0, 0, 0) == -4.0);
    CHECK(Expr::parse("8 / 4 / 2").eval(0, 0, 0) == 1.0);
    CHECK(Expr::parse("exp(0) + sqrt(4) + abs(-3)").eval(0, 0, 0) == 6.0);
    CHECK(Expr::parse("1.5e2").eval(0, 0, 0) == 150.0);
    CHECK(Expr::parse(" y ").eval(0, 7, 0) == 7.0);
    CHECK(Expr::parse("pi").eval(0, 0, 0) == M_PI);
}

TEST_CASE("parse errors carry the byte offset") {
    try {
        (void)Expr::parse("sin(");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 4);
        CHECK(!e.expected().empty());
    }
    CHECK_THROWS_AS((void)Expr::parse(""), ParseError);
    CHECK_THROWS_AS((void)Expr::parse("1 +"), ParseError);
    CHECK_THROWS_AS((void)Expr::parse("(x"), ParseError);
    CHECK_THROWS_AS((void)Expr::parse("x y"), ParseError);
    CHECK_THROWS_AS((void)Expr::parse("2 ** 3"), ParseError);
}

TEST_CASE("unknown names are reported") {
    try {
        (void)Expr::parse("x + tan(y)");
        FAIL("expected UnknownIdentifier");
    } catch (const UnknownIdentifier& e) {
        CHECK(e.name() == "tan");
        CHECK(e.offset() == 4);
    }
    CHECK_THROWS_AS((void)Expr::parse("z"), UnknownIdentifier);
}

TEST_CASE("non-finite results raise EvalError") {
    CHECK_THROWS_AS((void)Expr::parse("1/ (x-1)").eval(1, 0, 0), EvalError);
    CHECK_THROWS_AS((void)Expr::parse("sqrt(x)").eval(-1, 0, 0), EvalError);
    CHECK_THROWS_AS((void)Expr::parse("exp(x)").eval(1000, 0, 0), EvalError);
    CHECK_NOTHROW((void)Expr::parse("1/(x-1)").eval(2, 0, 0));
}

TEST_CASE("variable dependence") {
    const auto e = Expr::parse("sin(2*pi*y) + 0*t");
    CHECK(e.depends_on('y'));
    CHECK(e.depends_on('t'));
    CHECK(!e.depends_on('x'));
    CHECK(Expr().is_zero_constant());
    CHECK(VectorExpr::parse("0", "0").is_zero());
}

TEST_CASE("printing reparses to the same function") {
    const char* sources[] = {"sin(pi*x)*cos(pi*y)", "-x^2 + 3*t", "2^3^2", "x/(y+2)-t",
                             "exp(-(x-0.5)^2/0.01)", "abs(sin(x))^0.5", "-(-x)", "1 - (2 - 3)*x"};
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    for (const char* s : sources) {
        const auto a = Expr::parse(s);
        const auto b = Expr::parse(a.to_string());
        CHECK(b.to_string() == a.to_string());
        for (int k = 0; k < 100; ++k) {
            const double x = u(rng), y = u(rng), t = u(rng);
            const double va = a.eval(x, y, t), vb = b.eval(x, y, t);
            CHECK(std::abs(va - vb) <= 1e-12 * std::max(1.0, std::abs(va)));
        }
    }
}

TEST_CASE("random input never crashes the parser") {
    std::mt19937 rng(12345);
    const std::string alphabet = "0123456789.+-*/^()xytpisncoeqrtab e\t,";
    std::uniform_int_distribution<int> len(0, 256);
    std::uniform_int_distribution<int> byte(0, 255);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(alphabet.size()) - 1);
    int parsed = 0;
    for (int k = 0; k < 10000; ++k) {
        std::string s(static_cast<std::size_t>(len(rng)), ' ');
        // Half raw bytes, half drawn from the grammar's own characters.
        for (char& c : s) c = (k % 2) ? static_cast<char>(byte(rng)) : alphabet[static_cast<std::size_t>(pick(rng))];
        try {
            const auto e = Expr::parse(s);
            ++parsed;
            try {
                (void)e.eval(0.3, 0.7, 0.1);
            } catch (const EvalError&) {
            }
        } catch (const ParseError&) {
        } catch (const UnknownIdentifier&) {
        }
    }
    CHECK(parsed >= 0);
}

TEST_CASE("deep nesting is rejected rather than overflowing") {
    std::string s(100000, '(');
    CHECK_THROWS_AS((void)Expr::parse(s), ParseError);
    std::string minus(100000, '-');
    CHECK_THROWS_AS((void)Expr::parse(minus + "x"), ParseError);
}

TEST_CASE("long but shallow chains are limited too") {
    std::string s = "x";
    for (int k = 0; k < 100; ++k) s += "+1";
    CHECK(Expr::parse(s).eval(1, 0, 0) == 101.0);
    for (int k = 0; k < 1000; ++k) s += "+1";
    CHECK_THROWS_AS((void)Expr::parse(s), ParseError);
}

#include <cmath>
#include <random>
#include <string>

#include "doctest.h"
#include "errors.hpp"
#include "expr.hpp"
#include "registry.hpp"
#include "vector_field.hpp"

using namespace resilience;

namespace {

double eval1(const std::string& src, std::vector<std::string> syms = {}, std::vector<double> vals = {}) {
    return Expression::parse(src, std::move(syms)).evaluate(vals);
}

// Random tree over {x, y}. Constants stay nonnegative, as the parser never yields a
// negative literal.
int grow(Expression& e, std::mt19937_64& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth > 0 ? 8 : 1);
    Expression::Node n;
    switch (pick(rng)) {
        case 0:
            n.kind = Expression::Kind::Constant;
            n.value = std::uniform_real_distribution<double>(0.0, 5.0)(rng);
            return e.add_node(n);
        case 1:
            n.kind = Expression::Kind::Symbol;
            n.symbol = rng() % 2;
            return e.add_node(n);
        case 2:
            n.kind = Expression::Kind::Negate;
            n.lhs = grow(e, rng, depth - 1);
            return e.add_node(n);
        case 3:
            n.kind = Expression::Kind::Call;
            n.function = static_cast<Function>(rng() % 4);
            n.lhs = grow(e, rng, depth - 1);
            return e.add_node(n);
        default: {
            static const Expression::Kind ops[] = {Expression::Kind::Add, Expression::Kind::Subtract,
                                                   Expression::Kind::Multiply, Expression::Kind::Divide,
                                                   Expression::Kind::Power};
            n.kind = ops[rng() % 5];
            n.lhs = grow(e, rng, depth - 1);
            n.rhs = grow(e, rng, depth - 1);
            return e.add_node(n);
        }
    }
}

}  // namespace

TEST_CASE("precedence and associativity") {
    CHECK(eval1("1 + 2 * 3") == 7.0);
    CHECK(eval1("(1 + 2) * 3") == 9.0);
    CHECK(eval1("2 ^ 3 ^ 2") == 512.0);
    CHECK(eval1("-2 ^ 2") == -4.0);
    CHECK(eval1("2 ^ -1") == 0.5);
    CHECK(eval1("8 / 4 / 2") == 1.0);
    CHECK(eval1("10 - 4 - 3") == 3.0);
    CHECK(eval1("1.5e2 + .5") == 150.5);
}

TEST_CASE("functions and symbols") {
    const std::vector<std::string> s{"x", "y"};
    CHECK(eval1("sin(x) + cos(y)", s, {0.3, 0.7}) == doctest::Approx(std::sin(0.3) + std::cos(0.7)).epsilon(1e-15));
    CHECK(eval1("exp(tanh(x))", s, {0.4, 0}) == doctest::Approx(std::exp(std::tanh(0.4))).epsilon(1e-15));
    CHECK(eval1("sqrt(abs(y))", s, {0, -9}) == 3.0);
    CHECK(eval1("x*y - y/x", s, {2, 3}) == 4.5);
}

TEST_CASE("parse errors carry offsets") {
    try {
        Expression::parse("1 + * 2", {});
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 4);
    }
    CHECK_THROWS_AS(Expression::parse("foo(1)", {}), ParseError);
    CHECK_THROWS_AS(Expression::parse("z + 1", {"x"}), ParseError);
    CHECK_THROWS_AS(Expression::parse("(1 + 2", {}), ParseError);
    CHECK_THROWS_AS(Expression::parse("", {}), ParseError);
    CHECK_THROWS_AS(Expression::parse("1 2", {}), ParseError);
}

TEST_CASE("domain errors during evaluation") {
    CHECK_THROWS_AS(eval1("1 / 0"), DomainError);
    CHECK_THROWS_AS(eval1("sqrt(-1)"), DomainError);
    CHECK_THROWS_AS(eval1("(-2) ^ 0.5"), DomainError);
    CHECK(eval1("(-2) ^ 3") == -8.0);
}

TEST_CASE("format_double round trips") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 2000; ++i) {
        const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
        CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("print then parse preserves structure and value") {
    std::mt19937_64 rng(42);
    const std::vector<std::string> syms{"x", "y"};
    for (int i = 0; i < 300; ++i) {
        Expression e;
        e.set_symbols(syms);
        e.set_root(grow(e, rng, 5));
        const Expression back = Expression::parse(e.print(), syms);
        CHECK(back.same_structure(e));
        const std::vector<double> v{0.37, 1.21};
        double a = 0, b = 0;
        bool ea = false, eb = false;
        try { a = e.evaluate(v); } catch (const DomainError&) { ea = true; }
        try { b = back.evaluate(v); } catch (const DomainError&) { eb = true; }
        CHECK(ea == eb);
        if (!ea && std::isfinite(a)) CHECK(a == b);
    }
}

TEST_CASE("expression vector field") {
    const auto f = VectorField::from_expressions({"x", "y"}, {"a*x - y*t", "x^2 + b"}, {{"a", 2.0}, {"b", -1.0}});
    CHECK(f.dimension() == 2);
    State dx(2);
    f.eval(0.5, State{1.0, 3.0}, dx);
    CHECK(dx[0] == doctest::Approx(0.5));
    CHECK(dx[1] == doctest::Approx(0.0));

    // finite-difference Jacobian against the hand derivative at t = 0
    const auto j = f.jacobian(State{1.5, -2.0});
    CHECK(j(0, 0) == doctest::Approx(2.0).epsilon(1e-7));
    CHECK(j(0, 1) == doctest::Approx(0.0).epsilon(1e-7));
    CHECK(j(1, 0) == doctest::Approx(3.0).epsilon(1e-7));

    const auto g = f.with_param("a", 5.0);
    CHECK(g.param("a") == 5.0);
    CHECK(f.param("a") == 2.0);
    CHECK_THROWS_AS(f.param("nope"), DomainError);
    CHECK_THROWS_AS(VectorField::from_expressions({"x"}, {"x", "x"}, {}), DomainError);
}

TEST_CASE("analytic Jacobian strings") {
    const auto f = VectorField::from_expressions({"x"}, {"-x^3"}, {}, {"-3*x^2"});
    CHECK(f.has_analytic_jacobian());
    CHECK(f.jacobian(State{2.0})(0, 0) == -12.0);
}

TEST_CASE("registry models match their formulas") {
    const auto m = registry_get("allee", {{"r", 0.3}, {"L", 0.25}});
    for (double x : {0.1, 0.5, 0.9, 1.4}) {
        const double want = 0.3 * x * (1.0 - x) * (x / 0.25 - 1.0);
        CHECK(m.field.eval(State{x})[0] == doctest::Approx(want).epsilon(1e-14));
    }
    CHECK(m.attractor.is_single_point());
    CHECK(m.attractor.single_point()[0] == 1.0);

    for (const auto& name : registry_names()) {
        CAPTURE(name);
        const auto e = registry_get(name);
        const auto eqs = e.field.documented_equilibria();
        for (const auto& q : eqs) {
            const auto v = e.field.eval(q);
            for (double c : v) CHECK(std::fabs(c) < 1e-9);
        }
        if (e.field.has_analytic_jacobian() && name != "flower") {
            State x(e.field.dimension(), 0.37);
            const auto ja = e.field.jacobian(x), jf = e.field.fd_jacobian(x);
            CHECK((ja - jf).norm() < 1e-5 * (1.0 + ja.norm()));
        }
    }
}

TEST_CASE("registry rejects bad names and parameters") {
    CHECK_THROWS_AS(registry_get("no_such_model"), DomainError);
    CHECK_THROWS_AS(registry_get("allee", {{"L", 2.0}}), DomainError);
    CHECK_THROWS_AS(registry_get("logistic", {{"r", -1.0}}), DomainError);
    CHECK_THROWS_AS(registry_get("allee", {{"q", 1.0}}), DomainError);
}

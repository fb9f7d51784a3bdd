#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "plab/expr.hpp"

#include <cmath>

using namespace plab;

TEST_CASE("general grammar evaluates standard forms") {
    auto e = parse_expression("v^3 + sin(t)*(1 - 2*v^2)*exp(-v^2)");
    const double t = 0.7, v = 1.3;
    const double expect = v * v * v + std::sin(t) * (1.0 - 2.0 * v * v) * std::exp(-v * v);
    CHECK(e->eval(t, v) == doctest::Approx(expect).epsilon(1e-14));

    CHECK(parse_expression("2 + sin(t)/2")->eval(M_PI / 2.0) == doctest::Approx(2.5));
    CHECK(parse_expression("-v^2")->eval(0.0, 3.0) == doctest::Approx(-9.0));
    CHECK(parse_expression("pi")->eval(0.0) == doctest::Approx(M_PI));
    CHECK(parse_expression("2^3^2")->eval(0.0) == doctest::Approx(512.0)); // right assoc
    CHECK(parse_expression("sqrt(abs(t))")->eval(-4.0) == doctest::Approx(2.0));
}

TEST_CASE("general grammar rejects malformed input") {
    CHECK_THROWS_AS(parse_expression("v +"), ExprError);
    CHECK_THROWS_AS(parse_expression("sin t"), ExprError);
    CHECK_THROWS_AS(parse_expression("2 * * 3"), ExprError);
    CHECK_THROWS_AS(parse_expression("foo(3)"), ExprError);
    CHECK_THROWS_AS(parse_expression("(1 + 2"), ExprError);
}

TEST_CASE("decay grammar leaves") {
    CHECK(parse_decay_expression("const(2.5)")->eval(123.0) == doctest::Approx(2.5));
    CHECK(parse_decay_expression("poly(1,0,1)")->eval(3.0) == doctest::Approx(10.0));
    // exp(a) means e^{a t}
    CHECK(parse_decay_expression("exp(-1)")->eval(2.0) == doctest::Approx(std::exp(-2.0)));
    CHECK(parse_decay_expression("sin + const(2)")->eval(M_PI / 2.0) == doctest::Approx(3.0));
    CHECK(parse_decay_expression("abs")->eval(-7.0) == doctest::Approx(7.0));
    CHECK(parse_decay_expression("sqrt(poly(0,0,1))")->eval(5.0) == doctest::Approx(5.0));
    CHECK(parse_decay_expression("2 * cos + const(3)")->eval(0.0) == doctest::Approx(5.0));
}

TEST_CASE("decay grammar stays restricted") {
    CHECK_THROWS_AS(parse_decay_expression("t"), ExprError);        // no bare variable
    CHECK_THROWS_AS(parse_decay_expression("exp(t)"), ExprError);   // exp takes a rate
    CHECK_THROWS_AS(parse_decay_expression("1 - 2"), ExprError);    // no subtraction
    CHECK_THROWS_AS(parse_decay_expression("poly()"), ExprError);
}

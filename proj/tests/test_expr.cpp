#include "branchode/expr.hpp"
#include "branchode/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

using namespace branchode;

namespace {

// central finite difference along one axis
double fd(const ExprPtr& e, std::vector<double> point, int axis, double h = 1e-6) {
    point[static_cast<std::size_t>(axis)] += h;
    const double plus = evaluate(e, point);
    point[static_cast<std::size_t>(axis)] -= 2.0 * h;
    const double minus = evaluate(e, point);
    return (plus - minus) / (2.0 * h);
}

} // namespace

TEST_CASE("evaluate basic expressions") {
    CHECK(evaluate(powi(variable(0), 2), {3.0}) == 9.0);
    CHECK(evaluate(cos_(variable(0)), {0.0}) == 1.0);
    const ExprPtr f = div(add(variable(1), variable(0)), sub(variable(1), variable(0)));
    CHECK(evaluate(f, {0.0, 1.0}) == 1.0);
}

TEST_CASE("evaluate covers every node kind") {
    const ExprPtr x = variable(0);
    CHECK(evaluate(constant(2.5), {0.0}) == 2.5);
    CHECK(evaluate(neg(x), {3.0}) == -3.0);
    CHECK(evaluate(sin_(x), {1.0}) == doctest::Approx(std::sin(1.0)));
    CHECK(evaluate(exp_(x), {1.0}) == doctest::Approx(std::exp(1.0)));
    CHECK(evaluate(log_(x), {2.0}) == doctest::Approx(std::log(2.0)));
    CHECK(evaluate(sqrt_(x), {4.0}) == 2.0);
    CHECK(evaluate(atan_(x), {1.0}) == doctest::Approx(std::atan(1.0)));
    CHECK(evaluate(tanh_(x), {0.5}) == doctest::Approx(std::tanh(0.5)));
    CHECK(evaluate(add(x, constant(1.0)), {2.0}) == 3.0);
    CHECK(evaluate(sub(x, constant(1.0)), {2.0}) == 1.0);
    CHECK(evaluate(mul(x, x), {3.0}) == 9.0);
    CHECK(evaluate(powi(x, -2), {2.0}) == 0.25);
}

TEST_CASE("singular evaluations throw") {
    CHECK_THROWS_AS(evaluate(div(constant(1.0), variable(0)), {0.0}), SingularEvaluation);
    CHECK_THROWS_AS(evaluate(log_(variable(0)), {-1.0}), SingularEvaluation);
    CHECK_THROWS_AS(evaluate(sqrt_(variable(0)), {-1.0}), SingularEvaluation);
    CHECK_THROWS_AS(evaluate(powi(variable(0), -1), {0.0}), SingularEvaluation);
}

TEST_CASE("derivative of y^2 is 2y") {
    const ExprPtr d = differentiate(powi(variable(0), 2), 0);
    for (double y : {-2.0, 0.0, 0.5, 3.0}) CHECK(evaluate(d, {y}) == doctest::Approx(2.0 * y));
}

TEST_CASE("derivative of a constant is the zero constant") {
    const ExprPtr d = differentiate(constant(1.0), 0);
    REQUIRE(d->kind == ExprKind::Constant);
    CHECK(d->value == 0.0);
    // differentiating the folded zero stays zero
    const ExprPtr dd = differentiate(d, 0);
    REQUIRE(dd->kind == ExprKind::Constant);
    CHECK(dd->value == 0.0);
}

TEST_CASE("rational derivative matches finite differences at random points") {
    const ExprPtr f = div(add(variable(1), variable(0)), sub(variable(1), variable(0)));
    const ExprPtr d0 = differentiate(f, 0);
    const ExprPtr d1 = differentiate(f, 1);
    CHECK(evaluate(d1, {0.0, 1.0}) == doctest::Approx(0.0).epsilon(1e-12));

    Rng rng(2024);
    int tested = 0;
    while (tested < 10) {
        const double t = rng.uniform() - 0.5;
        const double y = 1.0 + rng.uniform();
        if (std::fabs(y - t) < 0.3) continue; // keep clear of the pole
        ++tested;
        CHECK(evaluate(d0, {t, y}) == doctest::Approx(fd(f, {t, y}, 0)).epsilon(1e-5));
        CHECK(evaluate(d1, {t, y}) == doctest::Approx(fd(f, {t, y}, 1)).epsilon(1e-5));
    }
}

TEST_CASE("every node kind differentiates consistently with finite differences") {
    const ExprPtr x = variable(0);
    const ExprPtr y = variable(1);
    const std::vector<ExprPtr> exprs = {
        neg(mul(x, y)),     sin_(mul(x, y)), cos_(add(x, y)), exp_(mul(constant(0.5), x)),
        log_(add(constant(2.0), mul(x, x))), sqrt_(add(constant(1.0), mul(y, y))),
        atan_(sub(x, y)),   tanh_(mul(x, y)), add(powi(x, 3), y), sub(x, powi(y, 2)),
        mul(sin_(x), cos_(y)), div(x, add(constant(2.0), y)), powi(add(x, y), 4),
        powi(add(constant(2.0), x), -3),
    };
    Rng rng(99);
    for (const ExprPtr& e : exprs) {
        for (int axis = 0; axis < 2; ++axis) {
            const ExprPtr d = differentiate(e, axis);
            for (int rep = 0; rep < 100; ++rep) {
                const std::vector<double> p = {rng.uniform() * 1.6 - 0.8,
                                               rng.uniform() * 1.6 - 0.8};
                const double v = evaluate(d, p);
                const double approx = fd(e, p, axis);
                CHECK(std::fabs(v - approx) <= 1e-5 * (1.0 + std::fabs(v)));
            }
        }
    }
}

TEST_CASE("simplification keeps trivial structures flat") {
    const ExprPtr x = variable(0);
    CHECK(mul(x, constant(0.0))->kind == ExprKind::Constant);
    CHECK(mul(x, constant(1.0)).get() == x.get());
    CHECK(add(x, constant(0.0)).get() == x.get());
    CHECK(sub(x, constant(0.0)).get() == x.get());
    CHECK(powi(x, 1).get() == x.get());
    CHECK(powi(x, 0)->kind == ExprKind::Constant);
    CHECK(evaluate(add(constant(2.0), constant(3.0)), {}) == 5.0);
}

TEST_CASE("max_axis scans the whole tree") {
    CHECK(max_axis(constant(1.0)) == -1);
    CHECK(max_axis(variable(3)) == 3);
    CHECK(max_axis(add(variable(0), mul(variable(2), variable(1)))) == 2);
}

TEST_CASE("parser handles the config grammar") {
    CHECK(evaluate(parse_expression("y0^2"), {3.0}) == 9.0);
    CHECK(evaluate(parse_expression("(y+t)/(y-t)"), {0.0, 1.0}) == 1.0);
    CHECK(evaluate(parse_expression("t*y + y^2"), {2.0, 3.0}) == 15.0);
    CHECK(evaluate(parse_expression("cos(y0)"), {0.0}) == 1.0);
    CHECK(evaluate(parse_expression("-y0 + 2"), {1.5}) == 0.5);
    CHECK(evaluate(parse_expression("sqrt(y0^2 + y1^2)"), {3.0, 4.0}) == 5.0);
    CHECK(evaluate(parse_expression("exp(log(y0))"), {2.5}) == doctest::Approx(2.5));
    CHECK(evaluate(parse_expression("1 - 2 - 3"), {}) == -4.0); // left associative
    CHECK(evaluate(parse_expression("2*3^2"), {}) == 18.0);     // power binds tighter
    CHECK_THROWS_AS(parse_expression("y0^y0"), std::invalid_argument);
    CHECK_THROWS_AS(parse_expression("bogus(y0)"), std::invalid_argument);
    CHECK_THROWS_AS(parse_expression("y0 +"), std::invalid_argument);
}

TEST_CASE("make_system validates shapes") {
    CHECK_THROWS_AS(make_system({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(make_system({variable(0)}, {1.0, 2.0}), std::invalid_argument);
    // component referencing axis 1 in a 1-dimensional system
    CHECK_THROWS_AS(make_system({variable(1)}, {1.0}), std::invalid_argument);
    const RhsSystem sys = make_system({variable(0)}, {1.0}, 0.5);
    CHECK(sys.dim == 1);
    CHECK(sys.t0 == 0.5);
}

TEST_CASE("to_string renders readable infix") {
    const std::string s = to_string(div(add(variable(1), variable(0)),
                                        sub(variable(1), variable(0))));
    CHECK(s.find("y1") != std::string::npos);
    CHECK(s.find('/') != std::string::npos);
}

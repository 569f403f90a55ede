#include "branchode/codes.hpp"
#include "branchode/rk4.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

using namespace branchode;

namespace {

RhsSystem quadratic_sys() { return make_system({powi(variable(0), 2)}, {1.0}); }

} // namespace

TEST_CASE("code_value on identities and derivatives of y^2") {
    const RhsSystem sys = quadratic_sys();
    CodeValueCache cache;
    CHECK(code_value(Code::make_identity(0), sys, cache) == 1.0);
    CHECK(code_value(Code::rhs(0, 1), sys, cache) == 1.0);        // f(1) = 1
    CHECK(code_value(Code::derivative(0, {1}), sys, cache) == 2.0); // f'(1) = 2
    CHECK(code_value(Code::derivative(0, {2}), sys, cache) == 2.0); // f'' = 2
    CHECK(code_value(Code::derivative(0, {3}), sys, cache) == 0.0);
}

TEST_CASE("memoized code values equal fresh recomputation bit for bit") {
    const RhsSystem sys =
        make_system({div(add(variable(1), variable(0)), sub(variable(1), variable(0))),
                     cos_(mul(variable(0), variable(1)))},
                    {0.2, 1.3});
    CodeValueCache warm;
    std::vector<Code> codes;
    for (int i = 0; i < 2; ++i)
        for (int a = 0; a <= 3; ++a)
            for (int b = 0; b + a <= 3; ++b) codes.push_back(Code::derivative(i, {a, b}));
    std::vector<double> first;
    for (const Code& c : codes) first.push_back(code_value(c, sys, warm));
    // second pass hits the memo; a fresh cache recomputes from scratch
    for (std::size_t k = 0; k < codes.size(); ++k) {
        CodeValueCache cold;
        CHECK(code_value(codes[k], sys, warm) == first[k]);
        CHECK(code_value(codes[k], sys, cold) == first[k]);
    }
}

TEST_CASE("derivative order cap is an error, not truncation") {
    const RhsSystem sys = quadratic_sys();
    CodeValueCache cache;
    CHECK_THROWS_AS(code_value(Code::derivative(0, {kMaxDerivativeOrder + 1}), sys, cache),
                    std::runtime_error);
}

TEST_CASE("taylor-table route agrees with the symbolic derivative") {
    // rational autonomized system: high orders on the state axis
    const RhsSystem sys = autonomize(
        parse_expression("(y+t)/(y-t)"), 1.0, 0.0);
    CodeValueCache cache;
    for (int order = 7; order <= 9; ++order) {
        for (int i = 0; i <= order; ++i) {
            const Code c = Code::derivative(1, {order - i, i});
            const double via_value = code_value(c, sys, cache);
            const double via_expr =
                evaluate(cache.expr(c, sys), {sys.y0[0], sys.y0[1]});
            CHECK(via_value == doctest::Approx(via_expr).epsilon(1e-9));
        }
    }
}

TEST_CASE("autonomous d=1 mechanism table") {
    const MechanismTable t = MechanismTable::autonomous(1);
    const Code id = Code::make_identity(0);
    const Code f = Code::rhs(0, 1);

    REQUIRE(t.branch_count(id) == 1);
    const Branch bid = t.branch_at(id, 0);
    REQUIRE(bid.codes.size() == 1);
    CHECK(bid.codes[0] == f);

    REQUIRE(t.branch_count(f) == 1);
    const Branch bf = t.branch_at(f, 0);
    REQUIRE(bf.codes.size() == 2);
    CHECK(bf.codes[0] == f);
    CHECK(bf.codes[1] == Code::derivative(0, {1}));
}

TEST_CASE("autonomous d=2 mechanism splits uniformly over axes") {
    const MechanismTable t = MechanismTable::autonomous(2);
    const Code g = Code::derivative(1, {0, 1});
    const auto bs = t.branches(g);
    REQUIRE(bs.size() == 2);
    double total = 0.0;
    for (int j = 0; j < 2; ++j) {
        CHECK(bs[static_cast<std::size_t>(j)].second == 0.5);
        total += bs[static_cast<std::size_t>(j)].second;
        const Branch& b = bs[static_cast<std::size_t>(j)].first;
        REQUIRE(b.codes.size() == 2);
        CHECK(b.codes[0] == Code::rhs(j, 2));  // plain factor f_j first
        CHECK(b.codes[1] == g.bumped(j));      // derivative continuation second
    }
    CHECK(total == 1.0);
}

TEST_CASE("single-tree mechanism") {
    const MechanismTable t = MechanismTable::single_tree();
    const Code id = Code::make_identity(1);
    REQUIRE(t.branch_count(id) == 1);
    CHECK(t.branch_at(id, 0).codes == std::vector<Code>{Code::rhs(1, 2)});

    const Code g = Code::rhs(1, 2);
    const auto bs = t.branches(g);
    REQUIRE(bs.size() == 2);
    CHECK(bs[0].second == 0.5);
    CHECK(bs[0].first.codes == std::vector<Code>{g.bumped(0)});
    REQUIRE(bs[1].first.codes.size() == 2);
    CHECK(bs[1].first.codes[0] == Code::rhs(1, 2));
    CHECK(bs[1].first.codes[1] == g.bumped(1));

    // the time coordinate is not part of the single-tree code set
    CHECK_THROWS_AS(t.branches(Code::make_identity(0)), MechanismUndefined);
    CHECK_THROWS_AS(t.branches(Code::rhs(0, 2)), MechanismUndefined);
}

TEST_CASE("custom mechanism and the undefined-code error") {
    const Code id = Code::make_identity(0);
    std::map<Code, std::vector<Branch>> table;
    table[id] = {Branch{{id}}}; // the self-renewing identity rule
    const MechanismTable t = MechanismTable::custom(1, table);
    REQUIRE(t.branch_count(id) == 1);
    CHECK(t.branch_at(id, 0).codes == std::vector<Code>{id});
    CHECK_THROWS_AS(t.branches(Code::rhs(0, 1)), MechanismUndefined);
}

TEST_CASE("branch probabilities are uniform, positive, and sum to 1") {
    for (int d : {1, 2, 3}) {
        const MechanismTable t = MechanismTable::autonomous(d);
        std::vector<Code> probes = {Code::make_identity(0), Code::rhs(d - 1, d)};
        probes.push_back(Code::derivative(0, std::vector<int>(static_cast<std::size_t>(d), 1)));
        for (const Code& c : probes) {
            const auto bs = t.branches(c);
            double total = 0.0;
            for (const auto& [branch, q] : bs) {
                CHECK(q > 0.0);
                total += q;
                // closure: children are valid codes of the same dimension
                for (const Code& child : branch.codes) {
                    CHECK(child.component < d);
                    if (!child.identity)
                        CHECK(static_cast<int>(child.multi.size()) == d);
                }
            }
            CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
            if (c.identity) {
                CHECK(bs.size() == 1);
                CHECK(bs[0].first.codes.size() == 1);
            } else {
                CHECK(static_cast<int>(bs.size()) == d);
                for (const auto& [branch, q] : bs) CHECK(branch.codes.size() == 2);
            }
        }
    }
}

TEST_CASE("derivative branches bump exactly one axis of the parent") {
    const MechanismTable t = MechanismTable::autonomous(3);
    const Code g = Code::derivative(2, {1, 0, 2});
    const auto bs = t.branches(g);
    for (std::size_t j = 0; j < bs.size(); ++j) {
        const Code& child = bs[j].first.codes[1];
        CHECK(child.component == g.component);
        int bumps = 0;
        for (std::size_t ax = 0; ax < 3; ++ax) {
            const int diff = child.multi[ax] - g.multi[ax];
            CHECK(diff >= 0);
            bumps += diff;
        }
        CHECK(bumps == 1);
        CHECK(child.multi[j] == g.multi[j] + 1);
    }
}

TEST_CASE("autonomize builds the (1, f) system") {
    const RhsSystem sys = autonomize(parse_expression("t*y + y^2"), 0.5, 0.0);
    REQUIRE(sys.dim == 2);
    CHECK(sys.y0 == std::vector<double>{0.0, 0.5});
    CHECK(sys.t0 == 0.0);
    CHECK(evaluate(sys.components[0], {7.0, 9.0}) == 1.0);
    CHECK(evaluate(sys.components[1], {2.0, 3.0}) == 15.0);

    const RhsSystem drift = autonomize(constant(4.0), 2.0, 1.0);
    CHECK(drift.y0 == std::vector<double>{1.0, 2.0});
    CHECK(evaluate(drift.components[1], {0.0, 0.0}) == 4.0);

    const RhsSystem r201a = autonomize(parse_expression("(y+t)/(y-t)"), 1.0);
    CHECK(evaluate(r201a.components[1], {0.0, 1.0}) == 1.0);
}

TEST_CASE("autonomize then mechanism exposes f_1 = 1 in the first branch") {
    const RhsSystem sys = autonomize(parse_expression("t*y + y^2"), 0.5, 0.0);
    const MechanismTable t = MechanismTable::autonomous(2);
    const auto bs = t.branches(Code::rhs(1, 2));
    CodeValueCache cache;
    // the axis-0 branch carries the constant-1 time component as its factor
    CHECK(code_value(bs[0].first.codes[0], sys, cache) == 1.0);
}

TEST_CASE("reduce_higher_order on y'' = -y gives the sine system") {
    const RhsSystem sys = reduce_higher_order(neg(variable(1)), 2, {0.0, 1.0}, 0.0);
    REQUIRE(sys.dim == 3);
    CHECK(sys.y0 == std::vector<double>{0.0, 0.0, 1.0});
    CHECK(evaluate(sys.components[0], {0.0, 0.0, 0.0}) == 1.0);
    CHECK(evaluate(sys.components[1], {0.0, 2.0, 5.0}) == 5.0);  // y' = y_2
    CHECK(evaluate(sys.components[2], {0.0, 2.0, 5.0}) == -2.0); // y'' = -y_1

    // flow reproduces sin t
    const std::vector<double> y = rk4_solve(sys, 1.2, 1e-4);
    CHECK(y[1] == doctest::Approx(std::sin(1.2)).epsilon(1e-9));
    CHECK(y[2] == doctest::Approx(std::cos(1.2)).epsilon(1e-9));
}

TEST_CASE("reduce_higher_order with n=1 coincides with autonomize") {
    const ExprPtr f = parse_expression("t*y + y^2");
    const RhsSystem a = autonomize(f, 0.5, 0.25);
    const RhsSystem b = reduce_higher_order(f, 1, {0.5}, 0.25);
    REQUIRE(b.dim == a.dim);
    CHECK(b.y0 == a.y0);
    CHECK(b.t0 == a.t0);
    for (int i = 0; i < a.dim; ++i)
        CHECK(evaluate(b.components[static_cast<std::size_t>(i)], {0.3, 0.7}) ==
              evaluate(a.components[static_cast<std::size_t>(i)], {0.3, 0.7}));
}

TEST_CASE("reduce_higher_order on y'' = 0 gives linear drift") {
    const double a = 2.0, b = 3.0;
    const RhsSystem sys = reduce_higher_order(constant(0.0), 2, {a, b}, 0.0);
    const std::vector<double> y = rk4_solve(sys, 1.5, 1e-3);
    CHECK(y[1] == doctest::Approx(a + b * 1.5).epsilon(1e-12));
}

TEST_CASE("initial_bound_K probes the reachable code set") {
    CHECK(initial_bound_K(quadratic_sys(), MechanismTable::autonomous(1), 3) == 2.0);
    CHECK(initial_bound_K(quadratic_sys(), MechanismTable::autonomous(1), 8) == 2.0);
    const RhsSystem cosine = make_system({cos_(variable(0))}, {1.0});
    CHECK(initial_bound_K(cosine, MechanismTable::autonomous(1), 6) == 1.0);
    const RhsSystem zero = make_system({constant(0.0)}, {0.0});
    CHECK(initial_bound_K(zero, MechanismTable::autonomous(1), 4) == 0.0);
}

#include "branchode/problems.hpp"

#include "branchode/quadrature.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace branchode {

namespace {

// y' = y with the self-renewing identity rule: Id -> (Id). The sampled chain
// telescopes, so every sample reproduces y0*e^t outright.
Problem make_exponential() {
    Problem p;
    p.name = "exponential";
    p.description = "y' = y via the self-renewing identity rule; every sample is exact";
    p.sys = make_system({variable(0)}, {1.0});
    const Code id0 = Code::make_identity(0);
    p.table = MechanismTable::custom(1, {{id0, {Branch{{id0}}}}});
    p.density = LifetimeDensity::exponential(1.0);
    p.t_lo = 0.0;
    p.t_hi = 2.0;
    p.n_patches = 1;
    p.grid_per_patch = 8;
    p.default_samples = 10'000;
    p.gate = GateKind::Deterministic;
    p.gate_multiple = 0.0;
    p.exact = [](double t) { return std::vector<double>{std::exp(t)}; };
    return p;
}

Problem make_quadratic() {
    Problem p;
    p.name = "quadratic";
    p.description = "y' = y^2, y(0) = 1; solution 1/(1-t) blows up at t = 1";
    p.sys = make_system({powi(variable(0), 2)}, {1.0});
    p.table = MechanismTable::autonomous(1);
    p.t_lo = 0.0;
    p.t_hi = 0.45;
    p.grid_per_patch = 9;
    p.gate = GateKind::SigmaMean;
    p.gate_multiple = 4.0;
    p.exact = [](double t) { return std::vector<double>{1.0 / (1.0 - t)}; };
    return p;
}

Problem make_cosine() {
    Problem p;
    p.name = "cosine";
    p.description = "y' = cos y, y(0) = 1";
    p.sys = make_system({cos_(variable(0))}, {1.0});
    p.table = MechanismTable::autonomous(1);
    p.t_lo = 0.0;
    p.t_hi = 0.9;
    p.grid_per_patch = 9;
    p.gate = GateKind::SigmaMean;
    p.gate_multiple = 4.0;
    p.exact = [](double t) {
        return std::vector<double>{2.0 * std::atan(std::tanh((t + 2.0 * std::atanh(std::tan(0.5))) / 2.0))};
    };
    return p;
}

// scalar time-dependent problems become the 2-dimensional system (1, f)
// with state (t, y); component 0 of the exact solution is time itself
Problem make_ode201a() {
    Problem p;
    p.name = "ode201a";
    p.description = "y' = (y+t)/(y-t), y(0) = 1, as an autonomized 2D system";
    const ExprPtr t = variable(0);
    const ExprPtr y = variable(1);
    p.sys = autonomize(div(add(y, t), sub(y, t)), 1.0);
    p.table = MechanismTable::autonomous(2);
    p.t_lo = 0.0;
    p.t_hi = 0.5;
    p.grid_per_patch = 10;
    p.has_single_tree_route = true;
    p.gate = GateKind::None; // the window runs past the certified horizon
    p.exact = [](double t) {
        return std::vector<double>{t, t + std::sqrt(1.0 + 2.0 * t * t)};
    };
    return p;
}

Problem make_ode316e() {
    Problem p;
    p.name = "ode316e";
    p.description = "y' = (y-t)/(y+t), y(0) = 1; solution known in parametric form";
    const ExprPtr t = variable(0);
    const ExprPtr y = variable(1);
    p.sys = autonomize(div(sub(y, t), add(y, t)), 1.0);
    p.table = MechanismTable::autonomous(2);
    p.density = LifetimeDensity::gamma_half();
    p.t_lo = 0.0;
    p.t_hi = 0.5;
    p.grid_per_patch = 10;
    p.has_single_tree_route = true;
    p.gate = GateKind::None;
    // (t, y) = (u sin log u, u cos log u); invert the strictly increasing
    // time coordinate on u in [1, 4], which covers t up to well past 0.5
    p.exact = [](double t) {
        const double u = bisect([t](double v) { return v * std::sin(std::log(v)) - t; }, 1.0, 4.0);
        return std::vector<double>{t, u * std::cos(std::log(u))};
    };
    return p;
}

Problem make_ode223a() {
    Problem p;
    p.name = "ode223a";
    p.description = "y' = t*y + y^2, y(0) = 1/2, patched halfway across [0, 1]";
    const ExprPtr t = variable(0);
    const ExprPtr y = variable(1);
    p.sys = autonomize(add(mul(t, y), powi(y, 2)), 0.5);
    p.table = MechanismTable::autonomous(2);
    p.density = LifetimeDensity::gamma_half();
    p.t_lo = 0.0;
    p.t_hi = 1.0;
    p.n_patches = 2;
    p.grid_per_patch = 5;
    p.has_single_tree_route = true;
    p.gate = GateKind::SigmaAccumulated;
    p.gate_multiple = 5.0;
    p.exact = [](double t) {
        const double integral =
            integrate([](double s) { return std::exp(0.5 * s * s); }, 0.0, t);
        return std::vector<double>{t, std::exp(0.5 * t * t) / (2.0 - integral)};
    };
    return p;
}

Problem make_system316f() {
    Problem p;
    p.name = "system316f";
    p.description = "2D system with radial coupling; solution (t sin log t, t cos log t)";
    const ExprPtr y0 = variable(0);
    const ExprPtr y1 = variable(1);
    const ExprPtr radius = sqrt_(add(powi(y0, 2), powi(y1, 2)));
    p.sys = make_system({div(add(y1, y0), radius), div(sub(y1, y0), radius)},
                        {0.0, 1.0}, 1.0);
    p.table = MechanismTable::autonomous(2);
    p.t_lo = 1.0;
    p.t_hi = 4.0;
    p.n_patches = 6;
    p.grid_per_patch = 1;
    p.gate = GateKind::SigmaAccumulated;
    p.gate_multiple = 5.0;
    p.exact = [](double t) {
        return std::vector<double>{t * std::sin(std::log(t)), t * std::cos(std::log(t))};
    };
    return p;
}

} // namespace

Problem builtin_problem(const std::string& name) {
    if (name == "exponential") return make_exponential();
    if (name == "quadratic") return make_quadratic();
    if (name == "cosine") return make_cosine();
    if (name == "ode201a") return make_ode201a();
    if (name == "ode316e") return make_ode316e();
    if (name == "ode223a") return make_ode223a();
    if (name == "system316f") return make_system316f();
    throw std::invalid_argument("unknown problem: " + name);
}

const std::vector<std::string>& builtin_problem_names() {
    static const std::vector<std::string> names = {
        "exponential", "quadratic", "cosine", "ode201a",
        "ode316e",     "ode223a",   "system316f",
    };
    return names;
}

} // namespace branchode

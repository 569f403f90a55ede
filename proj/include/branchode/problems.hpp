#ifndef BRANCHODE_PROBLEMS_HPP
#define BRANCHODE_PROBLEMS_HPP

#include "branchode/estimator.hpp"

#include <functional>
#include <string>
#include <vector>

namespace branchode {

// How a problem's report decides pass/fail.
enum class GateKind {
    None,          // report only: the window intentionally runs past the
                   // certified horizon, so no statistical bound applies
    Deterministic, // every sample must hit the exact value: tiny relative
                   // error and round-off-level variance
    SigmaMean,     // |mean - exact| <= multiple * std_error per grid point
    SigmaAccumulated, // same against the patch-accumulated std_error
};

// A ready-to-run configuration: system, branching rule, lifetime density,
// window, grid, sampling defaults and the reference solution.
struct Problem {
    std::string name;
    std::string description;

    RhsSystem sys;
    MechanismTable table = MechanismTable::autonomous(1); // default route
    LifetimeDensity density = LifetimeDensity::exponential(1.0);

    double t_lo = 0.0;
    double t_hi = 1.0;
    int n_patches = 1;
    int grid_per_patch = 1;
    long long default_samples = 1'000'000;
    ClipPolicy clip = ClipPolicy::on(); // figure-style runs clip outliers

    // scalar time-dependent problems also run under the single-tree rule as
    // a cross-check
    bool has_single_tree_route = false;

    GateKind gate = GateKind::None;
    double gate_multiple = 0.0;

    // exact solution of every component at absolute time t
    std::function<std::vector<double>(double)> exact;
};

// name in {exponential, quadratic, cosine, ode201a, ode316e, ode223a,
// system316f}; throws std::invalid_argument otherwise.
Problem builtin_problem(const std::string& name);

const std::vector<std::string>& builtin_problem_names();

} // namespace branchode

#endif // BRANCHODE_PROBLEMS_HPP

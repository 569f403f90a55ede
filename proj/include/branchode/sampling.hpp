#ifndef BRANCHODE_SAMPLING_HPP
#define BRANCHODE_SAMPLING_HPP

#include "branchode/codes.hpp"
#include "branchode/lifetime.hpp"
#include "branchode/rng.hpp"

#include <string>
#include <vector>

namespace branchode {

struct SampleOptions {
    LifetimeDensity density = LifetimeDensity::exponential(1.0);
    int max_depth = 10000;
    bool record_shape = false;
    bool record_trace = false;
};

enum class SampleStatus { Ok, AbortedDepth, AbortedSingular };

// One visited node, in depth-first order. branch < 0 marks a leaf
// (its lifetime exceeded the remaining horizon).
struct TraceNode {
    int depth;
    Code code;
    double tau;
    int branch;
};

// Shape signatures encode the branching structure only: one character per
// node in depth-first order, children in branch-tuple order, each character
// the node's child count ('0', '1' or '2'). "0" is the no-branch tree,
// "10" the identity-rooted chain of length 2.
using ShapeSignature = std::string;

struct TreeSample {
    double value = 0.0;            // the multiplicative functional H
    long node_count = 0;           // all particles (lifetime draws)
    long leaf_count = 0;           // particles that outlived their horizon
    int max_depth_reached = 0;
    SampleStatus status = SampleStatus::Ok;
    ShapeSignature shape;          // filled when record_shape is set
    std::vector<TraceNode> trace;  // filled when record_trace is set
};

// Samples one branching tree started from `root` with the given horizon and
// returns the product over the tree of
//   1 / (q * rho(tau))               at nodes that branch, and
//   code_value / tail(remaining)     at leaves.
// The expectation of the returned value is the ODE solution component the
// root code denotes, wherever that expectation exists. Each node consumes
// one lifetime draw plus, only when the code has several branches, one
// uniform branch draw; children are visited in branch-tuple order.
TreeSample sample_tree(const Code& root, double horizon, const RhsSystem& sys,
                       const MechanismTable& table, const SampleOptions& opts,
                       Rng& rng, CodeValueCache& cache);

// Recomputes H from a recorded trace; returns exactly the sampled value.
double replay_trace(const std::vector<TraceNode>& trace, double horizon,
                    const RhsSystem& sys, const MechanismTable& table,
                    const SampleOptions& opts, CodeValueCache& cache);

// One line per node: depth, code, tau, branch index (-1 for leaves).
std::string format_trace(const std::vector<TraceNode>& trace);

} // namespace branchode

#endif // BRANCHODE_SAMPLING_HPP

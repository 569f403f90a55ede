#ifndef BRANCHODE_BUTCHER_HPP
#define BRANCHODE_BUTCHER_HPP

#include "branchode/estimator.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace branchode {

// Rooted unordered tree in canonical form: children are kept sorted by their
// canonical encodings, so structurally equal trees compare equal member-wise
// and encode to identical strings.
struct ButcherTree {
    std::vector<ButcherTree> children;

    static ButcherTree leaf() { return {}; }
    // Sorts the children into canonical order; the children themselves must
    // already be canonical.
    static ButcherTree with_children(std::vector<ButcherTree> children);

    int order() const; // node count

    // One-line bracket form: "[]" single node, "[[][]]" the order-3 cherry.
    std::string encode() const;

    bool operator==(const ButcherTree&) const = default;
};

std::string to_string(const ButcherTree& b);

struct TreeCoefficients {
    long long sigma = 1; // order of the symmetry group
    long long gamma = 1; // tree density
    long long nu = 1;    // sigma * gamma
};

// All non-isomorphic rooted trees with 1..max_order nodes; result[k] holds
// the order-k trees (result[0] stays empty), each canonical, sorted by
// encoding. max_order must lie in [1, 8]: counts grow fast and nothing here
// needs deeper.
std::vector<std::vector<ButcherTree>> enumerate_butcher_trees(int max_order);

// sigma: product over distinct child classes of multiplicity! times
// sigma(child)^multiplicity; gamma: order times the children's gammas.
TreeCoefficients coefficients(const ButcherTree& b);

// The derivative contraction the tree indexes, evaluated at `point`: at a
// node with m subtrees, the m-th derivative tensor of f applied to the
// subtree values, summed over all d^m component assignments (plain product
// of scalar derivatives when d = 1).
std::vector<double> elementary_differential(const ButcherTree& b, const RhsSystem& sys,
                                            const std::vector<double>& point);

// y0 plus the series terms t^|B| / nu(B) * differential(B) over all trees of
// order <= max_order. A finite-order reference only: the full series need
// not converge.
std::vector<double> butcher_partial_sum(const RhsSystem& sys, double t, int max_order);

// The canonical coding-tree shape whose branching structure realizes the
// tree under the depth-first correspondence: the root's '1' is the
// deterministic Id -> f edge, and each branching's first subtree is the
// plain factor, its second the derivative continuation. Inverse direction
// accepts any shape reachable by the autonomous rule (not only canonical
// ones, several shapes can realize the same tree) and throws
// std::invalid_argument("not a coding shape") otherwise; the unbranched
// shape "0" carries the series' constant term and is rejected too.
ShapeSignature butcher_to_bin(const ButcherTree& b);
ButcherTree bin_to_butcher(const ShapeSignature& shape);

struct ShapeConditioned {
    // mean of H * 1{the sample's shape realizes B} over the used samples
    Estimate conditioned;
    // the same stream with no indicator; bit-identical to estimate_at with
    // equal (seed, chunking)
    Estimate unconditioned;
    std::map<ShapeSignature, long long> shape_counts;
};

// Monte Carlo check of the per-tree series identity
// E[H * 1{shape realizes B}] = t^|B| c(B) / nu(B). Autonomous mechanism
// only; that is the mode the correspondence is defined for.
ShapeConditioned shape_conditioned_estimate(const RhsSystem& sys, const MechanismTable& table,
                                            int component, double t, long long n_samples,
                                            const SampleOptions& opts, const ButcherTree& b,
                                            std::uint64_t seed, const ParallelOptions& par = {});

} // namespace branchode

#endif // BRANCHODE_BUTCHER_HPP

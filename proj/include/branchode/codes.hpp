#ifndef BRANCHODE_CODES_HPP
#define BRANCHODE_CODES_HPP

#include "branchode/expr.hpp"

#include <compare>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace branchode {

// A coding-tree node label: either the identity projection onto one state
// component, or a partial derivative (by multi-index) of one right-hand-side
// component, evaluated at the initial point.
struct Code {
    bool identity = false;
    int component = 0;           // which f_i (or which y_i for identities)
    std::vector<int> multi;      // per-axis derivative orders; empty for identities

    static Code make_identity(int component) {
        Code c;
        c.identity = true;
        c.component = component;
        return c;
    }

    static Code derivative(int component, std::vector<int> multi) {
        Code c;
        c.component = component;
        c.multi = std::move(multi);
        return c;
    }

    // Derivative of f_i itself (all-zero multi-index).
    static Code rhs(int component, int dim) {
        return derivative(component, std::vector<int>(static_cast<std::size_t>(dim), 0));
    }

    int total_order() const {
        int sum = 0;
        for (int k : multi) sum += k;
        return sum;
    }

    // The code for one more derivative along `axis`.
    Code bumped(int axis) const {
        Code c = *this;
        c.multi[static_cast<std::size_t>(axis)] += 1;
        return c;
    }

    auto operator<=>(const Code&) const = default;
    bool operator==(const Code&) const = default;
};

std::string to_string(const Code& c);

// One branch of the mechanism: the codes the particle splits into.
// Tuple order matters: for 2-tuples the first entry is the plain
// right-hand-side factor and the second carries the extra derivative; the
// shape encoding and the Butcher correspondence both rely on this order.
struct Branch {
    std::vector<Code> codes; // length 1 or 2
};

enum class MechanismMode { Autonomous, SingleTree, Custom };

struct MechanismUndefined : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The branching rule: which code tuples a code can split into. All listed
// branches of a code are equally likely (q = 1/branch_count); the sampler can
// therefore pick one with a single uniform draw. Immutable after
// construction and safe to share across threads.
class MechanismTable {
public:
    // For y' = f(y): identity codes split into (f_i); a derivative code g
    // splits into (f_j, d_j g) for each axis j, uniformly.
    static MechanismTable autonomous(int dim);

    // For an autonomized scalar problem (axis 0 = time, component 1 = state):
    // Id splits into (f_1); a derivative code g splits into either (d_0 g)
    // alone or (f_1, d_1 g), each with probability 1/2. Avoids the
    // two-tree cost of running the autonomous rule in dimension 2.
    static MechanismTable single_tree();

    // Explicit map, e.g. the self-renewing identity rule used by the
    // deterministic exponential example.
    static MechanismTable custom(int dim, std::map<Code, std::vector<Branch>> table);

    MechanismMode mode() const { return mode_; }
    int dim() const { return dim_; }

    int branch_count(const Code& c) const;
    Branch branch_at(const Code& c, int index) const;

    // All branches with their probabilities; probabilities are uniform and
    // sum to 1.
    std::vector<std::pair<Branch, double>> branches(const Code& c) const;

private:
    MechanismMode mode_ = MechanismMode::Autonomous;
    int dim_ = 0;
    std::map<Code, std::vector<Branch>> custom_;
};

// Total derivative order allowed per code. Reaching it means the run is far
// outside any sensible horizon; failing loudly beats unbounded symbolic
// differentiation.
inline constexpr int kMaxDerivativeOrder = 64;

// Per-run memo of the derivative expressions and their values at (t0, y0).
// One instance per worker thread (replication instead of locking); reset
// whenever (t0, y0) changes, i.e. at every patch boundary.
//
// Values come from the symbolic derivative for moderate orders. Beyond
// that the symbolic form of a rational right-hand side grows exponentially,
// so for systems of dimension <= 2 built from arithmetic node kinds the
// value is read from a truncated Taylor table of the component instead.
// Both routes are deterministic in (code, system), so independent cache
// instances always agree bit for bit.
class CodeValueCache {
public:
    void clear() {
        values_.clear();
        exprs_.clear();
        series_.clear();
    }
    std::size_t size() const { return values_.size(); }

    double value(const Code& c, const RhsSystem& sys);

    // The symbolic derivative, built once per distinct code. Unlike value(),
    // always symbolic whatever the order (subject to the cap).
    ExprPtr expr(const Code& c, const RhsSystem& sys);

    struct SeriesTable; // internal Taylor-coefficient store, defined in codes.cpp

private:
    const SeriesTable& series_for(int component, int degree, const RhsSystem& sys);

    std::map<Code, double> values_;
    std::map<Code, ExprPtr> exprs_;
    std::map<int, std::shared_ptr<const SeriesTable>> series_;
};

// Value at the initial point of the function the code denotes:
// y0[i] for identities, the multi-index derivative of f_i at y0 otherwise.
double code_value(const Code& c, const RhsSystem& sys, CodeValueCache& cache);

// Rewrites y' = f(t, y) (f over axes 0 = t, 1 = y) as the 2-dimensional
// autonomous system (1, f) with state (t, y) started at (t_lo, y_init).
RhsSystem autonomize(const ExprPtr& f, double y_init, double t_lo = 0.0);

// Rewrites the order-n scalar problem y^(n) = f(t, y, y', ..., y^(n-1))
// (f over axes 0..n) as an (n+1)-dimensional first-order system with axis 0
// the time variable. n = 1 coincides with autonomize.
RhsSystem reduce_higher_order(const ExprPtr& f, int order,
                              const std::vector<double>& initial_derivatives,
                              double t_lo = 0.0);

// Max |code value| over codes reachable from the identity codes within
// probe_depth mechanism applications. A finite probe of an infinite set:
// a diagnostic, not a certified bound.
double initial_bound_K(const RhsSystem& sys, const MechanismTable& table, int probe_depth);

} // namespace branchode

#endif // BRANCHODE_CODES_HPP

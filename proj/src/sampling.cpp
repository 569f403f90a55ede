#include "branchode/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace branchode {

namespace {

struct Pending {
    Code code;
    double horizon;
    int depth;
};

} // namespace

TreeSample sample_tree(const Code& root, double horizon, const RhsSystem& sys,
                       const MechanismTable& table, const SampleOptions& opts,
                       Rng& rng, CodeValueCache& cache) {
    TreeSample out;
    out.value = 1.0;

    std::vector<Pending> stack;
    stack.push_back({root, horizon, 0});

    while (!stack.empty()) {
        Pending node = std::move(stack.back());
        stack.pop_back();

        if (node.depth > opts.max_depth) {
            out.status = SampleStatus::AbortedDepth;
            out.value = std::numeric_limits<double>::quiet_NaN();
            return out;
        }
        out.max_depth_reached = std::max(out.max_depth_reached, node.depth);
        ++out.node_count;

        double tau = sample_lifetime(opts.density, rng);

        if (tau > node.horizon) {
            double cv;
            try {
                cv = cache.value(node.code, sys);
            } catch (const SingularEvaluation&) {
                out.status = SampleStatus::AbortedSingular;
                out.value = std::numeric_limits<double>::quiet_NaN();
                return out;
            }
            out.value *= cv / tail_at(opts.density, node.horizon);
            ++out.leaf_count;
            if (opts.record_shape) out.shape += '0';
            if (opts.record_trace) out.trace.push_back({node.depth, node.code, tau, -1});
            continue;
        }

        int nb = table.branch_count(node.code);
        int index = 0;
        if (nb > 1) {
            // min() guards the measure-zero uniform() == 1 - eps edge.
            index = std::min(nb - 1, static_cast<int>(rng.uniform() * nb));
        }
        const Branch branch = table.branch_at(node.code, index);

        // 1 / (q * rho), with q = 1/nb uniform over the listed branches.
        out.value *= static_cast<double>(nb) / density_at(opts.density, tau);

        if (opts.record_shape)
            out.shape += static_cast<char>('0' + static_cast<int>(branch.codes.size()));
        if (opts.record_trace) out.trace.push_back({node.depth, node.code, tau, index});

        // Push in reverse so depth-first order visits the tuple left to right.
        for (auto it = branch.codes.rbegin(); it != branch.codes.rend(); ++it)
            stack.push_back({*it, node.horizon - tau, node.depth + 1});
    }

    return out;
}

double replay_trace(const std::vector<TraceNode>& trace, double horizon,
                    const RhsSystem& sys, const MechanismTable& table,
                    const SampleOptions& opts, CodeValueCache& cache) {
    // Remaining horizon per depth, updated as the walk descends; trace order
    // is depth-first, so the horizon at depth k is always current.
    std::vector<double> remaining{horizon};
    double value = 1.0;

    for (const TraceNode& node : trace) {
        if (node.depth < 0 || static_cast<std::size_t>(node.depth) >= remaining.size())
            throw std::invalid_argument("replay_trace: trace is not in depth-first order");
        remaining.resize(static_cast<std::size_t>(node.depth) + 1);
        double h = remaining.back();

        if (node.branch < 0) {
            value *= cache.value(node.code, sys) / tail_at(opts.density, h);
            continue;
        }
        int nb = table.branch_count(node.code);
        value *= static_cast<double>(nb) / density_at(opts.density, node.tau);
        remaining.push_back(h - node.tau);
    }
    return value;
}

std::string format_trace(const std::vector<TraceNode>& trace) {
    std::ostringstream os;
    for (const TraceNode& node : trace) {
        os << std::string(static_cast<std::size_t>(node.depth) * 2, ' ')
           << to_string(node.code) << "  tau=" << node.tau;
        if (node.branch < 0)
            os << "  leaf";
        else
            os << "  branch=" << node.branch;
        os << '\n';
    }
    return os.str();
}

} // namespace branchode

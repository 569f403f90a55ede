#ifndef BRANCHODE_RUNNER_HPP
#define BRANCHODE_RUNNER_HPP

#include "branchode/problems.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace branchode {

struct RunConfig {
    Problem problem;
    long long n_samples = 0; // 0: the problem's default
    std::uint64_t seed = 1;
    int threads = 0;         // 0: one per hardware thread
    std::string out_dir;     // empty: $BRANCHODE_OUT, then "."
};

struct Report {
    std::string problem;
    Trajectory trajectory;
    // scalar time-dependent problems are re-run under the single-tree rule
    // and cross-checked row by row
    std::optional<Trajectory> single_tree;
    ValidityReport validity;
    std::vector<std::string> warnings;
    std::vector<std::string> gate_lines;
    bool gates_ok = true;
    double wall_seconds = 0.0;
    std::string csv_path;
    std::string plot_path;
};

// Runs the configured problem, evaluates its pass/fail gate against the
// reference solution, and writes a CSV report plus a gnuplot-style plot-data
// file. Output files are byte-stable for a fixed (problem, n, seed); wall
// time is reported only on the Report, never in the files.
Report run_experiment(const RunConfig& cfg);

// shortest round-trippable decimal form (17 significant digits)
std::string format_double(double v);

} // namespace branchode

#endif // BRANCHODE_RUNNER_HPP

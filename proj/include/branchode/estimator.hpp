#ifndef BRANCHODE_ESTIMATOR_HPP
#define BRANCHODE_ESTIMATOR_HPP

#include "branchode/codes.hpp"
#include "branchode/sampling.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace branchode {

struct Estimate {
    double mean = 0.0;
    double variance = 0.0;   // sample variance (n-1 denominator)
    double std_error = 0.0;  // sqrt(variance / n_used)
    long long n_used = 0;
    long long n_aborted = 0;
    long long n_clipped = 0;
};

// Outlier rejection around the empirical (p, 100-p) percentile range widened
// by `multiplier` times its own width on each side. Off by default: clipping
// biases the estimator and is only meant for figure-style runs where a few
// heavy-tailed samples would otherwise drown the picture.
struct ClipPolicy {
    bool enabled = false;
    double percentile = 0.1; // percent trimmed from each tail, in (0, 50)
    double multiplier = 100.0;

    static ClipPolicy off() { return {}; }
    static ClipPolicy on(double percentile = 0.1, double multiplier = 100.0) {
        return {true, percentile, multiplier};
    }
};

// One-pass mean / sum-of-squared-deviations accumulator. Two accumulators
// over disjoint sample ranges combine into exactly the statistics of the
// concatenated range, up to floating round-off, whatever the split.
struct RunningMoments {
    long long n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }

    void combine(const RunningMoments& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double d = o.mean - mean;
        const long long total = n + o.n;
        mean += d * static_cast<double>(o.n) / static_cast<double>(total);
        m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n)
                         / static_cast<double>(total);
        n = total;
    }

    double variance() const {
        return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
    }
};

// Chunks are reduction granularity only: every sample index has its own RNG
// stream, so the drawn trees are identical for any chunk size or thread
// count, and only the summation order can differ (round-off level).
struct ParallelOptions {
    int threads = 0;            // 0: one per hardware thread
    long long chunk_size = 65536;
};

// Monte Carlo estimate of solution component i at absolute time t (t >=
// sys.t0; the sampling horizon is t - sys.t0). Draws n_samples trees rooted
// at Identity(i), one RNG stream per sample index derived from `seed`.
// Aborted samples are excluded and counted; with clipping enabled, samples
// outside the widened quantile range are excluded and counted separately.
// Throws when nothing remains to average.
Estimate estimate_at(const RhsSystem& sys, const MechanismTable& table, int component,
                     double t, long long n_samples, const SampleOptions& opts,
                     const ClipPolicy& clip, std::uint64_t seed,
                     const ParallelOptions& par = {});

struct TrajectoryPoint {
    double t;
    std::vector<Estimate> components;
    // per component: local std_error plus the carried uncertainty of every
    // patch restart before this point, combined in quadrature
    std::vector<double> acc_std_error;
};

struct Trajectory {
    std::vector<TrajectoryPoint> points;
    std::vector<double> patch_boundaries; // n_patches + 1 times, first = t_lo
    bool complete = true;
    std::string message; // failure reason when not complete
};

// Splits [t_lo, t_hi] into n_patches equal subintervals, each carrying
// grid_per_patch evaluation times closed on the right; the estimated state
// at a patch end (every component) becomes the initial condition of the next
// patch, so horizons never exceed the patch length. The first returned point
// is the exact initial state at t_lo. A failing patch stops the walk and
// returns the rows produced so far with complete = false.
//
// Under the single-tree mechanism only the state component is sampled; the
// time component is advanced exactly and reported with zero variance.
Trajectory patch_solve(const RhsSystem& sys, const MechanismTable& table,
                       double t_lo, double t_hi, int n_patches, int grid_per_patch,
                       long long n_samples, const SampleOptions& opts,
                       const ClipPolicy& clip, std::uint64_t seed,
                       const ParallelOptions& par = {});

// Where the estimator is certifiably integrable: K is the probed bound on
// initial code values, and the two horizons instantiate the analytic bounds
// 1/(K d) (autonomous rule) and ln(1 + 1/K) (single-tree rule). prop1_ok
// reports the density feasibility test rho(T) >= d and K <= tail(T) at the
// requested time; a false flag is a warning, not an error, since the bound
// is only sufficient.
struct ValidityReport {
    double K = 0.0;
    double horizon_autonomous = 0.0;
    double horizon_single_tree = 0.0;
    bool prop1_ok = false;
    double T = 0.0;
    double rho_T = 0.0;
    double tail_T = 0.0;
    int probe_depth = 0;
};

ValidityReport validity_report(const RhsSystem& sys, const MechanismTable& table,
                               const LifetimeDensity& density, double T,
                               int probe_depth = 8);

// Expected leaf counts under Exponential(lambda) lifetimes at horizon t:
// cosh(lambda t) for identity-rooted trees, e^{lambda t} for
// derivative-rooted ones.
std::pair<double, double> mean_tree_size(double t, double lambda);

} // namespace branchode

#endif // BRANCHODE_ESTIMATOR_HPP

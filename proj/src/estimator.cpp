#include "branchode/estimator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>

namespace branchode {

namespace {

struct ChunkResult {
    RunningMoments moments;
    long long aborted = 0;
};

// linear interpolation at q * (n - 1) over an ascending array, the usual
// tensor-library percentile convention
double quantile_sorted(const std::vector<double>& sorted, double q) {
    const std::size_t n = sorted.size();
    const double pos = q * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= n) return sorted[n - 1];
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

void check_clip(const ClipPolicy& clip) {
    if (!clip.enabled) return;
    if (!(clip.percentile > 0.0 && clip.percentile < 50.0))
        throw std::invalid_argument("clip percentile must lie in (0, 50)");
    if (!(clip.multiplier > 0.0))
        throw std::invalid_argument("clip multiplier must be positive");
}

Estimate finish(const RunningMoments& total, long long aborted, long long clipped) {
    if (total.n == 0) throw std::runtime_error("no usable samples");
    Estimate out;
    out.mean = total.mean;
    out.variance = total.variance();
    out.std_error = std::sqrt(out.variance / static_cast<double>(total.n));
    out.n_used = total.n;
    out.n_aborted = aborted;
    out.n_clipped = clipped;
    return out;
}

} // namespace

Estimate estimate_at(const RhsSystem& sys, const MechanismTable& table, int component,
                     double t, long long n_samples, const SampleOptions& opts,
                     const ClipPolicy& clip, std::uint64_t seed,
                     const ParallelOptions& par) {
    if (n_samples < 2) throw std::invalid_argument("estimate_at: need at least 2 samples");
    if (component < 0 || component >= sys.dim)
        throw std::invalid_argument("estimate_at: component out of range");
    const double horizon = t - sys.t0;
    if (horizon < 0.0) throw std::invalid_argument("estimate_at: t precedes the initial time");
    check_clip(clip);

    const long long chunk = par.chunk_size > 0 ? par.chunk_size : 65536;
    const long long n_chunks = (n_samples + chunk - 1) / chunk;
    const Code root = Code::make_identity(component);

    std::vector<ChunkResult> results(static_cast<std::size_t>(n_chunks));
    std::vector<double> values;
    if (clip.enabled)
        values.assign(static_cast<std::size_t>(n_samples),
                      std::numeric_limits<double>::quiet_NaN());

    auto run_chunk = [&](long long k, CodeValueCache& cache) {
        ChunkResult r;
        const long long lo = k * chunk;
        const long long hi = std::min(n_samples, lo + chunk);
        for (long long idx = lo; idx < hi; ++idx) {
            Rng rng = Rng::for_sample(seed, static_cast<std::uint64_t>(idx));
            TreeSample s = sample_tree(root, horizon, sys, table, opts, rng, cache);
            if (s.status != SampleStatus::Ok || !std::isfinite(s.value)) {
                ++r.aborted;
                continue;
            }
            if (clip.enabled)
                values[static_cast<std::size_t>(idx)] = s.value;
            else
                r.moments.add(s.value);
        }
        results[static_cast<std::size_t>(k)] = r;
    };

    int threads = par.threads;
    if (threads <= 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        threads = hw > 0 ? static_cast<int>(hw) : 1;
    }
    threads = static_cast<int>(std::min<long long>(threads, n_chunks));

    if (threads <= 1) {
        CodeValueCache cache;
        for (long long k = 0; k < n_chunks; ++k) run_chunk(k, cache);
    } else {
        std::atomic<long long> next{0};
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                CodeValueCache cache; // per-worker replica, no locking
                try {
                    for (long long k; (k = next.fetch_add(1)) < n_chunks;)
                        run_chunk(k, cache);
                } catch (...) {
                    errors[static_cast<std::size_t>(w)] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    long long aborted = 0;
    for (const auto& r : results) aborted += r.aborted;

    if (!clip.enabled) {
        RunningMoments total;
        for (const auto& r : results) total.combine(r.moments); // fixed chunk order
        return finish(total, aborted, 0);
    }

    std::vector<double> retained;
    retained.reserve(static_cast<std::size_t>(n_samples - aborted));
    for (double v : values)
        if (!std::isnan(v)) retained.push_back(v);
    if (retained.empty()) throw std::runtime_error("no usable samples");

    std::vector<double> sorted = retained;
    std::sort(sorted.begin(), sorted.end());
    const double q_lo = quantile_sorted(sorted, clip.percentile / 100.0);
    const double q_hi = quantile_sorted(sorted, 1.0 - clip.percentile / 100.0);
    const double width = q_hi - q_lo;
    const double lo = q_lo - clip.multiplier * width;
    const double hi = q_hi + clip.multiplier * width;

    RunningMoments total;
    long long clipped = 0;
    for (double v : retained) { // sample order, independent of chunking
        if (v < lo || v > hi)
            ++clipped;
        else
            total.add(v);
    }
    return finish(total, aborted, clipped);
}

namespace {

Estimate exact_estimate(double value, long long n_samples) {
    Estimate e;
    e.mean = value;
    e.n_used = n_samples;
    return e;
}

// one independent stream per (patch, grid point, component)
std::uint64_t sub_seed(std::uint64_t seed, int patch, int grid, int component) {
    const std::uint64_t salt = (static_cast<std::uint64_t>(patch) << 40)
                             | (static_cast<std::uint64_t>(grid) << 16)
                             | static_cast<std::uint64_t>(component);
    return mix_seed(seed, salt);
}

} // namespace

Trajectory patch_solve(const RhsSystem& sys, const MechanismTable& table,
                       double t_lo, double t_hi, int n_patches, int grid_per_patch,
                       long long n_samples, const SampleOptions& opts,
                       const ClipPolicy& clip, std::uint64_t seed,
                       const ParallelOptions& par) {
    if (n_patches < 1) throw std::invalid_argument("patch_solve: n_patches must be >= 1");
    if (grid_per_patch < 1) throw std::invalid_argument("patch_solve: grid_per_patch must be >= 1");
    if (!(t_hi > t_lo)) throw std::invalid_argument("patch_solve: need t_hi > t_lo");
    if (sys.t0 != t_lo)
        throw std::invalid_argument("patch_solve: the system's initial time must be t_lo");

    const int total_grid = n_patches * grid_per_patch;
    std::vector<double> times(static_cast<std::size_t>(total_grid) + 1);
    for (int k = 0; k <= total_grid; ++k)
        times[static_cast<std::size_t>(k)] =
            t_lo + (t_hi - t_lo) * (static_cast<double>(k) / total_grid);

    Trajectory out;
    for (int p = 0; p <= n_patches; ++p)
        out.patch_boundaries.push_back(times[static_cast<std::size_t>(p * grid_per_patch)]);

    TrajectoryPoint first;
    first.t = t_lo;
    for (int c = 0; c < sys.dim; ++c) {
        first.components.push_back(exact_estimate(sys.y0[static_cast<std::size_t>(c)], n_samples));
        first.acc_std_error.push_back(0.0);
    }
    out.points.push_back(std::move(first));

    RhsSystem cur = sys;
    std::vector<double> carried(static_cast<std::size_t>(sys.dim), 0.0); // boundary variances

    for (int p = 0; p < n_patches; ++p) {
        std::vector<Estimate> boundary;
        for (int g = 1; g <= grid_per_patch; ++g) {
            const double tg = times[static_cast<std::size_t>(p * grid_per_patch + g)];
            TrajectoryPoint pt;
            pt.t = tg;
            for (int c = 0; c < sys.dim; ++c) {
                Estimate e;
                if (table.mode() == MechanismMode::SingleTree && c == 0) {
                    e = exact_estimate(tg, n_samples); // time advances exactly
                } else {
                    try {
                        e = estimate_at(cur, table, c, tg, n_samples, opts, clip,
                                        sub_seed(seed, p, g, c), par);
                    } catch (const std::exception& err) {
                        out.complete = false;
                        out.message = "patch " + std::to_string(p + 1) + ", t=" +
                                      std::to_string(tg) + ": " + err.what();
                        return out;
                    }
                }
                pt.components.push_back(e);
                pt.acc_std_error.push_back(std::sqrt(
                    e.std_error * e.std_error + carried[static_cast<std::size_t>(c)]));
            }
            if (g == grid_per_patch) boundary = pt.components;
            out.points.push_back(std::move(pt));
        }
        for (int c = 0; c < sys.dim; ++c) {
            const Estimate& e = boundary[static_cast<std::size_t>(c)];
            carried[static_cast<std::size_t>(c)] += e.std_error * e.std_error;
            cur.y0[static_cast<std::size_t>(c)] = e.mean;
        }
        cur.t0 = times[static_cast<std::size_t>((p + 1) * grid_per_patch)];
    }
    return out;
}

ValidityReport validity_report(const RhsSystem& sys, const MechanismTable& table,
                               const LifetimeDensity& density, double T,
                               int probe_depth) {
    if (!(T > 0.0)) throw std::invalid_argument("validity_report: T must be positive");
    ValidityReport r;
    r.T = T;
    r.probe_depth = probe_depth;
    r.K = initial_bound_K(sys, table, probe_depth);
    const double d = static_cast<double>(table.dim());
    const double inf = std::numeric_limits<double>::infinity();
    r.horizon_autonomous = r.K > 0.0 ? 1.0 / (r.K * d) : inf;
    r.horizon_single_tree = r.K > 0.0 ? std::log1p(1.0 / r.K) : inf;
    r.rho_T = density_at(density, T);
    r.tail_T = tail_at(density, T);
    r.prop1_ok = r.rho_T >= d && r.K <= r.tail_T;
    return r;
}

std::pair<double, double> mean_tree_size(double t, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("mean_tree_size: lambda must be positive");
    return {std::cosh(lambda * t), std::exp(lambda * t)};
}

} // namespace branchode

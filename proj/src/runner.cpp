#include "branchode/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace branchode {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string describe_density(const LifetimeDensity& d) {
    if (d.kind == LifetimeDensity::Kind::Exponential)
        return "exponential(" + format_double(d.rate) + ")";
    return "gamma-half";
}

std::string describe_mechanism(const MechanismTable& t) {
    switch (t.mode()) {
        case MechanismMode::Autonomous: return "autonomous(" + std::to_string(t.dim()) + ")";
        case MechanismMode::SingleTree: return "single-tree";
        case MechanismMode::Custom: return "custom(" + std::to_string(t.dim()) + ")";
    }
    return "?";
}

std::string describe_clip(const ClipPolicy& c) {
    if (!c.enabled) return "off";
    return format_double(c.percentile) + "," + format_double(c.multiplier);
}

void evaluate_gates(const Problem& p, const Trajectory& traj, Report& rep) {
    if (!traj.complete) {
        rep.gates_ok = false;
        rep.gate_lines.push_back("FAIL trajectory incomplete: " + traj.message);
        return;
    }
    if (p.gate == GateKind::None || !p.exact) {
        rep.gate_lines.push_back("report-only run: no statistical gate");
        return;
    }
    for (const TrajectoryPoint& pt : traj.points) {
        const std::vector<double> ref = p.exact(pt.t);
        for (std::size_t c = 0; c < pt.components.size(); ++c) {
            const Estimate& e = pt.components[c];
            const double err = std::fabs(e.mean - ref[c]);
            bool ok = true;
            std::string bound;
            switch (p.gate) {
                case GateKind::Deterministic: {
                    const double tol = 1e-10 * std::max(1.0, std::fabs(ref[c]));
                    ok = err <= tol && e.variance <= 1e-24;
                    bound = "err<=" + format_double(tol) + " and round-off variance";
                    break;
                }
                case GateKind::SigmaMean: {
                    const double tol = p.gate_multiple * e.std_error;
                    ok = err <= tol;
                    bound = format_double(p.gate_multiple) + "*std_error=" + format_double(tol);
                    break;
                }
                case GateKind::SigmaAccumulated: {
                    const double tol = p.gate_multiple * pt.acc_std_error[c];
                    ok = err <= tol;
                    bound = format_double(p.gate_multiple) + "*acc_std_error=" + format_double(tol);
                    break;
                }
                case GateKind::None: break;
            }
            std::ostringstream line;
            line << (ok ? "pass" : "FAIL") << " t=" << format_double(pt.t) << " component " << c
                 << ": |mean-exact|=" << format_double(err) << " vs " << bound;
            rep.gate_lines.push_back(line.str());
            if (!ok) rep.gates_ok = false;
        }
    }
}

void cross_check_routes(const Problem& p, const ValidityReport& validity, Report& rep) {
    const Trajectory& a = rep.trajectory;
    const Trajectory& b = *rep.single_tree;
    const std::size_t rows = std::min(a.points.size(), b.points.size());
    for (std::size_t r = 0; r < rows; ++r) {
        const double t = a.points[r].t;
        const double horizon = t - p.t_lo;
        const bool certified = horizon <= validity.horizon_autonomous &&
                               horizon <= validity.horizon_single_tree;
        // only the state component exists on both routes
        const Estimate& ea = a.points[r].components[1];
        const Estimate& eb = b.points[r].components[1];
        const double gap = std::fabs(ea.mean - eb.mean);
        const double combined = std::sqrt(ea.std_error * ea.std_error +
                                          eb.std_error * eb.std_error);
        if (certified && gap > 5.0 * combined) {
            rep.warnings.push_back("route disagreement at t=" + format_double(t) + ": |" +
                                   format_double(ea.mean) + " - " + format_double(eb.mean) +
                                   "| > 5*combined std_error " + format_double(combined));
        }
    }
}

void write_csv(const std::string& path, const Problem& p, const RunConfig& cfg,
               long long n, const Trajectory& traj, const ValidityReport& validity,
               const std::vector<std::string>& warnings) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);

    long long aborted = 0, clipped = 0;
    for (const auto& pt : traj.points)
        for (const auto& e : pt.components) {
            aborted += e.n_aborted;
            clipped += e.n_clipped;
        }

    out << "# problem=" << p.name << " seed=" << cfg.seed << " samples=" << n
        << " patches=" << p.n_patches << " grid_per_patch=" << p.grid_per_patch
        << " density=" << describe_density(p.density)
        << " mechanism=" << describe_mechanism(p.table)
        << " clip=" << describe_clip(p.clip) << "\n";
    out << "# totals: aborted=" << aborted << " clipped=" << clipped << "\n";
    out << "# validity: K=" << format_double(validity.K)
        << " horizon_autonomous=" << format_double(validity.horizon_autonomous)
        << " horizon_single_tree=" << format_double(validity.horizon_single_tree)
        << " prop1_ok=" << (validity.prop1_ok ? "yes" : "no") << "\n";
    for (const std::string& w : warnings) out << "# warning: " << w << "\n";
    if (!traj.complete) out << "# incomplete: " << traj.message << "\n";

    out << "t";
    const int d = p.sys.dim;
    for (int c = 0; c < d; ++c) {
        out << ",mean_" << c << ",variance_" << c << ",std_error_" << c
            << ",acc_std_error_" << c << ",exact_" << c << ",abs_error_" << c;
    }
    out << "\n";

    for (const TrajectoryPoint& pt : traj.points) {
        out << format_double(pt.t);
        std::vector<double> ref;
        if (p.exact) ref = p.exact(pt.t);
        for (int c = 0; c < d; ++c) {
            const Estimate& e = pt.components[static_cast<std::size_t>(c)];
            out << ',' << format_double(e.mean) << ',' << format_double(e.variance) << ','
                << format_double(e.std_error) << ','
                << format_double(pt.acc_std_error[static_cast<std::size_t>(c)]);
            if (ref.empty())
                out << ",,"; // no closed form for this problem
            else
                out << ',' << format_double(ref[static_cast<std::size_t>(c)]) << ','
                    << format_double(std::fabs(e.mean - ref[static_cast<std::size_t>(c)]));
        }
        out << "\n";
    }
}

void write_plot_data(const std::string& path, const Problem& p, const Trajectory& traj) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "# t";
    for (int c = 0; c < p.sys.dim; ++c)
        out << "  mean_" << c << "  acc_std_error_" << c << "  exact_" << c;
    out << "\n";
    for (const TrajectoryPoint& pt : traj.points) {
        out << format_double(pt.t);
        std::vector<double> ref;
        if (p.exact) ref = p.exact(pt.t);
        for (int c = 0; c < p.sys.dim; ++c) {
            out << ' ' << format_double(pt.components[static_cast<std::size_t>(c)].mean) << ' '
                << format_double(pt.acc_std_error[static_cast<std::size_t>(c)]);
            out << ' ' << (ref.empty() ? "nan" : format_double(ref[static_cast<std::size_t>(c)]));
        }
        out << "\n";
    }
}

} // namespace

Report run_experiment(const RunConfig& cfg) {
    const Problem& p = cfg.problem;
    const long long n = cfg.n_samples > 0 ? cfg.n_samples : p.default_samples;

    ParallelOptions par;
    par.threads = cfg.threads;
    SampleOptions opts;
    opts.density = p.density;

    Report rep;
    rep.problem = p.name;
    const auto started = std::chrono::steady_clock::now();

    // the horizon each patch actually samples over
    const double patch_len = (p.t_hi - p.t_lo) / p.n_patches;
    rep.validity = validity_report(p.sys, p.table, p.density, patch_len);

    const double certified = p.table.mode() == MechanismMode::SingleTree
                                 ? rep.validity.horizon_single_tree
                                 : rep.validity.horizon_autonomous;
    if (patch_len > certified)
        rep.warnings.push_back("patch horizon " + format_double(patch_len) +
                               " exceeds the certified horizon " + format_double(certified) +
                               "; estimates past it carry no integrability guarantee");
    if (!rep.validity.prop1_ok)
        rep.warnings.push_back("density feasibility check fails at the patch horizon "
                               "(rho(T) >= d and K <= tail(T) not both satisfied)");

    rep.trajectory = patch_solve(p.sys, p.table, p.t_lo, p.t_hi, p.n_patches,
                                 p.grid_per_patch, n, opts, p.clip, cfg.seed, par);

    if (p.has_single_tree_route) {
        rep.single_tree = patch_solve(p.sys, MechanismTable::single_tree(), p.t_lo, p.t_hi,
                                      p.n_patches, p.grid_per_patch, n, opts, p.clip,
                                      mix_seed(cfg.seed, 0x517), par);
        cross_check_routes(p, rep.validity, rep);
    }

    evaluate_gates(p, rep.trajectory, rep);

    std::string dir = cfg.out_dir;
    if (dir.empty()) {
        const char* env = std::getenv("BRANCHODE_OUT");
        dir = env && *env ? env : ".";
    }
    std::filesystem::create_directories(dir);
    rep.csv_path = dir + "/" + p.name + ".csv";
    rep.plot_path = dir + "/" + p.name + ".dat";
    write_csv(rep.csv_path, p, cfg, n, rep.trajectory, rep.validity, rep.warnings);
    write_plot_data(rep.plot_path, p, rep.trajectory);
    if (rep.single_tree)
        write_csv(dir + "/" + p.name + "-single-tree.csv", p, cfg, n, *rep.single_tree,
                  rep.validity, rep.warnings);

    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return rep;
}

} // namespace branchode

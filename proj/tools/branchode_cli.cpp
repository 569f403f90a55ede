// Command-line front end: named presets, JSON problem configs, validity
// diagnostics and the series-coefficient self-check.

#include "branchode/butcher.hpp"
#include "branchode/rk4.hpp"
#include "branchode/runner.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

using branchode::Problem;
using json = nlohmann::json;

branchode::LifetimeDensity parse_density(const json& j) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "exponential") return branchode::LifetimeDensity::exponential(1.0);
        if (s == "gamma-half") return branchode::LifetimeDensity::gamma_half();
        throw std::invalid_argument("density must be \"exponential\" or \"gamma-half\"");
    }
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "exponential")
        return branchode::LifetimeDensity::exponential(j.value("rate", 1.0));
    if (kind == "gamma-half") return branchode::LifetimeDensity::gamma_half();
    throw std::invalid_argument("density.kind must be \"exponential\" or \"gamma-half\"");
}

branchode::ClipPolicy parse_clip_json(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "off") return branchode::ClipPolicy::off();
        throw std::invalid_argument("clip must be \"off\" or {percentile, multiplier}");
    }
    if (j.is_array()) {
        if (j.size() != 2) throw std::invalid_argument("clip array must be [percentile, multiplier]");
        return branchode::ClipPolicy::on(j[0].get<double>(), j[1].get<double>());
    }
    if (!j.value("enabled", true)) return branchode::ClipPolicy::off();
    return branchode::ClipPolicy::on(j.value("percentile", 0.1), j.value("multiplier", 100.0));
}

// Grammar documented in the README: rhs as one infix string (scalar) or an
// array of strings (system); variables y0, y1, ... with t and y as aliases
// for y0 and y1 in the time-dependent scalar form.
Problem problem_from_config(const std::string& path, bool& allow_beyond) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config " + path);
    json j = json::parse(in);

    Problem p;
    p.name = j.value("name", std::filesystem::path(path).stem().string());
    p.description = j.value("description", "user config " + path);

    const json window = j.at("window");
    if (!window.is_array() || window.size() != 2)
        throw std::invalid_argument("window must be [t_lo, t_hi]");
    p.t_lo = window[0].get<double>();
    p.t_hi = window[1].get<double>();
    if (!(p.t_hi > p.t_lo)) throw std::invalid_argument("window must satisfy t_lo < t_hi");
    if (j.contains("t0") && j["t0"].get<double>() != p.t_lo)
        throw std::invalid_argument("t0 must equal the window start");

    const json rhs = j.at("rhs");
    const bool time_dependent = j.value("time_dependent", false);
    const std::string mechanism = j.value("mechanism", "autonomous");
    if (rhs.is_string()) {
        const branchode::ExprPtr f = branchode::parse_expression(rhs.get<std::string>());
        if (time_dependent) {
            const double y_init = j.at("y0").get<double>();
            p.sys = branchode::autonomize(f, y_init, p.t_lo);
            if (mechanism == "single-tree") {
                p.table = branchode::MechanismTable::single_tree();
            } else if (mechanism == "autonomous") {
                p.table = branchode::MechanismTable::autonomous(2);
            } else {
                throw std::invalid_argument("mechanism must be \"autonomous\" or \"single-tree\"");
            }
        } else {
            if (mechanism != "autonomous")
                throw std::invalid_argument("single-tree needs time_dependent: true");
            p.sys = branchode::make_system({f}, {j.at("y0").get<double>()}, p.t_lo);
            p.table = branchode::MechanismTable::autonomous(1);
        }
    } else if (rhs.is_array()) {
        if (time_dependent || mechanism != "autonomous")
            throw std::invalid_argument("systems run autonomous; write time into a component");
        std::vector<branchode::ExprPtr> components;
        for (const json& c : rhs)
            components.push_back(branchode::parse_expression(c.get<std::string>()));
        std::vector<double> y0 = j.at("y0").get<std::vector<double>>();
        p.sys = branchode::make_system(std::move(components), std::move(y0), p.t_lo);
        p.table = branchode::MechanismTable::autonomous(p.sys.dim);
    } else {
        throw std::invalid_argument("rhs must be a string or an array of strings");
    }

    if (j.contains("density")) p.density = parse_density(j["density"]);
    p.n_patches = j.value("patches", 1);
    p.grid_per_patch = j.value("grid_per_patch", 10);
    p.default_samples = j.value("samples", static_cast<long long>(1'000'000));
    if (j.contains("clip")) p.clip = parse_clip_json(j["clip"]);
    p.gate = branchode::GateKind::None; // configs carry no reference solution
    allow_beyond = j.value("allow_beyond_horizon", false);
    return p;
}

bool looks_like_config(const std::string& arg) {
    return (arg.size() >= 5 && arg.substr(arg.size() - 5) == ".json") ||
           std::filesystem::exists(arg);
}

Problem load_problem(const std::string& arg, bool& allow_beyond, bool& is_config) {
    allow_beyond = false;
    is_config = looks_like_config(arg);
    if (is_config) return problem_from_config(arg, allow_beyond);
    return branchode::builtin_problem(arg);
}

branchode::ClipPolicy parse_clip_flag(const std::string& s) {
    if (s == "off") return branchode::ClipPolicy::off();
    const auto comma = s.find(',');
    if (comma == std::string::npos)
        throw CLI::ValidationError("--clip", "expected \"p,m\" or \"off\"");
    return branchode::ClipPolicy::on(std::stod(s.substr(0, comma)),
                                     std::stod(s.substr(comma + 1)));
}

void print_validity(const Problem& p, const branchode::ValidityReport& v) {
    using branchode::format_double;
    std::cout << "problem " << p.name << ": window [" << format_double(p.t_lo) << ", "
              << format_double(p.t_hi) << "], " << p.n_patches << " patch(es) of length "
              << format_double((p.t_hi - p.t_lo) / p.n_patches) << "\n";
    std::cout << "  growth bound K = " << format_double(v.K) << " (probe depth "
              << v.probe_depth << ")\n";
    std::cout << "  certified horizon, autonomous rule:  " << format_double(v.horizon_autonomous)
              << "\n";
    std::cout << "  certified horizon, single-tree rule: " << format_double(v.horizon_single_tree)
              << "\n";
    std::cout << "  density feasibility at T=" << format_double(v.T)
              << ": rho(T)=" << format_double(v.rho_T) << ", tail(T)=" << format_double(v.tail_T)
              << ", ok=" << (v.prop1_ok ? "yes" : "no") << "\n";
}

int cmd_run(const std::string& target, long long n, std::uint64_t seed, int patches,
            const std::string& clip, int threads, const std::string& out, bool force) {
    bool allow_beyond = false;
    bool is_config = false;
    branchode::RunConfig cfg;
    cfg.problem = load_problem(target, allow_beyond, is_config);
    if (n > 0) cfg.problem.default_samples = n;
    if (patches > 0) cfg.problem.n_patches = patches;
    if (!clip.empty()) cfg.problem.clip = parse_clip_flag(clip);
    cfg.seed = seed;
    cfg.threads = threads;
    cfg.out_dir = out;

    // user configs carry no curated reference, so a window past the
    // certified horizon needs an explicit override
    if (is_config && !allow_beyond && !force) {
        const Problem& p = cfg.problem;
        const double patch_len = (p.t_hi - p.t_lo) / p.n_patches;
        const auto v = branchode::validity_report(p.sys, p.table, p.density, patch_len);
        const double certified = p.table.mode() == branchode::MechanismMode::SingleTree
                                     ? v.horizon_single_tree
                                     : v.horizon_autonomous;
        if (patch_len > certified) {
            std::cerr << "error: patch length " << branchode::format_double(patch_len)
                      << " exceeds the certified horizon "
                      << branchode::format_double(certified)
                      << "; add patches, pass --force, or set allow_beyond_horizon\n";
            return 2;
        }
    }

    const branchode::Report rep = branchode::run_experiment(cfg);
    print_validity(cfg.problem, rep.validity);
    for (const std::string& w : rep.warnings) std::cout << "warning: " << w << "\n";

    std::cout << "\n    t";
    for (int c = 0; c < cfg.problem.sys.dim; ++c) std::cout << "            mean_" << c;
    if (cfg.problem.exact) std::cout << "    max |mean-exact|";
    std::cout << "\n";
    for (const auto& pt : rep.trajectory.points) {
        std::printf("%9.4f", pt.t);
        double worst = 0.0;
        std::vector<double> ref;
        if (cfg.problem.exact) ref = cfg.problem.exact(pt.t);
        for (std::size_t c = 0; c < pt.components.size(); ++c) {
            std::printf("  %16.10g", pt.components[c].mean);
            if (!ref.empty()) worst = std::max(worst, std::fabs(pt.components[c].mean - ref[c]));
        }
        if (!ref.empty()) std::printf("  %12.4g", worst);
        std::printf("\n");
    }

    std::cout << "\n";
    for (const std::string& g : rep.gate_lines) std::cout << g << "\n";
    std::cout << "wrote " << rep.csv_path << " and " << rep.plot_path << " ("
              << branchode::format_double(rep.wall_seconds) << " s)\n";
    if (!rep.gates_ok) {
        std::cout << "RESULT: FAIL\n";
        return 1;
    }
    std::cout << "RESULT: ok\n";
    return 0;
}

int cmd_validity(const std::string& target) {
    bool allow_beyond = false;
    bool is_config = false;
    const Problem p = load_problem(target, allow_beyond, is_config);
    const double patch_len = (p.t_hi - p.t_lo) / p.n_patches;
    print_validity(p, branchode::validity_report(p.sys, p.table, p.density, patch_len));
    return 0;
}

int cmd_butcher_check(const std::string& target, int max_order) {
    bool allow_beyond = false;
    bool is_config = false;
    const Problem p = load_problem(target, allow_beyond, is_config);

    const auto by_order = branchode::enumerate_butcher_trees(max_order);
    std::cout << "rooted trees for " << p.name << " (dim " << p.sys.dim << ")\n";
    for (int k = 1; k <= max_order; ++k) {
        std::cout << "order " << k << ": " << by_order[static_cast<std::size_t>(k)].size()
                  << " tree(s)\n";
        for (const auto& b : by_order[static_cast<std::size_t>(k)]) {
            const auto c = branchode::coefficients(b);
            const std::string shape = branchode::butcher_to_bin(b);
            const bool roundtrip = branchode::bin_to_butcher(shape) == b;
            std::cout << "  " << b.encode() << "  sigma=" << c.sigma << " gamma=" << c.gamma
                      << " nu=" << c.nu << "  shape=" << shape
                      << (roundtrip ? "" : "  ROUNDTRIP MISMATCH") << "\n";
            if (!roundtrip) return 1;
        }
    }

    // short-time check: the order-k partial sum approaches a fourth-order
    // reference as k grows
    const double dt = std::min(0.1, (p.t_hi - p.t_lo) / 10.0);
    const std::vector<double> ref = branchode::rk4_solve(p.sys, p.sys.t0 + dt, dt / 1024.0);
    std::cout << "partial sums at t0+" << branchode::format_double(dt) << ":\n";
    for (int k = 1; k <= max_order; ++k) {
        const std::vector<double> s =
            branchode::butcher_partial_sum(p.sys, dt, k);
        double worst = 0.0;
        for (std::size_t c = 0; c < s.size(); ++c)
            worst = std::max(worst, std::fabs(s[c] - ref[static_cast<std::size_t>(c)]));
        std::cout << "  order " << k << ": max deviation from integrated reference "
                  << branchode::format_double(worst) << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo ODE solver driven by random branching trees"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run a preset or a JSON config and write reports");
    std::string run_target;
    long long n = 0;
    std::uint64_t seed = 1;
    int patches = 0;
    std::string clip;
    int threads = 0;
    std::string out;
    bool force = false;
    run->add_option("problem", run_target, "preset name or config path")->required();
    run->add_option("--n", n, "Monte Carlo samples per estimate (0: problem default)");
    run->add_option("--seed", seed, "base RNG seed");
    run->add_option("--patches", patches, "override the patch count");
    run->add_option("--clip", clip, "outlier policy \"p,m\" (percentile, multiplier) or \"off\"");
    run->add_option("--threads", threads, "worker threads (0: hardware)");
    run->add_option("--out", out, "output directory (default $BRANCHODE_OUT, then \".\")");
    run->add_flag("--force", force, "run a config past its certified horizon");

    auto* list = app.add_subcommand("list", "list the built-in problems");

    auto* validity = app.add_subcommand("validity", "print the growth bound and horizons");
    std::string validity_target;
    validity->add_option("problem", validity_target, "preset name or config path")->required();

    auto* butcher = app.add_subcommand("butcher-check",
                                       "enumerate rooted trees, verify coefficients and shapes");
    std::string butcher_target;
    int max_order = 4;
    butcher->add_option("problem", butcher_target, "preset name or config path")->required();
    butcher->add_option("--max-order", max_order, "largest tree order to check (1..8)")
        ->check(CLI::Range(1, 8));

    CLI11_PARSE(app, argc, argv);

    try {
        if (list->parsed()) {
            for (const std::string& name : branchode::builtin_problem_names()) {
                const Problem p = branchode::builtin_problem(name);
                std::printf("%-12s %s\n", name.c_str(), p.description.c_str());
            }
            return 0;
        }
        if (run->parsed())
            return cmd_run(run_target, n, seed, patches, clip, threads, out, force);
        if (validity->parsed()) return cmd_validity(validity_target);
        if (butcher->parsed()) return cmd_butcher_check(butcher_target, max_order);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

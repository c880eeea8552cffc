/**
 * @file cli.hpp
 * @brief Run configuration and the drivers behind the command-line
 * subcommands (run, parareal, cost, bench). Kept in the library so the
 * drivers can be tested without spawning processes.
 */
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"
#include "costmodel.hpp"
#include "forcefield.hpp"
#include "generate.hpp"
#include "integrate.hpp"
#include "io.hpp"
#include "parareal.hpp"

namespace pmsm {

inline constexpr const char* VERSION = "0.3.0";

/// Process exit codes.
enum ExitCode : int { exit_ok = 0, exit_failure = 1, exit_parse = 2, exit_blowup = 3, exit_nonconvergence = 4 };

/// Every recognised configuration key with its default value.
inline const std::map<std::string, std::string>& config_defaults() {
    static const std::map<std::string, std::string> d{
        {"system", ""},           {"output", "run"},           {"units", "real"},
        {"backend", "msm"},       {"cutoff", "12"},            {"switch_on", "10"},
        {"wolf_alpha", "0.2"},    {"msm_a", "12"},             {"msm_h", "2"},
        {"msm_levels", "0"},      {"coarse_backend", "cutoff"}, {"coarse_cutoff", "12"},
        {"coarse_switch_on", "10"}, {"coarse_wolf_alpha", "0.2"}, {"lj_epsilon", "0"},
        {"lj_sigma", "3"},        {"lj_cutoff", "10"},         {"bonds", "true"},
        {"skin", "2"},            {"dt", "2"},                 {"steps", "1000"},
        {"stride", "0"},          {"interval_steps", "10"},    {"window", "16"},
        {"epsilon", "0.001"},     {"k_max", "-1"},             {"windows", "1"},
        {"reference", "true"},    {"seed", "1"},               {"init_kinetic", "0"},
        {"threads", "0"},
    };
    return d;
}

struct RunConfig {
    KeyValues values = config_defaults();

    /// Overlays @p kv; unknown keys are rejected.
    void merge(const KeyValues& kv) {
        for (const auto& [k, v] : kv) {
            if (!config_defaults().count(k)) throw ConfigError("unknown configuration key '" + k + "'");
            values[k] = v;
        }
    }

    const std::string& str(const std::string& key) const { return values.at(key); }
    double num(const std::string& key) const {
        const auto& v = values.at(key);
        try {
            std::size_t used = 0;
            const double x = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return x;
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "' expects a number, got '" + v + "'");
        }
    }
    long integer(const std::string& key) const {
        const double x = num(key);
        if (x != std::floor(x)) throw ConfigError("key '" + key + "' expects an integer");
        return long(x);
    }
    bool flag(const std::string& key) const {
        const auto& v = values.at(key);
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw ConfigError("key '" + key + "' expects true/false, got '" + v + "'");
    }

    Units units() const {
        const auto& u = str("units");
        if (u == "real") return Units::real();
        if (u == "reduced") return Units::reduced();
        throw ConfigError("units must be 'real' or 'reduced'");
    }

    ElectrostaticsBackend backend(bool coarse) const {
        const std::string p = coarse ? "coarse_" : "";
        ElectrostaticsBackend b;
        b.kind = electrostatics_kind_from_string(str(p + "backend"));
        b.cutoff = num(p + "cutoff");
        b.switch_on = num(p + "switch_on");
        b.wolf_alpha = num(p + "wolf_alpha");
        b.msm.a = num("msm_a");
        b.msm.h = num("msm_h");
        b.msm.levels = int(integer("msm_levels"));
        b.validate();
        return b;
    }

    ForceField forcefield(std::size_t atoms, bool coarse) const {
        ForceField ff;
        ff.electrostatics = backend(coarse);
        ff.units = units();
        ff.bonds = flag("bonds");
        ff.skin = num("skin");
        if (!(ff.skin >= 0)) throw ConfigError("skin must be non-negative");
        if (num("lj_epsilon") > 0) {
            ff.lj = LjParams::uniform(atoms, num("lj_epsilon"), num("lj_sigma"), num("lj_cutoff"));
            ff.lj->validate(atoms);
        }
        return ff;
    }

    Propagator propagator(std::size_t atoms, bool coarse, long steps) const {
        Propagator p;
        p.forcefield = forcefield(atoms, coarse);
        p.dt = num("dt");
        p.steps = steps;
        p.validate();
        return p;
    }

    /// Range checks that can run before any compute.
    void validate() const {
        units();
        backend(false);
        backend(true);
        if (!(num("dt") > 0)) throw ConfigError("dt must be positive");
        if (integer("steps") < 0) throw ConfigError("steps must be non-negative");
        if (integer("stride") < 0) throw ConfigError("stride must be non-negative");
        if (integer("interval_steps") < 1) throw ConfigError("interval_steps must be >= 1");
        if (integer("window") < 2) throw ConfigError("window must be >= 2");
        if (!(num("epsilon") > 0)) throw ConfigError("epsilon must be positive");
        if (integer("windows") < 1) throw ConfigError("windows must be >= 1");
        if (integer("threads") < 0) throw ConfigError("threads must be non-negative");
        if (num("init_kinetic") < 0) throw ConfigError("init_kinetic must be non-negative");
    }

    unsigned threads() const {
        const long t = integer("threads");
        return capped_threads(unsigned(t));
    }
};

/// Loads the system named by the configuration and applies seeded
/// velocities when init_kinetic > 0.
inline ParticleSystem load_system(const RunConfig& cfg, bool writes_trajectory = false) {
    if (cfg.str("system").empty()) throw ConfigError("no system file given (key 'system')");
    std::error_code ec;
    if (writes_trajectory && std::filesystem::equivalent(cfg.str("system"), cfg.str("output") + ".xyz", ec))
        throw ConfigError("output trajectory would overwrite the system file");
    auto s = parse_system_file(cfg.str("system"));
    if (cfg.num("init_kinetic") > 0)
        assign_velocities(s, cfg.num("init_kinetic"), std::uint64_t(cfg.integer("seed")), cfg.units());
    return s;
}

/// Config echo plus version and seed.
inline void write_manifest(const std::string& path, const RunConfig& cfg, const std::string& command) {
    std::ofstream out(path);
    out << "# pmsm " << VERSION << " manifest\n";
    out << "command = " << command << '\n';
    for (const auto& [k, v] : cfg.values) out << k << " = " << v << '\n';
}

namespace detail {
inline std::string energy_header() {
    return "step,time_fs,kinetic,bonded,lj,coulomb_short,coulomb_long,potential,total,drift,wallclock_s";
}
}  // namespace detail

struct SequentialSummary {
    double initial_energy = 0;
    double final_energy = 0;
    double max_relative_drift = 0;
    StateVector final_state;
};

/// Runs a sequential velocity Verlet simulation, writing <output>.metrics.csv,
/// <output>.xyz (when stride > 0) and <output>.manifest.
inline SequentialSummary run_sequential(const RunConfig& cfg, std::ostream& log = std::cerr) {
    cfg.validate();
    const auto sys = load_system(cfg, cfg.integer("stride") > 0);
    const long steps = cfg.integer("steps");
    const long stride = cfg.integer("stride");
    const auto prefix = cfg.str("output");
    write_manifest(prefix + ".manifest", cfg, "run");

    std::ofstream metrics(prefix + ".metrics.csv");
    metrics << detail::energy_header() << '\n' << std::setprecision(17);
    std::ofstream traj;
    if (stride > 0) traj.open(prefix + ".xyz");

    auto prop = cfg.propagator(sys.size(), false, std::max<long>(steps, 1));
    const auto t0 = std::chrono::steady_clock::now();
    SequentialSummary summary;
    bool first = true;
    const auto observe = [&](long step, const ParticleSystem& s, const ForceReport* f) {
        if (step > steps) return;
        const double ke = kinetic_energy(s, prop.forcefield.units);
        const double total = ke + f->total_energy;
        if (first) {
            summary.initial_energy = total;
            first = false;
        }
        const double drift = summary.initial_energy != 0 ? (total - summary.initial_energy) / std::abs(summary.initial_energy)
                                                         : total - summary.initial_energy;
        summary.max_relative_drift = std::max(summary.max_relative_drift, std::abs(drift));
        summary.final_energy = total;
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const auto comp = [&](const char* k) {
            const auto it = f->components.find(k);
            return it == f->components.end() ? 0.0 : it->second;
        };
        metrics << step << ',' << double(step) * prop.dt << ',' << ke << ',' << comp("bonded") << ',' << comp("lj") << ','
                << comp("coulomb_short") << ',' << comp("coulomb_long") << ',' << f->total_energy << ',' << total << ','
                << drift << ',' << wall << '\n';
        if (stride > 0 && step % stride == 0) write_xyz_frame(traj, s, "step=" + std::to_string(step));
    };
    try {
        if (steps == 0) {
            NeighborCache cache;
            const auto f = evaluate_forces(sys, prop.forcefield, cache);
            observe(0, sys, &f);
            summary.final_state = state_from_system(sys);
        } else {
            summary.final_state = propagate(state_from_system(sys), sys, prop, observe);
        }
    } catch (const BlowUpError& e) {
        log << "blow-up: " << e.what() << '\n';
        throw;
    }
    log << "run: " << steps << " steps, energy " << summary.initial_energy << " -> " << summary.final_energy
        << ", max |drift| " << summary.max_relative_drift << '\n';
    return summary;
}

struct PararealReport {
    SimulationResult result;
    std::optional<double> max_deviation;  ///< vs sequential reference [A]
    double fine_seconds_per_eval = 0;
    double coarse_seconds_per_eval = 0;
    double q_measured = 0;                ///< measured fine / coarse cost ratio
    double theoretical_speedup = 0;       ///< plan2_speedup(q, T_W - 1, K)
    double makespan_speedup = 0;          ///< plan2_speedup_makespan(q, T_W - 1, K)
    double achieved_speedup = 0;          ///< sequential wall time / parareal wall time (needs reference)
    double sequential_seconds = 0;
    double parareal_seconds = 0;
};

/// Runs parareal over the configured windows and writes <output>.parareal.csv
/// (per-window and per-iteration convergence), <output>.xyz and
/// <output>.manifest.
inline PararealReport run_parareal(const RunConfig& cfg, std::ostream& log = std::cerr) {
    cfg.validate();
    const auto sys = load_system(cfg, true);
    const auto prefix = cfg.str("output");
    write_manifest(prefix + ".manifest", cfg, "parareal");
    const long interval = cfg.integer("interval_steps");

    PararealConfig pc;
    pc.fine = make_propagate_fn(sys, cfg.propagator(sys.size(), false, interval));
    pc.coarse = make_propagate_fn(sys, cfg.propagator(sys.size(), true, interval));
    pc.window = std::size_t(cfg.integer("window"));
    pc.epsilon = cfg.num("epsilon");
    pc.k_max = cfg.integer("k_max");
    pc.total_points = 1 + std::size_t(cfg.integer("windows")) * (pc.window - 1);
    pc.threads = cfg.threads();

    const auto v = state_from_system(sys);
    PararealReport rep;
    const auto t0 = std::chrono::steady_clock::now();
    rep.result = run_simulation(v, pc);
    rep.parareal_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    // best of three sequential timings of each propagator on the initial state
    const auto best_of = [&](const PropagateFn& fn) {
        double best = 1e300;
        for (int r = 0; r < 3; ++r) {
            const auto t = std::chrono::steady_clock::now();
            (void)fn(v);
            best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count());
        }
        return best;
    };
    rep.fine_seconds_per_eval = best_of(pc.fine);
    rep.coarse_seconds_per_eval = best_of(pc.coarse);
    rep.q_measured = rep.coarse_seconds_per_eval > 0 ? rep.fine_seconds_per_eval / rep.coarse_seconds_per_eval : 0;
    // per window: T_W - 1 fine steps, K = worst observed iteration count
    const double T = double(pc.window - 1);
    const double K = double(rep.result.max_iterations());
    if (rep.q_measured > 0) {
        rep.theoretical_speedup = plan2_speedup(rep.q_measured, T, K);
        rep.makespan_speedup = plan2_speedup_makespan(rep.q_measured, T, K);
    }

    if (cfg.flag("reference")) {
        const auto t1 = std::chrono::steady_clock::now();
        const auto seq = sequential_trajectory(v, pc.fine, rep.result.trajectory.size());
        rep.sequential_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
        double dev = 0;
        for (std::size_t n = 0; n < seq.size(); ++n) dev = std::max(dev, state_distance(seq[n], rep.result.trajectory[n]));
        rep.max_deviation = dev;
        rep.achieved_speedup = rep.parareal_seconds > 0 ? rep.sequential_seconds / rep.parareal_seconds : 0;
    }

    std::ofstream csv(prefix + ".parareal.csv");
    csv << "window,iteration,max_increment,converged_at,converged\n" << std::setprecision(10);
    for (std::size_t w = 0; w < rep.result.windows.size(); ++w) {
        const auto& ws = rep.result.windows[w];
        for (std::size_t k = 0; k < ws.max_increment.size(); ++k)
            csv << w << ',' << k << ',' << ws.max_increment[k] << ',' << ws.converged_at << ','
                << (ws.converged ? "true" : "false") << '\n';
    }
    std::ofstream traj(prefix + ".xyz");
    for (std::size_t n = 0; n < rep.result.trajectory.size(); ++n)
        write_xyz_frame(traj, system_from_state(rep.result.trajectory[n], sys), "point=" + std::to_string(n));

    std::ostringstream summary;
    summary << std::setprecision(6);
    for (std::size_t w = 0; w < rep.result.windows.size(); ++w)
        summary << "window " << w << ": K=" << rep.result.windows[w].converged_at
                << (rep.result.windows[w].converged ? "" : " (not converged)") << '\n';
    if (rep.max_deviation) summary << "max deviation vs sequential: " << *rep.max_deviation << " A\n";
    summary << "measured Q_F/G: " << rep.q_measured << '\n'
            << "theoretical speedup (plan 2, simplified): " << rep.theoretical_speedup << '\n'
            << "theoretical speedup (plan 2, makespan): " << rep.makespan_speedup << '\n';
    if (rep.max_deviation) summary << "achieved speedup (wall clock): " << rep.achieved_speedup << '\n';
    log << summary.str();
    std::ofstream(prefix + ".report.txt") << summary.str();
    return rep;
}

struct CostRow {
    double a, h, h_star, N;
    double flops_full, flops_simplified, q_g, q_ratio;
    double plan1, plan2, plan2_makespan, plan2_simulated;
};

/// Evaluates the cost model over a grid of cutoffs, spacings and atom counts.
inline std::vector<CostRow> cost_table(const std::vector<double>& cutoffs, const std::vector<double>& spacings,
                                       const std::vector<double>& atoms, double h_star, std::size_t T, std::size_t K) {
    std::vector<CostRow> rows;
    for (const double a : cutoffs)
        for (const double h : spacings)
            for (const double N : atoms) {
                CostRow r{};
                r.a = a;
                r.h = h;
                r.h_star = h_star;
                r.N = N;
                r.flops_full = msm_flops({h_star, h, a, 2, 3, N, 0.0});
                r.flops_simplified = msm_flops_simplified(a, h, N);
                r.q_g = cutoff_flops(a, h_star, N);
                r.q_ratio = r.flops_simplified / r.q_g;
                r.plan1 = plan1_speedup(r.q_ratio);
                r.plan2 = plan2_speedup(r.q_ratio, double(T), double(K));
                r.plan2_makespan = plan2_speedup_makespan(r.q_ratio, double(T), double(K));
                r.plan2_simulated = simulate_schedule(2, T, T, K, r.q_ratio, 1.0).speedup;
                rows.push_back(r);
            }
    return rows;
}

inline void write_cost_csv(std::ostream& out, const std::vector<CostRow>& rows) {
    out << "a,h,h_star,N,flops_full,flops_simplified,Q_G,Q_F/G,plan1_speedup,plan2_speedup,"
           "plan2_makespan_speedup,plan2_simulated_speedup\n";
    out << std::setprecision(10);
    for (const auto& r : rows)
        out << r.a << ',' << r.h << ',' << r.h_star << ',' << r.N << ',' << r.flops_full << ',' << r.flops_simplified
            << ',' << r.q_g << ',' << r.q_ratio << ',' << r.plan1 << ',' << r.plan2 << ',' << r.plan2_makespan << ','
            << r.plan2_simulated << '\n';
}

struct BenchResult {
    double msm_seconds = 0;
    double cutoff_seconds = 0;
    double measured_ratio = 0;
    double analytic_ratio = 0;
};

/// Times MSM against the cutoff method on one random system and compares
/// the runtime ratio with the flop-model ratio for the same density.
inline BenchResult run_bench(std::size_t atoms, double box, int repeats, double a, double h, std::uint64_t seed) {
    ClusterSpec spec;
    spec.atoms = atoms;
    spec.box = box;
    spec.min_separation = std::min(1.0, 0.5 * box / std::cbrt(double(atoms)));
    spec.seed = seed;
    const auto s = random_cluster(spec);
    MsmParams mp;
    mp.a = a;
    mp.h = h;
    const auto list = build_neighbor_list(s, a, 0.0);
    BenchResult out;
    for (int r = 0; r < repeats; ++r) {
        auto t0 = std::chrono::steady_clock::now();
        const auto fm = msm_energy_forces(s, mp, &list);
        out.msm_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        t0 = std::chrono::steady_clock::now();
        const auto fc = coulomb_cutoff(s, a, &list);
        out.cutoff_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        (void)fm;
        (void)fc;
    }
    out.msm_seconds /= repeats;
    out.cutoff_seconds /= repeats;
    out.measured_ratio = out.cutoff_seconds > 0 ? out.msm_seconds / out.cutoff_seconds : 0;
    const double h_star = box / std::cbrt(double(atoms));
    out.analytic_ratio = msm_flops_simplified(a, h, 1.0) / cutoff_flops(a, h_star, 1.0);
    return out;
}

}  // namespace pmsm

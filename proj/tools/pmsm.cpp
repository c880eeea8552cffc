// pmsm command-line front end: run, parareal, cost, bench.
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pmsm/pmsm.hpp"

namespace {

// one --key option per configuration key, plus --config
void add_config_options(CLI::App* cmd, std::string& config_file, std::map<std::string, std::string>& overrides) {
    cmd->add_option("--config", config_file, "key = value configuration file");
    for (const auto& [key, def] : pmsm::config_defaults()) {
        auto* opt = cmd->add_option("--" + key, overrides[key], "default: " + (def.empty() ? "(none)" : def));
        opt->type_name("VALUE");
    }
}

pmsm::RunConfig build_config(const std::string& config_file, const std::map<std::string, std::string>& overrides,
                             const CLI::App* cmd) {
    pmsm::RunConfig cfg;
    if (!config_file.empty()) cfg.merge(pmsm::parse_key_values_file(config_file));
    pmsm::KeyValues given;
    for (const auto& [key, value] : overrides)
        if (cmd->count("--" + key) > 0) given[key] = value;
    cfg.merge(given);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parareal multilevel summation molecular dynamics"};
    app.set_version_flag("--version", std::string(pmsm::VERSION));
    app.require_subcommand(1);

    std::string run_config, par_config;
    std::map<std::string, std::string> run_over, par_over;
    auto* run = app.add_subcommand("run", "sequential simulation");
    add_config_options(run, run_config, run_over);
    auto* par = app.add_subcommand("parareal", "parareal simulation with convergence report");
    add_config_options(par, par_config, par_over);

    std::vector<double> cost_a{12}, cost_h{2}, cost_n{1, 1000, 1000000};
    double cost_hstar = 1.0;
    std::size_t cost_T = 600, cost_K = 2;
    auto* cost = app.add_subcommand("cost", "cost-model table as CSV");
    cost->add_option("--cutoff", cost_a, "cutoff values [A]")->expected(1, -1);
    cost->add_option("--spacing", cost_h, "grid spacings [A]")->expected(1, -1);
    cost->add_option("--N", cost_n, "atom counts")->expected(1, -1);
    cost->add_option("--h-star", cost_hstar, "mean nearest-neighbor distance [A]");
    cost->add_option("--T", cost_T, "fine steps");
    cost->add_option("--K", cost_K, "parareal iterations");

    std::size_t bench_atoms = 1000;
    double bench_box = 50, bench_a = 12, bench_h = 2;
    int bench_repeats = 3;
    std::uint64_t bench_seed = 1;
    auto* bench = app.add_subcommand("bench", "measured MSM / cutoff runtime ratio");
    bench->add_option("--atoms", bench_atoms);
    bench->add_option("--box", bench_box, "[A]");
    bench->add_option("--cutoff", bench_a, "[A]");
    bench->add_option("--spacing", bench_h, "[A]");
    bench->add_option("--repeats", bench_repeats);
    bench->add_option("--seed", bench_seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? pmsm::exit_ok : pmsm::exit_parse;
    }

    try {
        if (*run) {
            pmsm::run_sequential(build_config(run_config, run_over, run));
        } else if (*par) {
            const auto rep = pmsm::run_parareal(build_config(par_config, par_over, par));
            if (!rep.result.all_converged()) return pmsm::exit_nonconvergence;
        } else if (*cost) {
            pmsm::write_cost_csv(std::cout, pmsm::cost_table(cost_a, cost_h, cost_n, cost_hstar, cost_T, cost_K));
        } else if (*bench) {
            const auto r = pmsm::run_bench(bench_atoms, bench_box, bench_repeats, bench_a, bench_h, bench_seed);
            std::cout << "atoms,box,msm_seconds,cutoff_seconds,measured_ratio,model_ratio\n"
                      << bench_atoms << ',' << bench_box << ',' << r.msm_seconds << ',' << r.cutoff_seconds << ','
                      << r.measured_ratio << ',' << r.analytic_ratio << '\n';
        }
    } catch (const pmsm::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return pmsm::exit_parse;
    } catch (const pmsm::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return pmsm::exit_parse;
    } catch (const pmsm::BlowUpError& e) {
        std::cerr << e.what() << '\n';
        return pmsm::exit_blowup;
    } catch (const pmsm::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return pmsm::exit_failure;
    }
    return pmsm::exit_ok;
}

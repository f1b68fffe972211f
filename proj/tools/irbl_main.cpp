#include "irbl/config.hpp"
#include "irbl/error.hpp"
#include "irbl/report_io.hpp"
#include "irbl/rng.hpp"
#include "irbl/suite.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

irbl::config::ExperimentConfig load(const std::string& path, const std::optional<std::uint64_t>& seed,
                                    const std::optional<std::string>& out, bool occlusion) {
    std::ifstream f(path);
    if (!f) throw irbl::ConfigError("<file>", "cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    auto cfg = irbl::config::parse_config(ss.str());
    if (seed) cfg.seeds = {*seed};
    if (out) cfg.output = *out;
    if (occlusion) cfg.sim.occlusion = true;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decentralized multi-robot navigation simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    int workers = 1;
    bool occlusion = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("config", config_path, "JSON config file")->required();
        cmd->add_option("--seed", seed, "Override the seed list with a single seed");
        cmd->add_option("--out", out, "Output directory");
        cmd->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
        cmd->add_flag("--occlusion", occlusion, "Enable occlusion ray casting");
    };
    auto* run = app.add_subcommand("run", "Run the configured scenario once per seed");
    add_common(run);
    auto* suite = app.add_subcommand("suite", "Run the scenario x FoV x size x seed sweep");
    add_common(suite);
    auto* trav = app.add_subcommand("traversability", "Estimate the mean free path of the scenario");
    add_common(trav);
    auto* list = app.add_subcommand("list-scenarios", "Print the scenario generators");

    CLI11_PARSE(app, argc, argv);

    try {
        if (list->parsed()) {
            for (const auto& k : irbl::sim::scenario_kinds()) std::cout << k << "\n";
            return 0;
        }
        const auto cfg = load(config_path, seed, out, occlusion);
        if (trav->parsed()) {
            for (auto s : cfg.seeds) {
                const auto world = irbl::sim::generate_world(cfg.scenario, cfg.delta, s);
                irbl::sim::TraversabilityOptions opt;
                opt.trials = cfg.sim.traversability_trials;
                opt.probe_radius = cfg.delta;
                irbl::Rng rng = irbl::Rng::stream(s, 7);
                const auto r = irbl::sim::traversability(world, opt, rng);
                std::cout << "seed " << s << " tau " << irbl::report::format9(r.tau) << " se "
                          << irbl::report::format9(r.std_error) << " trials " << r.trials << "\n";
            }
            return 0;
        }
        const int failed = run->parsed() ? irbl::suite::run_single(cfg, cfg.output, workers)
                                         : irbl::suite::run_suite(cfg, cfg.output, workers);
        std::cout << "wrote " << cfg.output << (failed ? " (" + std::to_string(failed) + " failed runs)" : "") << "\n";
        return 0;
    } catch (const irbl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

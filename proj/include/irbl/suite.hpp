#pragma once

#include "irbl/config.hpp"
#include "irbl/sim.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace irbl::suite {

struct RunSpec {
    sim::ScenarioParams scenario;
    geom::FovSpec fov;
    double delta;
    std::uint64_t seed;

    std::string name() const;  // <scenario>_<fov>_d<delta>_s<seed>
};

/// Every scenario × FoV × δ × seed combination of the suite section, in that nesting order.
std::vector<RunSpec> expand(const config::ExperimentConfig& cfg);

/// The single run described by the top-level fields.
RunSpec single(const config::ExperimentConfig& cfg, std::uint64_t seed);

sim::RunSetup make_setup(const config::ExperimentConfig& cfg, const RunSpec& spec, int workers = 1);

struct BatchResult {
    std::vector<std::optional<sim::RunReport>> reports;
    std::vector<std::string> errors;  // empty when the run succeeded
};

/// Runs the specs on a pool of `workers` threads; results are indexed like `specs`.
BatchResult run_batch(const config::ExperimentConfig& cfg, const std::vector<RunSpec>& specs, int workers);

/// Runs and writes per-run directories, summary.csv and config.json under `out`.
/// Returns the number of failed runs.
int run_suite(const config::ExperimentConfig& cfg, const std::filesystem::path& out, int workers);

/// Runs the top-level scenario once per seed; same outputs as run_suite.
int run_single(const config::ExperimentConfig& cfg, const std::filesystem::path& out, int workers);

}  // namespace irbl::suite

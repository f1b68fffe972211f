#pragma once

#include "irbl/ctl.hpp"
#include "irbl/geom.hpp"
#include "irbl/lloyd.hpp"
#include "irbl/sim.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace irbl::config {

/// Named sensor presets: "lim" {180,59,−20}, "half" {180,180,−90},
/// "full" {180,360,0}, "2d" {360,0,0}.
geom::FovSpec fov_preset(const std::string& name);

/// Preset name when `fov` matches one, otherwise "fx_fz_fa".
std::string fov_label(const geom::FovSpec& fov);

struct SuiteParams {
    std::vector<sim::ScenarioParams> scenarios;  // empty: the top-level scenario
    std::vector<geom::FovSpec> fovs{fov_preset("lim"), fov_preset("half"), fov_preset("full"), fov_preset("2d")};
    std::vector<double> deltas{0.2, 0.5, 1.0};

    friend bool operator==(const SuiteParams&, const SuiteParams&) = default;
};

struct ExperimentConfig {
    sim::ScenarioParams scenario;
    double delta{0.2};
    geom::FovSpec fov{180.0, 180.0, -90.0};
    lloyd::RuleParams rules;
    double epsilon_sep{0.5};
    double d_v{0.1};  // stored, unused by the algorithm
    ctl::MpcConfig controller;
    sim::SimParams sim;
    std::vector<std::uint64_t> seeds{1};
    std::string output{"out"};
    SuiteParams suite;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Strict JSON (comments allowed). Unknown keys, wrong types and out-of-range
/// values raise ConfigError naming the key path.
ExperimentConfig parse_config(const std::string& text);

/// Full JSON form of every field; parse_config(emit_config(c)) == c.
std::string emit_config(const ExperimentConfig& cfg);

void validate(const ExperimentConfig& cfg);

}  // namespace irbl::config

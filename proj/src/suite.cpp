#include "irbl/suite.hpp"

#include "irbl/report_io.hpp"

#include <atomic>
#include <chrono>
#include <json.hpp>
#include <thread>

namespace irbl::suite {

std::string RunSpec::name() const {
    return scenario.kind + "_" + config::fov_label(fov) + "_d" + report::format9(delta) + "_s" + std::to_string(seed);
}

std::vector<RunSpec> expand(const config::ExperimentConfig& cfg) {
    std::vector<sim::ScenarioParams> scenarios = cfg.suite.scenarios;
    if (scenarios.empty()) scenarios.push_back(cfg.scenario);
    std::vector<RunSpec> out;
    for (const auto& s : scenarios)
        for (const auto& f : cfg.suite.fovs)
            for (double d : cfg.suite.deltas)
                for (auto seed : cfg.seeds) out.push_back({s, f, d, seed});
    return out;
}

RunSpec single(const config::ExperimentConfig& cfg, std::uint64_t seed) { return {cfg.scenario, cfg.fov, cfg.delta, seed}; }

sim::RunSetup make_setup(const config::ExperimentConfig& cfg, const RunSpec& spec, int workers) {
    sim::RunSetup s;
    s.world = sim::generate_world(spec.scenario, spec.delta, spec.seed);
    s.delta = spec.delta;
    s.fov = spec.fov;
    s.pipeline.rules = cfg.rules;
    s.pipeline.cwvd.epsilon_sep = cfg.epsilon_sep;
    s.pipeline.obstacle_margin = cfg.sim.obstacle_margin;
    s.controller = cfg.controller;
    s.sim = cfg.sim;
    s.seed = spec.seed;
    s.workers = workers;
    return s;
}

BatchResult run_batch(const config::ExperimentConfig& cfg, const std::vector<RunSpec>& specs, int workers) {
    BatchResult result;
    result.reports.resize(specs.size());
    result.errors.resize(specs.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next++) < specs.size();) {
            try {
                result.reports[i] = sim::run_world(make_setup(cfg, specs[i], specs.size() == 1 ? workers : 1));
            } catch (const std::exception& e) {
                result.errors[i] = e.what();
            }
        }
    };
    const int n = std::max(1, std::min<int>(workers, static_cast<int>(specs.size())));
    if (n == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    return result;
}

namespace {

std::size_t agent_count(const RunSpec& spec) {
    if (spec.scenario.kind == "custom") return spec.scenario.agents.size();
    return static_cast<std::size_t>(std::max(spec.scenario.n, 0));
}

int emit(const config::ExperimentConfig& cfg, const std::vector<RunSpec>& specs, const std::filesystem::path& out,
         int workers) {
    std::filesystem::create_directories(out);
    report::write_text(out / "config.json", config::emit_config(cfg));
    const auto start = std::chrono::steady_clock::now();
    const BatchResult batch = run_batch(cfg, specs, workers);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::string summary = report::summary_header();
    nlohmann::json failures = nlohmann::json::object();
    int failed = 0;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto& spec = specs[i];
        const auto& rep = batch.reports[i];
        if (rep) {
            report::write_run(out / spec.name(), *rep);
        } else {
            ++failed;
            failures[spec.name()] = batch.errors[i];
        }
        summary += report::summary_rows({spec.scenario.kind, config::fov_label(spec.fov), spec.delta, spec.seed},
                                        rep ? &*rep : nullptr, agent_count(spec));
    }
    report::write_text(out / "summary.csv", summary);
    if (failed) report::write_text(out / "failures.json", failures.dump(2) + "\n");
    report::write_text(out / "timing.json",
                       nlohmann::json{{"wall_seconds", wall}, {"runs", specs.size()}, {"workers", workers}}.dump(2) +
                           "\n");
    return failed;
}

}  // namespace

int run_suite(const config::ExperimentConfig& cfg, const std::filesystem::path& out, int workers) {
    return emit(cfg, expand(cfg), out, workers);
}

int run_single(const config::ExperimentConfig& cfg, const std::filesystem::path& out, int workers) {
    std::vector<RunSpec> specs;
    for (auto seed : cfg.seeds) specs.push_back(single(cfg, seed));
    return emit(cfg, specs, out, workers);
}

}  // namespace irbl::suite

#include "irbl/config.hpp"
#include "irbl/error.hpp"
#include "irbl/report_io.hpp"
#include "irbl/suite.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace irbl;
using namespace irbl::config;
namespace fs = std::filesystem;

namespace {

const char* kTiny = R"({
  // one agent, two meters
  "scenario": {"kind": "custom", "agents": [{"start": [0, 0, 2], "goal": [2, 0, 2]}]},
  "sim": {"t_max": 20, "traversability_trials": 100},
  "seeds": [1, 2]
})";

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("irbl_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

int shell(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string capture(const std::string& cmd) {
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    char buf[256];
    while (fgets(buf, sizeof buf, pipe)) out += buf;
    pclose(pipe);
    return out;
}

}  // namespace

TEST_CASE("minimal config takes the documented defaults") {
    const ExperimentConfig c = parse_config(R"({"scenario": "circle", "N": 10})");
    CHECK(c.scenario.kind == "circle");
    CHECK(c.scenario.n == 10);
    CHECK(c.rules.d_u == 0.3);
    CHECK(c.rules.beta_D == 0.5);
    CHECK(c.epsilon_sep == 0.5);
    CHECK(c.rules.d_1 == 1.0);
    CHECK(c.rules.d_2 == 1.0);
    CHECK(c.rules.d_3 == 1.0);
    CHECK(c.rules.d_4 == 1.0);
    CHECK(c.sim.sensing_radius == 5.0);
    CHECK(c.rules.k_wp == 1.0);
    CHECK(c.rules.k_beta == 1.0);
    CHECK(c.seeds == std::vector<std::uint64_t>{1});
}

TEST_CASE("config errors name the key") {
    auto path_of = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const ConfigError& e) {
            return e.path();
        }
        return std::string("<none>");
    };
    CHECK(path_of(R"({"fov": {"f_x": 400, "f_z": 0, "f_a": 0}})") == "fov.f_x");
    CHECK(path_of(R"({"fov": "wide"})") == "fov");
    CHECK(path_of(R"({"bogus": 1})") == "bogus");
    CHECK(path_of(R"({"rules": {"d_u": -1}})") == "rules.d_u");
    CHECK(path_of(R"({"delta": "big"})") == "delta");
    CHECK(path_of(R"({"seeds": []})") == "seeds");
    CHECK(path_of(R"({"scenario": "maze"})") == "scenario.kind");
    CHECK(path_of(R"({"controller": {"horizon": 1}})") == "controller.horizon");
    CHECK_THROWS_AS(parse_config("{"), ConfigError);
}

TEST_CASE("emit and parse round trip") {
    ExperimentConfig c = parse_config(R"({"scenario": "forest", "N": 5, "fov": "lim", "delta": 0.5})");
    c.seeds = {3, 4, 5};
    c.controller.w_u = 0.125;
    c.suite.deltas = {0.2};
    CHECK(parse_config(emit_config(c)) == c);
    const ExperimentConfig custom = parse_config(kTiny);
    CHECK(parse_config(emit_config(custom)) == custom);
    CHECK(emit_config(parse_config(emit_config(custom))) == emit_config(custom));
}

TEST_CASE("fov presets and labels") {
    CHECK(fov_preset("lim") == geom::FovSpec{180, 59, -20});
    CHECK(fov_preset("half") == geom::FovSpec{180, 180, -90});
    CHECK(fov_preset("full") == geom::FovSpec{180, 360, 0});
    CHECK(fov_preset("2d") == geom::FovSpec{360, 0, 0});
    CHECK(fov_label({180, 59, -20}) == "lim");
    CHECK(fov_label({120, 30, 5}) == "120_30_5");
}

TEST_CASE("suite expansion counts") {
    ExperimentConfig c = parse_config(R"({"scenario": "circle", "N": 10, "seeds": [1, 2]})");
    CHECK(suite::expand(c).size() == 4 * 3 * 2);
    c.seeds = {1};
    CHECK(suite::expand(c).size() == 12);
}

TEST_CASE("single run writes a report and trajectories") {
    ExperimentConfig c = parse_config(kTiny);
    c.seeds = {1};
    const fs::path out = scratch("single");
    CHECK(suite::run_single(c, out, 1) == 0);
    const fs::path dir = out / suite::single(c, 1).name();
    CHECK(fs::exists(dir / "report.json"));
    CHECK(fs::exists(dir / "traj_0.csv"));
    CHECK(slurp(dir / "traj_0.csv").rfind("t,x,y,z,vx,vy,vz,ax,ay,az,yaw\n", 0) == 0);
    CHECK(fs::exists(out / "config.json"));
    const std::string summary = slurp(out / "summary.csv");
    CHECK(summary.rfind("scenario,fov,delta,seed,agent,tau,l,t,vbar,vmax,dmin,domin,sr_acc,sr_conv,sr_safe\n", 0) == 0);
    CHECK(count_lines(summary) == 2);
    fs::remove_all(out);
}

TEST_CASE("suite rows and byte-identical reruns") {
    ExperimentConfig c = parse_config(kTiny);
    c.suite.fovs = {fov_preset("half"), fov_preset("2d")};
    c.suite.deltas = {0.2, 0.3};
    const fs::path a = scratch("suite_a"), b = scratch("suite_b");
    CHECK(suite::run_suite(c, a, 1) == 0);
    CHECK(suite::run_suite(c, b, 3) == 0);
    const std::string sa = slurp(a / "summary.csv");
    CHECK(count_lines(sa) == 1 + 2 * 2 * 2 * 1);
    CHECK(sa == slurp(b / "summary.csv"));
    for (const auto& spec : suite::expand(c))
        CHECK(slurp(a / spec.name() / "report.json") == slurp(b / spec.name() / "report.json"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("number formatting") {
    CHECK(report::format9(1.0 / 3.0) == "0.333333333");
    CHECK(report::format9(std::numeric_limits<double>::infinity()).empty());
    CHECK(report::round9(0.1234567891234) == 0.123456789);
}

TEST_CASE("command line") {
    const std::string bin = IRBL_BIN;
    CHECK(capture(bin + " list-scenarios") == "circle\ncircle_obstacles\nforest\ncustom\n");

    const fs::path dir = scratch("cmd");
    fs::create_directories(dir);
    report::write_text(dir / "bad.json", R"({"fov": {"f_x": 400, "f_z": 0, "f_a": 0}})");
    CHECK(shell(bin + " run " + (dir / "bad.json").string() + " > /dev/null 2>&1") == 2);
    CHECK(shell(bin + " run " + (dir / "missing.json").string() + " > /dev/null 2>&1") == 2);
    CHECK(shell(bin + " > /dev/null 2>&1") != 0);

    report::write_text(dir / "tiny.json", kTiny);
    const std::string trav = capture(bin + " traversability " + (dir / "tiny.json").string() + " --seed 4");
    CHECK(trav.rfind("seed 4 tau ", 0) == 0);
    CHECK(shell(bin + " run " + (dir / "tiny.json").string() + " --seed 1 --out " + (dir / "out").string() +
                " > /dev/null") == 0);
    CHECK(fs::exists(dir / "out" / "summary.csv"));
    fs::remove_all(dir);
}

#include "irbl/config.hpp"

#include "irbl/error.hpp"

#include <json.hpp>

#include <cmath>
#include <set>
#include <sstream>

namespace irbl::config {

using json = nlohmann::json;

geom::FovSpec fov_preset(const std::string& name) {
    if (name == "lim") return {180.0, 59.0, -20.0};
    if (name == "half") return {180.0, 180.0, -90.0};
    if (name == "full") return {180.0, 360.0, 0.0};
    if (name == "2d") return {360.0, 0.0, 0.0};
    throw ConfigError("fov", "unknown preset '" + name + "'");
}

std::string fov_label(const geom::FovSpec& fov) {
    for (const char* name : {"lim", "half", "full", "2d"})
        if (fov_preset(name) == fov) return name;
    std::ostringstream os;
    os << fov.f_x << "_" << fov.f_z << "_" << fov.f_a;
    return os.str();
}

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

double number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
    return v;
}

int integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
    return j.get<int>();
}

bool boolean(const json& j, const std::string& path) {
    if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
    return j.get<bool>();
}

std::string text(const json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError(path, "expected a string");
    return j.get<std::string>();
}

geom::Vec3 vec3(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(path, "expected [x, y, z]");
    return {number(j[0], path + "[0]"), number(j[1], path + "[1]"), number(j[2], path + "[2]")};
}

// Object reader that rejects keys nobody asked for.
class Object {
public:
    Object(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    template <class F>
    void read(const std::string& key, F&& f) {
        seen_.insert(key);
        if (j_.contains(key)) f(j_.at(key), join(path_, key));
    }

    void num(const std::string& key, double& out) {
        read(key, [&](const json& v, const std::string& p) { out = number(v, p); });
    }
    void integer_field(const std::string& key, int& out) {
        read(key, [&](const json& v, const std::string& p) { out = integer(v, p); });
    }
    void flag(const std::string& key, bool& out) {
        read(key, [&](const json& v, const std::string& p) { out = boolean(v, p); });
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.contains(it.key())) throw ConfigError(join(path_, it.key()), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

geom::FovSpec read_fov(const json& j, const std::string& path) {
    if (j.is_string()) {
        try {
            return fov_preset(j.get<std::string>());
        } catch (const ConfigError&) {
            throw ConfigError(path, "unknown preset '" + j.get<std::string>() + "'");
        }
    }
    geom::FovSpec f;
    Object o(j, path);
    o.num("f_x", f.f_x);
    o.num("f_z", f.f_z);
    o.num("f_a", f.f_a);
    o.finish();
    return f;
}

sim::Arena read_arena(const json& j, const std::string& path) {
    sim::Arena a;
    Object o(j, path);
    o.read("lo", [&](const json& v, const std::string& p) { a.lo = vec3(v, p); });
    o.read("hi", [&](const json& v, const std::string& p) { a.hi = vec3(v, p); });
    o.flag("disk", a.disk);
    o.num("disk_x", a.disk_x);
    o.num("disk_y", a.disk_y);
    o.num("disk_radius", a.disk_radius);
    o.finish();
    return a;
}

template <class T, class F>
std::vector<T> read_list(const json& j, const std::string& path, F&& item) {
    if (!j.is_array()) throw ConfigError(path, "expected a list");
    std::vector<T> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(item(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

sim::ScenarioParams read_scenario(const json& j, const std::string& path) {
    sim::ScenarioParams s;
    if (j.is_string()) {
        s.kind = j.get<std::string>();
        return s;
    }
    Object o(j, path);
    o.read("kind", [&](const json& v, const std::string& p) { s.kind = text(v, p); });
    o.integer_field("n", s.n);
    o.num("circle_radius", s.circle_radius);
    o.num("altitude", s.altitude);
    o.num("jitter", s.jitter);
    o.integer_field("obstacle_count", s.obstacle_count);
    o.num("obstacle_radius_min", s.obstacle_radius_min);
    o.num("obstacle_radius_max", s.obstacle_radius_max);
    o.num("obstacle_spacing", s.obstacle_spacing);
    o.num("obstacle_keepout", s.obstacle_keepout);
    o.num("forest_spacing", s.forest_spacing);
    o.num("forest_length", s.forest_length);
    o.num("forest_width", s.forest_width);
    o.num("agent_spacing", s.agent_spacing);
    o.num("ceiling", s.ceiling);
    o.num("arena_margin", s.arena_margin);
    o.read("agents", [&](const json& v, const std::string& p) {
        s.agents = read_list<sim::AgentSpec>(v, p, [](const json& e, const std::string& ep) {
            sim::AgentSpec a;
            Object ao(e, ep);
            ao.read("start", [&](const json& x, const std::string& xp) { a.start = vec3(x, xp); });
            ao.read("goal", [&](const json& x, const std::string& xp) { a.goal = vec3(x, xp); });
            ao.num("yaw", a.yaw);
            ao.finish();
            return a;
        });
    });
    o.read("cylinders", [&](const json& v, const std::string& p) {
        s.cylinders = read_list<sim::Cylinder>(v, p, [](const json& e, const std::string& ep) {
            sim::Cylinder c;
            Object co(e, ep);
            co.num("x", c.x);
            co.num("y", c.y);
            co.num("radius", c.radius);
            co.num("z_min", c.z_min);
            co.num("z_max", c.z_max);
            co.finish();
            if (!(c.radius > 0.0)) throw ConfigError(ep + ".radius", "must be > 0");
            if (!(c.z_max > c.z_min)) throw ConfigError(ep + ".z_max", "must exceed z_min");
            return c;
        });
    });
    o.read("spheres", [&](const json& v, const std::string& p) {
        s.spheres = read_list<sim::Sphere>(v, p, [](const json& e, const std::string& ep) {
            sim::Sphere sp;
            Object so(e, ep);
            so.read("center", [&](const json& x, const std::string& xp) { sp.center = vec3(x, xp); });
            so.num("radius", sp.radius);
            so.finish();
            if (!(sp.radius > 0.0)) throw ConfigError(ep + ".radius", "must be > 0");
            return sp;
        });
    });
    o.read("arena", [&](const json& v, const std::string& p) { s.arena = read_arena(v, p); });
    o.finish();
    return s;
}

void read_rules(const json& j, ExperimentConfig& c) {
    Object o(j, "rules");
    auto& r = c.rules;
    o.num("beta_D", r.beta_D);
    o.num("k_beta", r.k_beta);
    o.num("k_wp", r.k_wp);
    o.num("d_1", r.d_1);
    o.num("d_2", r.d_2);
    o.num("d_3", r.d_3);
    o.num("d_4", r.d_4);
    o.num("d_u", r.d_u);
    o.num("epsilon_rot", r.epsilon_rot);
    o.num("beta_cap", r.beta_cap);
    o.num("epsilon_sep", c.epsilon_sep);
    o.num("d_v", c.d_v);
    o.num("r_s", c.sim.sensing_radius);
    o.finish();
}

void read_controller(const json& j, ctl::MpcConfig& m) {
    Object o(j, "controller");
    o.integer_field("horizon", m.horizon);
    o.num("dt", m.dt);
    o.num("w_p", m.w_p);
    o.num("w_h", m.w_h);
    o.num("w_u", m.w_u);
    o.num("v_max", m.v_max);
    o.num("a_max", m.a_max);
    o.num("j_max", m.j_max);
    o.num("yaw_rate_max", m.yaw_rate_max);
    o.num("yaw_gain", m.yaw_gain);
    o.integer_field("max_iterations", m.max_iterations);
    o.finish();
}

void read_sim(const json& j, sim::SimParams& s) {
    Object o(j, "sim");
    o.num("dt_physics", s.dt_physics);
    o.num("dt_control", s.dt_control);
    o.num("t_max", s.t_max);
    o.num("d_goal", s.d_goal);
    o.num("settle_speed", s.settle_speed);
    o.num("resolution", s.resolution);
    o.num("sigma_obs", s.sigma_obs);
    o.flag("occlusion", s.occlusion);
    o.num("surface_spacing", s.surface_spacing);
    o.num("cell_size", s.cell_size);
    o.num("replan_period", s.replan_period);
    o.num("obstacle_margin", s.obstacle_margin);
    o.integer_field("traversability_trials", s.traversability_trials);
    o.flag("record_trajectories", s.record_trajectories);
    o.finish();
}

void read_suite(const json& j, SuiteParams& s) {
    Object o(j, "suite");
    o.read("scenarios", [&](const json& v, const std::string& p) {
        s.scenarios = read_list<sim::ScenarioParams>(v, p, read_scenario);
    });
    o.read("fovs", [&](const json& v, const std::string& p) { s.fovs = read_list<geom::FovSpec>(v, p, read_fov); });
    o.read("deltas", [&](const json& v, const std::string& p) { s.deltas = read_list<double>(v, p, number); });
    o.finish();
}

json emit_scenario(const sim::ScenarioParams& s) {
    json j = {{"kind", s.kind},
              {"n", s.n},
              {"circle_radius", s.circle_radius},
              {"altitude", s.altitude},
              {"jitter", s.jitter},
              {"obstacle_count", s.obstacle_count},
              {"obstacle_radius_min", s.obstacle_radius_min},
              {"obstacle_radius_max", s.obstacle_radius_max},
              {"obstacle_spacing", s.obstacle_spacing},
              {"obstacle_keepout", s.obstacle_keepout},
              {"forest_spacing", s.forest_spacing},
              {"forest_length", s.forest_length},
              {"forest_width", s.forest_width},
              {"agent_spacing", s.agent_spacing},
              {"ceiling", s.ceiling},
              {"arena_margin", s.arena_margin}};
    auto v3 = [](const geom::Vec3& v) { return json::array({v.x(), v.y(), v.z()}); };
    json agents = json::array();
    for (const auto& a : s.agents) agents.push_back({{"start", v3(a.start)}, {"goal", v3(a.goal)}, {"yaw", a.yaw}});
    json cyl = json::array();
    for (const auto& c : s.cylinders)
        cyl.push_back({{"x", c.x}, {"y", c.y}, {"radius", c.radius}, {"z_min", c.z_min}, {"z_max", c.z_max}});
    json sph = json::array();
    for (const auto& sp : s.spheres) sph.push_back({{"center", v3(sp.center)}, {"radius", sp.radius}});
    j["agents"] = agents;
    j["cylinders"] = cyl;
    j["spheres"] = sph;
    if (s.arena) {
        const auto& a = *s.arena;
        j["arena"] = {{"lo", v3(a.lo)},         {"hi", v3(a.hi)},         {"disk", a.disk},
                      {"disk_x", a.disk_x},     {"disk_y", a.disk_y},     {"disk_radius", a.disk_radius}};
    }
    return j;
}

json emit_fov(const geom::FovSpec& f) { return {{"f_x", f.f_x}, {"f_z", f.f_z}, {"f_a", f.f_a}}; }

}  // namespace

ExperimentConfig parse_config(const std::string& input) {
    json root;
    try {
        root = json::parse(input, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
    }
    ExperimentConfig c;
    Object o(root, "");
    o.read("scenario", [&](const json& v, const std::string& p) { c.scenario = read_scenario(v, p); });
    o.read("N", [&](const json& v, const std::string& p) { c.scenario.n = integer(v, p); });
    o.num("delta", c.delta);
    o.read("fov", [&](const json& v, const std::string& p) { c.fov = read_fov(v, p); });
    o.read("rules", [&](const json& v, const std::string&) { read_rules(v, c); });
    o.read("controller", [&](const json& v, const std::string&) { read_controller(v, c.controller); });
    o.read("sim", [&](const json& v, const std::string&) { read_sim(v, c.sim); });
    o.read("seeds", [&](const json& v, const std::string& p) {
        c.seeds = read_list<std::uint64_t>(v, p, [](const json& e, const std::string& ep) {
            if (!e.is_number_unsigned()) throw ConfigError(ep, "expected a non-negative integer");
            return e.get<std::uint64_t>();
        });
    });
    o.read("output", [&](const json& v, const std::string& p) { c.output = text(v, p); });
    o.read("suite", [&](const json& v, const std::string&) { read_suite(v, c.suite); });
    o.finish();
    validate(c);
    return c;
}

void validate(const ExperimentConfig& c) {
    c.fov.validate();
    if (!(c.delta > 0.0)) throw ConfigError("delta", "must be > 0");
    c.rules.validate();
    if (!(c.epsilon_sep >= 0.0 && c.epsilon_sep <= 1.0)) throw ConfigError("rules.epsilon_sep", "must be in [0, 1]");
    if (!(c.d_v >= 0.0)) throw ConfigError("rules.d_v", "must be >= 0");
    c.controller.validate();
    c.sim.validate();
    if (c.seeds.empty()) throw ConfigError("seeds", "need at least one seed");
    if (c.output.empty()) throw ConfigError("output", "must not be empty");
    for (std::size_t i = 0; i < c.suite.deltas.size(); ++i)
        if (!(c.suite.deltas[i] > 0.0)) throw ConfigError("suite.deltas[" + std::to_string(i) + "]", "must be > 0");
    for (const auto& f : c.suite.fovs) f.validate();
    if (c.suite.fovs.empty()) throw ConfigError("suite.fovs", "need at least one entry");
    if (c.suite.deltas.empty()) throw ConfigError("suite.deltas", "need at least one entry");
    // Scenario generator constraints are checked on a throwaway world.
    sim::generate_world(c.scenario, c.delta, c.seeds.front());
    for (const auto& s : c.suite.scenarios) sim::generate_world(s, c.delta, c.seeds.front());
}

std::string emit_config(const ExperimentConfig& c) {
    json j;
    j["scenario"] = emit_scenario(c.scenario);
    j["delta"] = c.delta;
    j["fov"] = emit_fov(c.fov);
    const auto& r = c.rules;
    j["rules"] = {{"beta_D", r.beta_D}, {"k_beta", r.k_beta},   {"k_wp", r.k_wp},
                  {"d_1", r.d_1},       {"d_2", r.d_2},         {"d_3", r.d_3},
                  {"d_4", r.d_4},       {"d_u", r.d_u},         {"epsilon_rot", r.epsilon_rot},
                  {"beta_cap", r.beta_cap}, {"epsilon_sep", c.epsilon_sep}, {"d_v", c.d_v},
                  {"r_s", c.sim.sensing_radius}};
    const auto& m = c.controller;
    j["controller"] = {{"horizon", m.horizon}, {"dt", m.dt},           {"w_p", m.w_p},
                       {"w_h", m.w_h},         {"w_u", m.w_u},         {"v_max", m.v_max},
                       {"a_max", m.a_max},     {"j_max", m.j_max},     {"yaw_rate_max", m.yaw_rate_max},
                       {"yaw_gain", m.yaw_gain}, {"max_iterations", m.max_iterations}};
    const auto& s = c.sim;
    j["sim"] = {{"dt_physics", s.dt_physics},
                {"dt_control", s.dt_control},
                {"t_max", s.t_max},
                {"d_goal", s.d_goal},
                {"settle_speed", s.settle_speed},
                {"resolution", s.resolution},
                {"sigma_obs", s.sigma_obs},
                {"occlusion", s.occlusion},
                {"surface_spacing", s.surface_spacing},
                {"cell_size", s.cell_size},
                {"replan_period", s.replan_period},
                {"obstacle_margin", s.obstacle_margin},
                {"traversability_trials", s.traversability_trials},
                {"record_trajectories", s.record_trajectories}};
    j["seeds"] = c.seeds;
    j["output"] = c.output;
    json scen = json::array();
    for (const auto& sp : c.suite.scenarios) scen.push_back(emit_scenario(sp));
    json fovs = json::array();
    for (const auto& f : c.suite.fovs) fovs.push_back(emit_fov(f));
    j["suite"] = {{"scenarios", scen}, {"fovs", fovs}, {"deltas", c.suite.deltas}};
    return j.dump(2) + "\n";
}

}  // namespace irbl::config

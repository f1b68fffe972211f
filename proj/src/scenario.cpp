#include "irbl/error.hpp"
#include "irbl/sim.hpp"

#include <algorithm>
#include <cmath>

namespace irbl::sim {

namespace {

double yaw_toward(const Vec3& from, const Vec3& to) { return std::atan2(to.y() - from.y(), to.x() - from.x()); }

void check_params(const ScenarioParams& p) {
    const auto& kinds = scenario_kinds();
    if (std::find(kinds.begin(), kinds.end(), p.kind) == kinds.end())
        throw ConfigError("scenario.kind", "unknown generator '" + p.kind + "'");
    if (p.kind != "custom" && p.n < 1) throw ConfigError("scenario.n", "must be >= 1");
    if (!(p.circle_radius > 0.0)) throw ConfigError("scenario.circle_radius", "must be > 0");
    if (!(p.jitter >= 0.0)) throw ConfigError("scenario.jitter", "must be >= 0");
    if (p.obstacle_count < 0) throw ConfigError("scenario.obstacle_count", "must be >= 0");
    if (!(p.obstacle_radius_min > 0.0 && p.obstacle_radius_max >= p.obstacle_radius_min))
        throw ConfigError("scenario.obstacle_radius_max", "need 0 < min <= max");
    if (!(p.obstacle_spacing > 0.0)) throw ConfigError("scenario.obstacle_spacing", "must be > 0");
    if (!(p.obstacle_keepout >= 0.0)) throw ConfigError("scenario.obstacle_keepout", "must be >= 0");
    if (!(p.forest_spacing > 0.0)) throw ConfigError("scenario.forest_spacing", "must be > 0");
    if (!(p.forest_length > 0.0)) throw ConfigError("scenario.forest_length", "must be > 0");
    if (!(p.forest_width > 0.0)) throw ConfigError("scenario.forest_width", "must be > 0");
    if (!(p.agent_spacing > 0.0)) throw ConfigError("scenario.agent_spacing", "must be > 0");
    if (!(p.altitude > 0.0 && p.ceiling > p.altitude)) throw ConfigError("scenario.ceiling", "need 0 < altitude < ceiling");
    if (!(p.arena_margin >= 0.0)) throw ConfigError("scenario.arena_margin", "must be >= 0");
}

// Dart throwing with a fixed attempt budget; stops at `target` obstacles.
void scatter(World& w, const ScenarioParams& p, Rng& rng, double x0, double x1, double y0, double y1,
             std::size_t target, double spacing, bool disk_region, double disk_r) {
    const std::size_t attempts = 20000 + 200 * std::min<std::size_t>(target, 1000);
    for (std::size_t a = 0; a < attempts && w.cylinders.size() < target; ++a) {
        const double x = rng.uniform(x0, x1), y = rng.uniform(y0, y1);
        const double r = rng.uniform(p.obstacle_radius_min, p.obstacle_radius_max);
        if (disk_region && std::hypot(x, y) > disk_r) continue;
        bool ok = true;
        for (const auto& c : w.cylinders)
            if (std::hypot(c.x - x, c.y - y) < spacing) ok = false;
        for (const auto& ag : w.agents) {
            if (std::hypot(ag.start.x() - x, ag.start.y() - y) - r < p.obstacle_keepout) ok = false;
            if (std::hypot(ag.goal.x() - x, ag.goal.y() - y) - r < p.obstacle_keepout) ok = false;
        }
        if (ok) w.cylinders.push_back({x, y, r, 0.0, p.ceiling});
    }
}

void circle_agents(World& w, const ScenarioParams& p, Rng& rng) {
    for (int i = 0; i < p.n; ++i) {
        const double th = 2.0 * M_PI * i / p.n + rng.uniform(-1.0, 1.0) * p.jitter / p.circle_radius;
        const double r = p.circle_radius + rng.uniform(-1.0, 1.0) * p.jitter;
        const Vec3 start(r * std::cos(th), r * std::sin(th), p.altitude);
        const Vec3 goal(-start.x(), -start.y(), p.altitude);
        w.agents.push_back({start, goal, yaw_toward(start, goal)});
    }
    const double half = p.circle_radius + p.jitter + p.arena_margin;
    w.arena.lo = Vec3(-half, -half, 0.0);
    w.arena.hi = Vec3(half, half, p.ceiling);
}

void validate_world(const World& w, double robot_radius) {
    for (std::size_t i = 0; i < w.agents.size(); ++i) {
        const auto& a = w.agents[i];
        if (!w.arena.contains(a.start)) throw ConfigError("scenario.agents", "start outside the arena");
        if (!w.arena.contains(a.goal)) throw ConfigError("scenario.agents", "goal outside the arena");
        if (w.obstacle_distance(a.start) < robot_radius) throw ConfigError("scenario.agents", "start inside an obstacle");
        for (std::size_t j = i + 1; j < w.agents.size(); ++j)
            if ((a.start - w.agents[j].start).norm() <= 2.0 * robot_radius)
                throw ConfigError("scenario.agents", "overlapping starts");
    }
}

}  // namespace

World generate_world(const ScenarioParams& p, double robot_radius, std::uint64_t seed) {
    check_params(p);
    Rng rng = Rng::stream(seed, 1);
    World w;
    w.altitude = p.altitude;

    if (p.kind == "circle") {
        circle_agents(w, p, rng);
    } else if (p.kind == "circle_obstacles") {
        circle_agents(w, p, rng);
        const double r = p.circle_radius - p.obstacle_keepout;
        scatter(w, p, rng, -r, r, -r, r, static_cast<std::size_t>(p.obstacle_count), p.obstacle_spacing, true, r);
    } else if (p.kind == "forest") {
        const double half_l = 0.5 * p.forest_length, half_w = 0.5 * p.forest_width;
        for (int i = 0; i < p.n; ++i) {
            const double x = (i - 0.5 * (p.n - 1)) * p.agent_spacing + rng.uniform(-1.0, 1.0) * p.jitter;
            const Vec3 start(x, -half_l - 2.0, p.altitude);
            const Vec3 goal(x, half_l + 2.0, p.altitude);
            w.agents.push_back({start, goal, yaw_toward(start, goal)});
        }
        const double span = std::max(half_w, 0.5 * p.n * p.agent_spacing);
        w.arena.lo = Vec3(-span - p.arena_margin, -half_l - 2.0 - p.arena_margin, 0.0);
        w.arena.hi = Vec3(span + p.arena_margin, half_l + 2.0 + p.arena_margin, p.ceiling);
        scatter(w, p, rng, -half_w, half_w, -half_l, half_l, SIZE_MAX, p.forest_spacing, false, 0.0);
    } else {
        w.agents = p.agents;
        w.cylinders = p.cylinders;
        w.spheres = p.spheres;
        if (p.arena) w.arena = *p.arena;
        if (w.agents.empty()) throw ConfigError("scenario.agents", "custom scenario needs at least one agent");
    }
    validate_world(w, robot_radius);
    return w;
}

}  // namespace irbl::sim

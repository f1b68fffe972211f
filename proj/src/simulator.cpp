#include "irbl/error.hpp"
#include "irbl/plan.hpp"
#include "irbl/sim.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace irbl::sim {

void SimParams::validate() const {
    auto positive = [](double v, const char* key) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("sim.") + key, "must be > 0");
    };
    positive(dt_physics, "dt_physics");
    positive(dt_control, "dt_control");
    positive(t_max, "t_max");
    positive(d_goal, "d_goal");
    positive(settle_speed, "settle_speed");
    positive(sensing_radius, "sensing_radius");
    positive(resolution, "resolution");
    positive(surface_spacing, "surface_spacing");
    positive(cell_size, "cell_size");
    positive(replan_period, "replan_period");
    if (!(sigma_obs >= 0.0)) throw ConfigError("sim.sigma_obs", "must be >= 0");
    if (!(obstacle_margin >= 0.0)) throw ConfigError("sim.obstacle_margin", "must be >= 0");
    if (traversability_trials < 1) throw ConfigError("sim.traversability_trials", "must be >= 1");
    const double ratio = dt_control / dt_physics;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 || ratio < 1.0)
        throw ConfigError("sim.dt_control", "must be a positive multiple of dt_physics");
}

namespace {

struct AgentRuntime {
    ctl::RobotState x;
    lloyd::RuleState rules;
    bool started{false};
    plan::OccupancyGrid grid;
    std::optional<plan::Path> path;
    double path_radius{0.0};
    double last_plan{-1e300};
    std::optional<Vec3> previous_projection;
    Vec3 jerk{Vec3::Zero()};
    double yaw_rate{0.0};
    bool frozen{false};
    bool failed_start{false};
    int infeasible{0};
    int relaxed{0};
    Rng noise;

    AgentRuntime(plan::OccupancyGrid g, Rng n) : grid(std::move(g)), noise(n) {}
};

void integrate(ctl::RobotState& x, const Vec3& u, double yaw_rate, double dt) {
    const double dt2 = dt * dt, dt3 = dt2 * dt;
    x.p += x.v * dt + x.a * (dt2 / 2.0) + u * (dt3 / 6.0);
    x.v += x.a * dt + u * (dt2 / 2.0);
    x.a += u * dt;
    x.yaw = geom::wrap_angle(x.yaw + yaw_rate * dt);
    x.yaw_rate = yaw_rate;
}

class Simulation {
public:
    explicit Simulation(const RunSetup& setup)
        : s_(setup),
          planar_(setup.fov.f_z == 0.0),
          surfaces_(sample_surfaces(setup.world, setup.sim.surface_spacing)),
          lattice_(setup.sim.sensing_radius, setup.sim.resolution, planar_) {
        const auto& w = s_.world;
        const double inflation = s_.delta + s_.pipeline.rules.d_u;
        for (std::size_t i = 0; i < w.agents.size(); ++i) {
            AgentRuntime a(plan::OccupancyGrid(s_.sim.cell_size, inflation), Rng::stream(s_.seed, 100 + i));
            a.x.p = w.agents[i].start;
            a.x.yaw = w.agents[i].yaw;
            a.rules.beta = s_.pipeline.rules.beta_D;
            agents_.push_back(std::move(a));
        }
        const plan::OccupancyGrid& g = agents_.empty() ? plan::OccupancyGrid() : agents_.front().grid;
        bounds_.lo = g.index_of(w.arena.lo);
        bounds_.hi = g.index_of(w.arena.hi);
        if (w.arena.disk) {
            bounds_.lo = g.index_of(Vec3(w.arena.disk_x - w.arena.disk_radius, w.arena.disk_y - w.arena.disk_radius, w.arena.lo.z()));
            bounds_.hi = g.index_of(Vec3(w.arena.disk_x + w.arena.disk_radius, w.arena.disk_y + w.arena.disk_radius, w.arena.hi.z()));
        }
        if (planar_) {
            bounds_.lo.z = bounds_.hi.z = g.index_of(Vec3(0, 0, w.altitude)).z;
        } else {
            bounds_.lo.z = g.index_of(Vec3(0, 0, w.arena.lo.z() + s_.delta)).z + 1;
            bounds_.hi.z = std::max(bounds_.lo.z, g.index_of(Vec3(0, 0, w.arena.hi.z() - s_.delta)).z - 1);
        }
    }

    RunReport run() {
        RunReport report;
        report.seed = s_.seed;
        const std::size_t n = agents_.size();
        report.trajectories.resize(n);
        TraversabilityOptions topt;
        topt.trials = s_.sim.traversability_trials;
        topt.probe_radius = s_.delta;
        Rng trav_rng = Rng::stream(s_.seed, 7);
        report.tau = traversability(s_.world, topt, trav_rng);

        const long steps = std::lround(s_.sim.t_max / s_.sim.dt_physics);
        const long every = std::lround(s_.sim.dt_control / s_.sim.dt_physics);
        record(report, 0.0);
        long k = 0;
        for (; k < steps && !done(); ++k) {
            const double t = k * s_.sim.dt_physics;
            if (k % every == 0) {
                control_tick(t);
                if (std::any_of(agents_.begin(), agents_.end(), [](const AgentRuntime& a) { return a.failed_start; })) {
                    report.aborted = true;
                    break;
                }
            }
            for (auto& a : agents_)
                if (!a.frozen) integrate(a.x, a.jerk, a.yaw_rate, s_.sim.dt_physics);
            check_collisions();
            record(report, (k + 1) * s_.sim.dt_physics);
        }
        report.end_time = report.trajectories.empty() || report.trajectories[0].empty()
                              ? 0.0
                              : report.trajectories[0].back().t;

        std::vector<double> radii(n, s_.delta);
        report.agents = metrics_finalize({&report.trajectories, &s_.world, radii, s_.sim.d_goal, s_.controller.a_max});
        for (std::size_t i = 0; i < n; ++i) {
            if (agents_[i].failed_start) report.agents[i].sr_acc = false;
            report.infeasible_ticks += agents_[i].infeasible;
            report.mpc_relaxed_ticks += agents_[i].relaxed;
        }
        return report;
    }

private:
    bool done() const {
        for (std::size_t i = 0; i < agents_.size(); ++i) {
            const auto& a = agents_[i];
            if (a.frozen) continue;
            const bool settled = (a.x.p - s_.world.agents[i].goal).norm() <= s_.sim.d_goal &&
                                 a.x.v.norm() < s_.sim.settle_speed;
            if (!settled) return false;
        }
        return true;
    }

    void record(RunReport& report, double t) {
        for (std::size_t i = 0; i < agents_.size(); ++i) {
            const auto& x = agents_[i].x;
            report.trajectories[i].push_back({t, x.p, x.v, x.a, x.yaw});
        }
    }

    void check_collisions() {
        const auto& w = s_.world;
        const std::size_t n = agents_.size();
        std::vector<char> hit(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            if (w.obstacle_distance(agents_[i].x.p) < s_.delta) hit[i] = 1;
            for (std::size_t j = i + 1; j < n; ++j)
                if ((agents_[i].x.p - agents_[j].x.p).norm() < 2.0 * s_.delta) hit[i] = hit[j] = 1;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!hit[i] || agents_[i].frozen) continue;
            auto& a = agents_[i];
            a.frozen = true;
            a.x.v.setZero();
            a.x.a.setZero();
            a.jerk.setZero();
            a.yaw_rate = 0.0;
        }
    }

    void control_tick(double t) {
        std::vector<AgentPose> poses;
        poses.reserve(agents_.size());
        for (const auto& a : agents_) poses.push_back({a.x.p, a.x.yaw, s_.delta});
        const std::size_t n = agents_.size();
        const int workers = std::max(1, std::min<int>(s_.workers, static_cast<int>(n)));
        if (workers == 1) {
            for (std::size_t i = 0; i < n; ++i) agent_tick(i, poses, t);
            return;
        }
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < n; i += workers) agent_tick(i, poses, t);
            });
        for (auto& th : pool) th.join();
    }

    // Heights the sensor can see from `p`; the goal layer is always kept.
    plan::SearchBounds observable_bounds(const plan::OccupancyGrid& g, const Vec3& p, const Vec3& goal) const {
        plan::SearchBounds b = bounds_;
        if (planar_) return b;
        const double up = std::min(90.0, s_.fov.f_a + 0.5 * s_.fov.f_z);
        const double down = std::min(90.0, 0.5 * s_.fov.f_z - s_.fov.f_a);
        const double r = s_.sim.sensing_radius;
        const int hi = g.index_of(p + Vec3(0, 0, up > 0.0 ? r * std::sin(geom::deg2rad(up)) : 0.0)).z;
        const int lo = g.index_of(p - Vec3(0, 0, down > 0.0 ? r * std::sin(geom::deg2rad(down)) : 0.0)).z;
        const int gz = g.index_of(goal).z;
        b.hi.z = std::min(b.hi.z, std::max(hi, gz));
        b.lo.z = std::max(b.lo.z, std::min(lo, gz));
        return b;
    }

    Vec3 fallback_waypoint(const Vec3& p, const Vec3& goal, double lookahead) const {
        const Vec3 d = goal - p;
        const double len = d.norm();
        if (len <= lookahead) return goal;
        return p + d * (lookahead / len);
    }

    void agent_tick(std::size_t i, const std::vector<AgentPose>& poses, double t) {
        AgentRuntime& a = agents_[i];
        if (a.frozen) return;
        const auto& w = s_.world;
        const Vec3 p = a.x.p;
        const Vec3& goal = w.agents[i].goal;
        const auto& rules = s_.pipeline.rules;

        SensorModel model;
        model.range = s_.sim.sensing_radius;
        model.sigma_obs = s_.sim.sigma_obs;
        model.occlusion = s_.sim.occlusion;
        model.planar_slab = s_.sim.surface_spacing;
        const SensorSnapshot snap = sense(w, surfaces_, poses, i, s_.fov, model, t, &a.noise);

        const auto fresh = a.grid.update(snap.cloud);
        const bool due = t - a.last_plan >= s_.sim.replan_period - 1e-9;
        const bool stale = a.path && !fresh.empty() && plan::path_blocked(a.grid, *a.path, a.path_radius);
        if (!a.path || due || stale) {
            a.last_plan = t;
            try {
                const auto res = plan::plan_path(a.grid, p, goal, a.grid.inflation_radius(), observable_bounds(a.grid, p, goal));
                a.path = res.path;
                a.path_radius = res.inflation_used;
            } catch (const NoPath&) {
                a.path.reset();
            }
        }
        const double lookahead = s_.sim.sensing_radius - rules.d_u;
        const Vec3 wp = a.path ? plan::select_waypoint(*a.path, a.grid, a.path_radius, p, lookahead)
                               : fallback_waypoint(p, goal, lookahead);
        if (!a.started) {
            a.rules.p_bar = wp;
            a.started = true;
        }

        lloyd::AgentView view;
        view.position = p;
        view.heading = geom::heading_from_yaw(a.x.yaw);
        view.radius = s_.delta;
        view.sensing_radius = s_.sim.sensing_radius;
        view.fov = s_.fov;
        for (const auto& nb : snap.neighbors) view.neighbors.push_back({nb.position, nb.radius});
        view.cloud = snap.cloud;
        if (!planar_) {
            const double floor = w.arena.lo.z() + s_.delta, ceiling = w.arena.hi.z() - s_.delta;
            if (p.z() >= floor) view.workspace.push_back({-Vec3::UnitZ(), Vec3(0, 0, floor), false});
            if (p.z() <= ceiling) view.workspace.push_back({Vec3::UnitZ(), Vec3(0, 0, ceiling), false});
        }
        view.previous_projection = a.previous_projection;
        view.waypoint = wp;
        view.state = a.rules;
        view.dt = s_.sim.dt_control;

        Vec3 p_ref = p;
        double yaw_ref = a.x.yaw;
        try {
            const lloyd::TickResult tick = lloyd::pipeline_tick(view, s_.pipeline, lattice_);
            a.rules = tick.state;
            a.previous_projection = tick.projection;
            yaw_ref = ctl::desired_heading(tick.c_B, p, a.x.yaw);
            p_ref = ctl::desired_position(tick.projection, p, tick.c_B, a.x.yaw, s_.fov.f_x);
        } catch (const InfeasibleCell&) {
            a.previous_projection.reset();
            ++a.infeasible;
        } catch (const CoincidentRobots&) {
            a.previous_projection.reset();
            ++a.infeasible;
        }
        if (planar_) p_ref.z() = w.altitude;

        try {
            const ctl::MpcSolution sol = ctl::solve_mpc(a.x, p_ref, yaw_ref, s_.controller);
            a.jerk = sol.u.front();
            a.yaw_rate = sol.yaw_rate;
            if (sol.relaxed) ++a.relaxed;
        } catch (const InfeasibleStart&) {
            a.failed_start = true;
        }
    }

    const RunSetup& s_;
    bool planar_;
    SurfaceSamples surfaces_;
    geom::BallLattice lattice_;
    std::vector<AgentRuntime> agents_;
    plan::SearchBounds bounds_;
};

}  // namespace

RunReport run_world(const RunSetup& setup) {
    setup.fov.validate();
    setup.sim.validate();
    setup.controller.validate();
    setup.pipeline.rules.validate();
    Simulation sim(setup);
    return sim.run();
}

}  // namespace irbl::sim

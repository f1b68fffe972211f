#pragma once

#include "irbl/corridor.hpp"
#include "irbl/ctl.hpp"
#include "irbl/geom.hpp"
#include "irbl/lloyd.hpp"
#include "irbl/rng.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

// Lockstep multi-robot world, simulated sensing, metrics and scenario suite.
namespace irbl::sim {

using geom::FovSpec;
using geom::Vec3;

/// Solid vertical cylinder with flat caps.
struct Cylinder {
    double x{0.0}, y{0.0};
    double radius{0.5};
    double z_min{0.0}, z_max{4.0};

    friend bool operator==(const Cylinder&, const Cylinder&) = default;
};

struct Sphere {
    Vec3 center{Vec3::Zero()};
    double radius{0.5};

    friend bool operator==(const Sphere&, const Sphere&) = default;
};

/// Signed distance from q to the solid (negative inside).
double distance(const Cylinder& c, const Vec3& q);
double distance(const Sphere& s, const Vec3& q);

/// Whether the segment a→b enters the solid.
bool segment_hits(const Cylinder& c, const Vec3& a, const Vec3& b);
bool segment_hits(const Sphere& s, const Vec3& a, const Vec3& b);

/// Axis-aligned box, or a vertical disk prism when `disk` is set (used by the
/// traversability estimator).
struct Arena {
    Vec3 lo{-20.0, -20.0, 0.0};
    Vec3 hi{20.0, 20.0, 4.0};
    bool disk{false};
    double disk_x{0.0}, disk_y{0.0}, disk_radius{10.0};

    bool contains(const Vec3& q) const;
    friend bool operator==(const Arena&, const Arena&) = default;
};

struct AgentSpec {
    Vec3 start{Vec3::Zero()};
    Vec3 goal{Vec3::Zero()};
    double yaw{0.0};

    friend bool operator==(const AgentSpec&, const AgentSpec&) = default;
};

struct World {
    std::vector<Cylinder> cylinders;
    std::vector<Sphere> spheres;
    Arena arena;
    std::vector<AgentSpec> agents;
    double altitude{2.0};

    /// Distance from q to the nearest obstacle surface; +inf without obstacles.
    double obstacle_distance(const Vec3& q) const;
};

/// Obstacle surfaces pre-sampled at a fixed spacing, grouped per obstacle.
struct SurfaceSamples {
    struct Group {
        Vec3 center;       // reference point for range culling
        double reach;      // every sample lies within `reach` of `center`
        std::vector<Vec3> points;
    };
    std::vector<Group> groups;
    std::vector<int> owner;  // obstacle index per group: cylinders first, then spheres
};

SurfaceSamples sample_surfaces(const World& world, double spacing);

struct SensorModel {
    double range{5.0};
    double sigma_obs{0.0};
    bool occlusion{false};
    double planar_slab{0.1};  // half thickness of the sensed slab when f_z = 0
};

struct NeighborObservation {
    Vec3 position;
    double radius;
};

struct SensorSnapshot {
    corridor::PointCloud cloud;
    std::vector<NeighborObservation> neighbors;
    double timestamp{0.0};
};

struct AgentPose {
    Vec3 position;
    double yaw;
    double radius;
};

/// Obstacle samples and neighbors visible from agent `self`. A neighbor counts
/// as visible when its center or one of the six axis extremes of its body is.
SensorSnapshot sense(const World& world, const SurfaceSamples& surfaces, const std::vector<AgentPose>& poses,
                     std::size_t self, const FovSpec& fov, const SensorModel& model, double time, Rng* noise);

struct TraversabilityOptions {
    int trials{10000};
    double probe_radius{0.2};
    std::optional<Vec3> fixed_start;          // every trial starts here
    double line_cap{std::numeric_limits<double>::infinity()};
};

struct TraversabilityResult {
    double tau{0.0};
    double std_error{0.0};
    int trials{0};
};

/// Mean horizontal free travel of a probe disk from random collision-free
/// starts in random directions. Throws NoFreeSpace, ConfigError (trials < 1).
TraversabilityResult traversability(const World& world, const TraversabilityOptions& options, Rng& rng);

/// Free horizontal travel from `start` along unit direction `dir` (x, y only).
double free_travel(const World& world, const Vec3& start, double dir_x, double dir_y, double probe_radius);

struct Sample {
    double t;
    Vec3 p, v, a;
    double yaw;
};

using Trajectory = std::vector<Sample>;

struct AgentMetrics {
    double l{0.0};
    std::optional<double> t;
    std::optional<double> vbar;
    double vmax{0.0};
    double dmin{std::numeric_limits<double>::infinity()};
    double domin{std::numeric_limits<double>::infinity()};
    bool sr_acc{true};
    bool sr_conv{false};
    bool sr_safe{true};
};

struct MetricsInput {
    const std::vector<Trajectory>* trajectories;
    const World* world;
    std::vector<double> radii;
    double d_goal{1.0};
    double a_max{3.0};
};

/// Per-agent metrics from trajectories sampled at the physics rate.
std::vector<AgentMetrics> metrics_finalize(const MetricsInput& input);

struct ScenarioParams {
    std::string kind{"circle"};
    int n{10};
    double circle_radius{15.0};
    double altitude{2.0};
    double jitter{0.2};            // m, start perturbation per seed
    int obstacle_count{12};
    double obstacle_radius_min{0.3};
    double obstacle_radius_max{0.6};
    double obstacle_spacing{3.0};  // min center distance between obstacles
    double obstacle_keepout{2.5};  // min distance of obstacles to starts and goals
    double forest_spacing{4.0};    // Poisson-disk spacing of the forest fill
    double forest_length{30.0};
    double forest_width{16.0};
    double agent_spacing{2.5};
    double ceiling{4.0};
    double arena_margin{5.0};
    std::vector<AgentSpec> agents;      // custom
    std::vector<Cylinder> cylinders;    // custom
    std::vector<Sphere> spheres;        // custom
    std::optional<Arena> arena;         // custom

    friend bool operator==(const ScenarioParams&, const ScenarioParams&) = default;
};

inline const std::vector<std::string>& scenario_kinds() {
    static const std::vector<std::string> kinds{"circle", "circle_obstacles", "forest", "custom"};
    return kinds;
}

/// Deterministic world for (params, seed). Throws ConfigError.
World generate_world(const ScenarioParams& params, double robot_radius, std::uint64_t seed);

struct SimParams {
    double dt_physics{0.01};
    double dt_control{0.1};
    double t_max{120.0};
    double d_goal{1.0};
    double settle_speed{0.05};
    double sensing_radius{5.0};
    double resolution{0.25};
    double sigma_obs{0.0};
    bool occlusion{false};
    double surface_spacing{0.1};
    double cell_size{0.25};
    double replan_period{0.5};
    double obstacle_margin{0.05};
    int traversability_trials{10000};
    bool record_trajectories{true};

    void validate() const;
    friend bool operator==(const SimParams&, const SimParams&) = default;
};

struct RunSetup {
    World world;
    double delta{0.2};
    FovSpec fov;
    lloyd::PipelineParams pipeline;
    ctl::MpcConfig controller;
    SimParams sim;
    std::uint64_t seed{1};
    int workers{1};
};

struct RunReport {
    std::vector<AgentMetrics> agents;
    std::vector<Trajectory> trajectories;
    TraversabilityResult tau;
    double end_time{0.0};
    std::uint64_t seed{0};
    int infeasible_ticks{0};
    int mpc_relaxed_ticks{0};
    bool aborted{false};  // an agent hit InfeasibleStart
};

RunReport run_world(const RunSetup& setup);

}  // namespace irbl::sim

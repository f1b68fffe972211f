#pragma once

#include "irbl/corridor.hpp"
#include "irbl/cwvd.hpp"
#include "irbl/geom.hpp"

#include <optional>
#include <span>
#include <vector>

// Density-weighted centroids and the adaptive rules that steer them.
namespace irbl::lloyd {

using geom::ConvexRegion;
using geom::GridSampling;
using geom::Vec3;

inline constexpr double kBetaFloor = 1e-3;

struct RuleParams {
    double beta_D{0.5};
    double k_beta{1.0};
    double k_wp{1.0};
    double d_1{1.0};
    double d_2{1.0};
    double d_3{1.0};
    double d_4{1.0};
    double d_u{0.3};
    double epsilon_rot{0.05};  // rad
    double beta_cap{50.0};

    void validate() const;
    friend bool operator==(const RuleParams&, const RuleParams&) = default;
};

struct RuleState {
    double beta{0.5};
    Vec3 p_bar{Vec3::Zero()};
    bool rotated{false};
};

double psi(const Vec3& q, const Vec3& p_bar, double beta);

/// ψ-weighted mean of the samples. Throws EmptySampling.
Vec3 centroid(const GridSampling& samples, const Vec3& p_bar, double beta);

/// Centroid of the unconstrained sensing ball around `p`.
Vec3 free_centroid(const GridSampling& ball_samples, const Vec3& p_bar, double beta);

/// Distances to p̄ cached once, so centroids for many β cost one exp per sample.
class CentroidField {
public:
    CentroidField(std::span<const Vec3> points, const Vec3& p_bar);

    Vec3 at(double beta) const;
    bool empty() const { return points_.empty(); }

private:
    std::span<const Vec3> points_;
    std::vector<double> shifted_;  // ‖q − p̄‖ − min
};

/// Smallest β in [1e−3, beta_cap] whose centroid keeps d_u from the region
/// boundary: feasibility bisection, then a short downward scan in steps of 1e−3.
double beta_min(const ConvexRegion& region, const GridSampling& samples, const Vec3& p_bar, double d_u,
                double beta_cap = 50.0);

/// Euler step of the β rule, before clamping.
double beta_step(double beta, const Vec3& c_B, const Vec3& c_S, const Vec3& p, double dt, const RuleParams& params);

/// max(beta, beta_min) capped at beta_cap. A feasible `beta` is returned as-is
/// without the full search.
double clamp_beta(double beta, const ConvexRegion& region, const GridSampling& samples, const Vec3& p_bar,
                  const RuleParams& params);

double update_beta(const RuleState& state, const Vec3& c_B, const Vec3& c_S, const Vec3& p, double dt,
                   const RuleParams& params, const ConvexRegion& region, const GridSampling& samples);

/// p + R_z(π/2 − ε)(wp − p).
Vec3 rotated_waypoint(const Vec3& wp, const Vec3& p, double epsilon_rot);

struct PbarUpdate {
    Vec3 p_bar;
    bool rotated;
};

PbarUpdate update_pbar(const RuleState& state, const Vec3& wp, const Vec3& c_B, const Vec3& c_B_bar,
                       const Vec3& c_S, const Vec3& p, double dt, const RuleParams& params);

/// Everything one robot knows at a control tick.
struct AgentView {
    Vec3 position{Vec3::Zero()};
    Vec3 heading{Vec3::UnitX()};
    double radius{0.2};
    double sensing_radius{5.0};
    geom::FovSpec fov;
    std::vector<cwvd::RobotDisk> neighbors;
    corridor::PointCloud cloud;
    std::vector<geom::HalfSpace> workspace;  // static limits known a priori (floor, ceiling)
    std::optional<Vec3> previous_projection;
    Vec3 waypoint{Vec3::Zero()};
    RuleState state;
    double dt{0.1};
};

struct PipelineParams {
    RuleParams rules;
    cwvd::CwvdParams cwvd;
    double obstacle_margin{0.0};  // added to the robot radius when inflating the corridor
};

struct TickResult {
    Vec3 c_B;
    Vec3 c_B_bar;
    Vec3 c_S;
    Vec3 projection;
    RuleState state;
    ConvexRegion cell;
    bool seed_fallback{false};
};

/// One pass of the navigation loop: cell, centroid, visible projection and rule
/// updates. `lattice` must match the sensing radius. Throws InfeasibleCell when
/// neither the cell nor its visible part holds a sample.
TickResult pipeline_tick(const AgentView& view, const PipelineParams& params, const geom::BallLattice& lattice);

}  // namespace irbl::lloyd

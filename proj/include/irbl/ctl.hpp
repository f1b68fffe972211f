#pragma once

#include "irbl/geom.hpp"

#include <Eigen/Core>

#include <vector>

// Heading gate, references and the jerk-input tracking MPC.
namespace irbl::ctl {

using geom::Vec3;

struct RobotState {
    Vec3 p{Vec3::Zero()};
    Vec3 v{Vec3::Zero()};
    Vec3 a{Vec3::Zero()};
    double yaw{0.0};
    double yaw_rate{0.0};
};

struct MpcConfig {
    int horizon{20};
    double dt{0.2};
    double w_p{1.0};
    double w_h{1.0};  // heading weight; heading is tracked by the P-loop below
    double w_u{0.05};
    double v_max{3.0};
    double a_max{3.0};
    double j_max{10.0};
    double yaw_rate_max{1.5};
    double yaw_gain{2.0};  // 1/s
    int max_iterations{500};

    void validate() const;
    friend bool operator==(const MpcConfig&, const MpcConfig&) = default;
};

/// Yaw of the horizontal part of c_B − p; `current_yaw` below 1e−6 m.
double desired_heading(const Vec3& c_B, const Vec3& p, double current_yaw);

/// proj_W when c_B lies within ±f_x/2 of the heading (or straight above or
/// below), otherwise p.
Vec3 desired_position(const Vec3& proj_W, const Vec3& p, const Vec3& c_B, double yaw, double f_x);

/// One axis of the triple integrator: p⁺ = p + v dt + ½a dt², v⁺ = v + a dt,
/// a⁺ = a + u dt.
struct AxisState {
    double p{0.0}, v{0.0}, a{0.0};
};

AxisState axis_step(const AxisState& x, double u, double dt);

struct AxisSolution {
    Eigen::VectorXd u;
    std::vector<AxisState> states;  // horizon + 1 entries, states[0] = start
    double objective{0.0};
    int iterations{0};
    bool constrained{false};  // the unconstrained minimizer violated a bound
    bool relaxed{false};      // start was not viable; speed bound loosened
};

/// Σ w_p (p_k − ref)² over k = 1..N plus Σ w_u u_k².
double axis_objective(const AxisState& x0, const Eigen::VectorXd& u, double ref, const MpcConfig& cfg);

/// Box-constrained condensed QP of one axis. The unconstrained optimum is
/// returned when it respects the bounds; otherwise a primal active-set solve
/// starts from the braking rollout, which is feasible whenever the start is.
AxisSolution solve_axis(const AxisState& x0, double ref, const MpcConfig& cfg);

struct MpcSolution {
    std::vector<Vec3> u;
    std::vector<RobotState> states;
    double yaw_rate{0.0};
    double objective{0.0};
    bool relaxed{false};
};

/// Per-axis MPC plus proportional yaw tracking with a rate clamp.
/// Throws InfeasibleStart when x0 exceeds a bound by more than 10%; smaller
/// violations are clamped.
MpcSolution solve_mpc(const RobotState& x0, const Vec3& p_ref, double yaw_ref, const MpcConfig& cfg);

}  // namespace irbl::ctl

#include "irbl/ctl.hpp"

#include "irbl/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>

namespace irbl::ctl {

void MpcConfig::validate() const {
    if (horizon < 2) throw ConfigError("controller.horizon", "must be >= 2");
    auto positive = [](double v, const char* key) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("controller.") + key, "must be > 0");
    };
    positive(dt, "dt");
    positive(w_p, "w_p");
    positive(w_h, "w_h");
    positive(w_u, "w_u");
    positive(v_max, "v_max");
    positive(a_max, "a_max");
    positive(j_max, "j_max");
    positive(yaw_rate_max, "yaw_rate_max");
    positive(yaw_gain, "yaw_gain");
    if (max_iterations < 1) throw ConfigError("controller.max_iterations", "must be >= 1");
}

double desired_heading(const Vec3& c_B, const Vec3& p, double current_yaw) {
    const double dx = c_B.x() - p.x(), dy = c_B.y() - p.y();
    if (std::hypot(dx, dy) < 1e-6) return current_yaw;
    return std::atan2(dy, dx);
}

Vec3 desired_position(const Vec3& proj_W, const Vec3& p, const Vec3& c_B, double yaw, double f_x) {
    if (f_x >= 360.0) return proj_W;
    const double dx = c_B.x() - p.x(), dy = c_B.y() - p.y();
    const double len = std::hypot(dx, dy);
    if (len < 1e-6) return proj_W;
    const double dot = (dx * std::cos(yaw) + dy * std::sin(yaw)) / len;
    return dot > std::cos(geom::deg2rad(f_x) / 2.0) ? proj_W : p;
}

AxisState axis_step(const AxisState& x, double u, double dt) {
    return {x.p + x.v * dt + 0.5 * x.a * dt * dt, x.v + x.a * dt, x.a + u * dt};
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::vector<AxisState> rollout(const AxisState& x0, const VectorXd& u, double dt) {
    std::vector<AxisState> xs{x0};
    xs.reserve(u.size() + 1);
    for (Eigen::Index k = 0; k < u.size(); ++k) xs.push_back(axis_step(xs.back(), u[k], dt));
    return xs;
}

// Affine maps u ↦ (p_k, v_k, a_k), k = 1..N.
struct Condensed {
    VectorXd p0, v0, a0;
    MatrixXd gp, gv, ga;

    Condensed(const AxisState& x0, int n, double dt) : p0(n), v0(n), a0(n), gp(MatrixXd::Zero(n, n)),
                                                       gv(MatrixXd::Zero(n, n)), ga(MatrixXd::Zero(n, n)) {
        const auto free = rollout(x0, VectorXd::Zero(n), dt);
        for (int k = 0; k < n; ++k) {
            p0[k] = free[k + 1].p;
            v0[k] = free[k + 1].v;
            a0[k] = free[k + 1].a;
        }
        for (int i = 0; i < n; ++i) {
            AxisState x{};
            for (int k = i; k < n; ++k) {
                x = axis_step(x, k == i ? 1.0 : 0.0, dt);
                gp(k, i) = x.p;
                gv(k, i) = x.v;
                ga(k, i) = x.a;
            }
        }
    }
};

// Rows c·u ≤ d for the jerk, acceleration and speed boxes.
struct Constraints {
    MatrixXd c;
    VectorXd d;
};

Constraints box_constraints(const Condensed& m, int n, double v_max, const MpcConfig& cfg) {
    Constraints out{MatrixXd::Zero(6 * n, n), VectorXd::Zero(6 * n)};
    for (int k = 0; k < n; ++k) {
        out.c(k, k) = 1.0;
        out.d[k] = cfg.j_max;
        out.c(n + k, k) = -1.0;
        out.d[n + k] = cfg.j_max;
        out.c.row(2 * n + k) = m.ga.row(k);
        out.d[2 * n + k] = cfg.a_max - m.a0[k];
        out.c.row(3 * n + k) = -m.ga.row(k);
        out.d[3 * n + k] = cfg.a_max + m.a0[k];
        out.c.row(4 * n + k) = m.gv.row(k);
        out.d[4 * n + k] = v_max - m.v0[k];
        out.c.row(5 * n + k) = -m.gv.row(k);
        out.d[5 * n + k] = v_max + m.v0[k];
    }
    return out;
}

bool satisfies(const Constraints& k, const VectorXd& u, double tol) {
    return ((k.c * u - k.d).array() <= tol).all();
}

// Drives the acceleration to zero as fast as the jerk bound allows.
VectorXd braking_inputs(const AxisState& x0, int n, const MpcConfig& cfg) {
    VectorXd u(n);
    AxisState x = x0;
    for (int k = 0; k < n; ++k) {
        u[k] = std::clamp(-x.a / cfg.dt, -cfg.j_max, cfg.j_max);
        x = axis_step(x, u[k], cfg.dt);
    }
    return u;
}

double peak_speed(const AxisState& x0, const VectorXd& u, double dt) {
    double peak = 0.0;
    for (const auto& x : rollout(x0, u, dt)) peak = std::max(peak, std::abs(x.v));
    return peak;
}

// Primal active-set method for min ½uᵀHu + gᵀu s.t. Cu ≤ d from a feasible u.
int active_set(const MatrixXd& h, const VectorXd& g, const Constraints& k, VectorXd& u, int max_iter) {
    const int n = static_cast<int>(u.size());
    std::vector<int> working;
    int iter = 0;
    for (; iter < max_iter; ++iter) {
        const int m = static_cast<int>(working.size());
        MatrixXd kkt = MatrixXd::Zero(n + m, n + m);
        kkt.topLeftCorner(n, n) = h;
        for (int j = 0; j < m; ++j) {
            kkt.block(0, n + j, n, 1) = k.c.row(working[j]).transpose();
            kkt.block(n + j, 0, 1, n) = k.c.row(working[j]);
        }
        VectorXd rhs = VectorXd::Zero(n + m);
        rhs.head(n) = -(h * u + g);
        const VectorXd sol = kkt.fullPivLu().solve(rhs);
        const VectorXd step = sol.head(n);

        if (step.norm() <= 1e-12 * (1.0 + u.norm())) {
            int worst = -1;
            double most_negative = -1e-12;
            for (int j = 0; j < m; ++j) {
                if (sol[n + j] < most_negative) {
                    most_negative = sol[n + j];
                    worst = j;
                }
            }
            if (worst < 0) return iter;
            working.erase(working.begin() + worst);
            continue;
        }

        double alpha = 1.0;
        int blocking = -1;
        for (int i = 0; i < k.c.rows(); ++i) {
            if (std::find(working.begin(), working.end(), i) != working.end()) continue;
            const double rate = k.c.row(i).dot(step);
            if (rate <= 1e-14) continue;
            const double room = std::max(0.0, k.d[i] - k.c.row(i).dot(u));
            if (room / rate < alpha) {
                alpha = room / rate;
                blocking = i;
            }
        }
        u += alpha * step;
        if (blocking >= 0) working.push_back(blocking);
    }
    return iter;
}

}  // namespace

double axis_objective(const AxisState& x0, const VectorXd& u, double ref, const MpcConfig& cfg) {
    const auto xs = rollout(x0, u, cfg.dt);
    double cost = 0.0;
    for (std::size_t k = 1; k < xs.size(); ++k) cost += cfg.w_p * (xs[k].p - ref) * (xs[k].p - ref);
    return cost + cfg.w_u * u.squaredNorm();
}

AxisSolution solve_axis(const AxisState& x0, double ref, const MpcConfig& cfg) {
    const int n = cfg.horizon;
    const Condensed m(x0, n, cfg.dt);
    const MatrixXd h = 2.0 * (cfg.w_p * m.gp.transpose() * m.gp + cfg.w_u * MatrixXd::Identity(n, n));
    const VectorXd g = 2.0 * cfg.w_p * m.gp.transpose() * (m.p0 - VectorXd::Constant(n, ref));

    AxisSolution out;
    const VectorXd brake = braking_inputs(x0, n, cfg);
    double v_max = cfg.v_max;
    const double brake_peak = peak_speed(x0, brake, cfg.dt);
    if (brake_peak > v_max) {
        v_max = brake_peak;
        out.relaxed = true;
    }
    const Constraints k = box_constraints(m, n, v_max, cfg);

    out.u = h.ldlt().solve(-g);
    if (!satisfies(k, out.u, 1e-12)) {
        out.constrained = true;
        VectorXd start = brake;
        const VectorXd zero = VectorXd::Zero(n);
        if (satisfies(k, zero, 0.0) && axis_objective(x0, zero, ref, cfg) < axis_objective(x0, brake, ref, cfg))
            start = zero;
        out.u = start;
        out.iterations = active_set(h, g, k, out.u, cfg.max_iterations);
    }
    out.states = rollout(x0, out.u, cfg.dt);
    out.objective = axis_objective(x0, out.u, ref, cfg);
    return out;
}

MpcSolution solve_mpc(const RobotState& x0, const Vec3& p_ref, double yaw_ref, const MpcConfig& cfg) {
    RobotState start = x0;
    for (int i = 0; i < 3; ++i) {
        if (std::abs(x0.v[i]) > 1.1 * cfg.v_max) throw InfeasibleStart("start speed beyond the bound");
        if (std::abs(x0.a[i]) > 1.1 * cfg.a_max) throw InfeasibleStart("start acceleration beyond the bound");
        start.v[i] = std::clamp(x0.v[i], -cfg.v_max, cfg.v_max);
        start.a[i] = std::clamp(x0.a[i], -cfg.a_max, cfg.a_max);
    }

    MpcSolution out;
    out.u.assign(cfg.horizon, Vec3::Zero());
    out.states.assign(cfg.horizon + 1, start);
    for (int i = 0; i < 3; ++i) {
        const AxisSolution axis = solve_axis({start.p[i], start.v[i], start.a[i]}, p_ref[i], cfg);
        for (int k = 0; k < cfg.horizon; ++k) out.u[k][i] = axis.u[k];
        for (int k = 0; k <= cfg.horizon; ++k) {
            out.states[k].p[i] = axis.states[k].p;
            out.states[k].v[i] = axis.states[k].v;
            out.states[k].a[i] = axis.states[k].a;
        }
        out.objective += axis.objective;
        out.relaxed = out.relaxed || axis.relaxed;
    }

    const double error = geom::wrap_angle(yaw_ref - start.yaw);
    out.yaw_rate = std::clamp(cfg.yaw_gain * error, -cfg.yaw_rate_max, cfg.yaw_rate_max);
    for (int k = 0; k <= cfg.horizon; ++k) {
        out.states[k].yaw = start.yaw + out.yaw_rate * cfg.dt * k;
        out.states[k].yaw_rate = out.yaw_rate;
    }
    return out;
}

}  // namespace irbl::ctl

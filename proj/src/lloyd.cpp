#include "irbl/lloyd.hpp"

#include "irbl/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace irbl::lloyd {

void RuleParams::validate() const {
    auto positive = [](double v, const char* key) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("rules.") + key, "must be > 0");
    };
    positive(beta_D, "beta_D");
    positive(k_beta, "k_beta");
    positive(k_wp, "k_wp");
    positive(d_1, "d_1");
    positive(d_2, "d_2");
    positive(d_3, "d_3");
    positive(d_4, "d_4");
    positive(d_u, "d_u");
    positive(beta_cap, "beta_cap");
    if (!(epsilon_rot > 0.0 && epsilon_rot <= 0.2)) throw ConfigError("rules.epsilon_rot", "must be in (0, 0.2]");
    if (beta_cap < kBetaFloor) throw ConfigError("rules.beta_cap", "must be >= 1e-3");
}

double psi(const Vec3& q, const Vec3& p_bar, double beta) { return std::exp(-(q - p_bar).norm() / beta); }

CentroidField::CentroidField(std::span<const Vec3> points, const Vec3& p_bar) : points_(points) {
    shifted_.resize(points.size());
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
        shifted_[i] = (points[i] - p_bar).norm();
        lo = std::min(lo, shifted_[i]);
    }
    for (double& d : shifted_) d -= lo;
}

Vec3 CentroidField::at(double beta) const {
    if (points_.empty()) throw EmptySampling("centroid of an empty sampling");
    const double inv = 1.0 / beta;
    Vec3 acc = Vec3::Zero();
    double total = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const double w = std::exp(-shifted_[i] * inv);
        acc += w * points_[i];
        total += w;
    }
    return acc / total;
}

Vec3 centroid(const GridSampling& samples, const Vec3& p_bar, double beta) {
    if (samples.empty()) throw EmptySampling("centroid of an empty sampling");
    return CentroidField(samples.points, p_bar).at(beta);
}

Vec3 free_centroid(const GridSampling& ball_samples, const Vec3& p_bar, double beta) {
    return centroid(ball_samples, p_bar, beta);
}

namespace {

double clearance(const ConvexRegion& region, const Vec3& q) {
    try {
        return geom::distance_to_boundary(region, q);
    } catch (const OutsideRegion&) {
        return -std::numeric_limits<double>::infinity();
    }
}

struct Feasibility {
    const ConvexRegion& region;
    const CentroidField& field;
    double d_u;

    bool operator()(double beta) const { return clearance(region, field.at(beta)) >= d_u; }
};

double search_beta_min(const Feasibility& feasible, double lo, double cap) {
    if (feasible(lo)) return lo;
    if (!feasible(cap)) return cap;
    double hi = cap;
    for (int i = 0; i < 24; ++i) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? hi : lo) = mid;
    }
    double best = hi;
    for (int k = 1; k <= 5; ++k) {
        const double b = hi - k * kBetaFloor;
        if (b < kBetaFloor) break;
        if (feasible(b)) best = b;
    }
    return best;
}

// Centroid over every lattice point of the ball around `center`.
Vec3 lattice_centroid(const geom::BallLattice& lattice, const Vec3& center, const Vec3& p_bar, double beta) {
    const auto offsets = lattice.offsets();
    const Vec3 rel = p_bar - center;
    double lo = std::numeric_limits<double>::infinity();
    for (const Vec3& o : offsets) lo = std::min(lo, (o - rel).norm());
    const double inv = 1.0 / beta;
    Vec3 acc = Vec3::Zero();
    double total = 0.0;
    for (const Vec3& o : offsets) {
        const double w = std::exp(-((o - rel).norm() - lo) * inv);
        acc += w * o;
        total += w;
    }
    return center + acc / total;
}

}  // namespace

double beta_min(const ConvexRegion& region, const GridSampling& samples, const Vec3& p_bar, double d_u,
                double beta_cap) {
    if (samples.empty()) throw EmptySampling("beta_min over an empty sampling");
    const CentroidField field(samples.points, p_bar);
    return search_beta_min(Feasibility{region, field, d_u}, kBetaFloor, beta_cap);
}

double beta_step(double beta, const Vec3& c_B, const Vec3& c_S, const Vec3& p, double dt, const RuleParams& params) {
    const bool congested = (c_B - p).norm() < params.d_1 && (c_B - c_S).norm() > params.d_2;
    if (congested) return beta - params.k_beta * beta * dt;
    return beta - params.k_beta * (beta - params.beta_D) * dt;
}

double clamp_beta(double beta, const ConvexRegion& region, const GridSampling& samples, const Vec3& p_bar,
                  const RuleParams& params) {
    beta = std::clamp(beta, kBetaFloor, params.beta_cap);
    if (samples.empty()) throw EmptySampling("beta clamp over an empty sampling");
    const CentroidField field(samples.points, p_bar);
    const Feasibility feasible{region, field, params.d_u};
    if (feasible(beta)) return beta;
    return search_beta_min(feasible, beta, params.beta_cap);
}

double update_beta(const RuleState& state, const Vec3& c_B, const Vec3& c_S, const Vec3& p, double dt,
                   const RuleParams& params, const ConvexRegion& region, const GridSampling& samples) {
    const double next = beta_step(state.beta, c_B, c_S, p, dt, params);
    return clamp_beta(next, region, samples, state.p_bar, params);
}

Vec3 rotated_waypoint(const Vec3& wp, const Vec3& p, double epsilon_rot) {
    const double angle = M_PI / 2.0 - epsilon_rot;
    return p + Eigen::AngleAxisd(angle, Vec3::UnitZ()) * (wp - p);
}

PbarUpdate update_pbar(const RuleState& state, const Vec3& wp, const Vec3& c_B, const Vec3& c_B_bar,
                       const Vec3& c_S, const Vec3& p, double dt, const RuleParams& params) {
    if (state.rotated && (p - c_B_bar).norm() > (p - c_B).norm()) return {wp, false};
    const bool congested = (c_B - p).norm() < params.d_3 && (c_B - c_S).norm() > params.d_4;
    if (congested) {
        const Vec3 target = rotated_waypoint(wp, p, params.epsilon_rot);
        return {state.p_bar - params.k_wp * (state.p_bar - target) * dt, true};
    }
    return {state.p_bar - params.k_wp * (state.p_bar - wp) * dt, state.rotated};
}

namespace {

double nearest_point_distance(const corridor::PointCloud& cloud, const Vec3& p) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& o : cloud.points) best = std::min(best, (o - p).norm());
    return best;
}

// Corridor faces seeded at {p, previous projection}, falling back to {p, p},
// and to a shrunken radius when the robot itself sits inside the margin.
std::vector<geom::HalfSpace> corridor_faces(const AgentView& view, const PipelineParams& params,
                                            const ConvexRegion& ball, bool& fallback) {
    const double radius = view.radius + params.obstacle_margin;
    const Vec3& p = view.position;
    if (view.previous_projection) {
        try {
            return corridor::inflate_region(view.cloud, {p, *view.previous_projection}, radius, ball);
        } catch (const SeedInCollision&) {
            fallback = true;
        }
    }
    try {
        return corridor::inflate_region(view.cloud, {p, p}, radius, ball);
    } catch (const SeedInCollision&) {
        fallback = true;
    }
    const double room = 0.99 * nearest_point_distance(view.cloud, p);
    if (!(room > 0.0)) throw InfeasibleCell("robot position coincides with an obstacle point");
    return corridor::inflate_region(view.cloud, {p, p}, std::min(radius, room), ball);
}

}  // namespace

TickResult pipeline_tick(const AgentView& view, const PipelineParams& params, const geom::BallLattice& lattice) {
    const Vec3& p = view.position;
    const RuleParams& rules = params.rules;
    TickResult out;

    const ConvexRegion ball{p, view.sensing_radius, {}};
    const cwvd::RobotDisk self{p, view.radius};
    const auto a_faces = cwvd::build_A(self, view.neighbors, params.cwvd);
    auto c_faces = corridor_faces(view, params, ball, out.seed_fallback);
    c_faces.insert(c_faces.end(), view.workspace.begin(), view.workspace.end());
    out.cell = corridor::build_B(ball, a_faces, c_faces);

    GridSampling samples;
    try {
        samples = geom::discretize(out.cell, lattice);
    } catch (const EmptySampling&) {
        if (!geom::region_contains(out.cell, p)) throw InfeasibleCell("cell holds no lattice point");
        samples.resolution = lattice.resolution();
        samples.points = {p};
        samples.weights = {1.0};
    }

    const Vec3& p_bar = view.state.p_bar;
    const double beta = clamp_beta(view.state.beta, out.cell, samples, p_bar, rules);
    const CentroidField field(samples.points, p_bar);
    out.c_B = field.at(beta);
    out.c_S = lattice_centroid(lattice, p, p_bar, beta);
    out.c_B_bar = view.state.rotated ? centroid(samples, view.waypoint, beta) : out.c_B;

    const auto visible = corridor::build_W(out.cell, view.fov, p, view.heading);
    if (visible.contains(out.c_B)) {
        out.projection = out.c_B;
    } else {
        const GridSampling seen = visible.filter(samples);
        if (seen.empty()) throw InfeasibleCell("no visible lattice point in the cell");
        out.projection = corridor::project_visible(visible, out.c_B, seen);
    }

    const double next_beta = beta_step(beta, out.c_B, out.c_S, p, view.dt, rules);
    out.state.beta = clamp_beta(next_beta, out.cell, samples, p_bar, rules);
    RuleState current = view.state;
    current.beta = beta;
    const PbarUpdate upd = update_pbar(current, view.waypoint, out.c_B, out.c_B_bar, out.c_S, p, view.dt, rules);
    out.state.p_bar = upd.p_bar;
    out.state.rotated = upd.rotated;
    return out;
}

}  // namespace irbl::lloyd

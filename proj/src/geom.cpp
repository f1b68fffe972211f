#include "irbl/geom.hpp"

#include "irbl/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace irbl::geom {

namespace {

constexpr double kAngleTol = 1e-9;

// Feasibility slack used by the projection solvers, relative to the region size.
double region_tol(const ConvexRegion& region) { return 1e-9 * std::max(region.radius, 1.0); }

struct Plane {
    Vec3 n;     // unit normal
    double b;   // n·y ≤ b
};

std::vector<Plane> unit_planes(const ConvexRegion& region) {
    std::vector<Plane> planes;
    planes.reserve(region.faces.size());
    for (const auto& f : region.faces) {
        const double len = f.normal.norm();
        if (len <= 0.0) continue;
        const Vec3 n = f.normal / len;
        planes.push_back({n, n.dot(f.point)});
    }
    return planes;
}

// Primal active-set projection of z onto {y : n_i·y ≤ b_i} from a feasible start.
Vec3 project_polytope(const std::vector<Plane>& planes, const Vec3& z, const Vec3& start) {
    Vec3 y = start;
    std::vector<int> working;
    const double scale = 1.0 + z.norm() + start.norm();

    for (int iter = 0; iter < 100; ++iter) {
        const Vec3 g = y - z;
        Vec3 step = -g;
        Eigen::VectorXd lambda;
        if (!working.empty()) {
            Eigen::Matrix<double, 3, Eigen::Dynamic> N(3, working.size());
            for (std::size_t k = 0; k < working.size(); ++k) N.col(k) = planes[working[k]].n;
            const Eigen::MatrixXd gram = N.transpose() * N;
            const Eigen::VectorXd coeff = gram.ldlt().solve(N.transpose() * g);
            step = -(g - N * coeff);
            lambda = -coeff;
        }

        if (step.norm() <= 1e-14 * scale) {
            if (working.empty()) return y;
            Eigen::Index worst = 0;
            const double min_lambda = lambda.minCoeff(&worst);
            if (min_lambda >= -1e-12 * scale) return y;
            working.erase(working.begin() + worst);
            continue;
        }

        double alpha = 1.0;
        int blocking = -1;
        for (int i = 0; i < static_cast<int>(planes.size()); ++i) {
            if (std::find(working.begin(), working.end(), i) != working.end()) continue;
            const double rate = planes[i].n.dot(step);
            if (rate <= 1e-15 * step.norm()) continue;
            const double room = std::max(0.0, planes[i].b - planes[i].n.dot(y));
            const double t = room / rate;
            if (t < alpha) {
                alpha = t;
                blocking = i;
            }
        }
        y += alpha * step;
        if (blocking >= 0) working.push_back(blocking);
    }
    return y;
}

}  // namespace

bool HalfSpace::contains(const Vec3& q, double tol) const {
    const double len = normal.norm();
    const double v = signed_value(q) / len;
    if (tol > 0.0) return v <= tol;
    return strict ? v < 0.0 : v <= 0.0;
}

HalfSpace HalfSpace::normalized() const {
    return HalfSpace{normal.normalized(), point, strict};
}

bool region_contains(const ConvexRegion& region, const Vec3& q) {
    if ((q - region.center).squaredNorm() > region.radius * region.radius) return false;
    return std::all_of(region.faces.begin(), region.faces.end(),
                       [&](const HalfSpace& f) { return f.contains(q); });
}

bool region_contains(const ConvexRegion& region, const Vec3& q, double tol) {
    if ((q - region.center).norm() > region.radius + tol) return false;
    return std::all_of(region.faces.begin(), region.faces.end(),
                       [&](const HalfSpace& f) { return f.contains(q, tol); });
}

void FovSpec::validate() const {
    if (!(f_x > 0.0 && f_x <= 360.0)) throw ConfigError("fov.f_x", "must lie in (0, 360]");
    if (!(f_z >= 0.0 && f_z <= 360.0)) throw ConfigError("fov.f_z", "must lie in [0, 360]");
    if (!(f_a >= -90.0 && f_a <= 90.0)) throw ConfigError("fov.f_a", "must lie in [-90, 90]");
}

Vec3 heading_from_yaw(double yaw) { return {std::cos(yaw), std::sin(yaw), 0.0}; }

double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * M_PI);
    if (a <= -M_PI) a += 2.0 * M_PI;
    return a;
}

namespace {

struct SensorAxes {
    Vec3 x, y, z;
};

SensorAxes sensor_axes(const FovSpec& fov, const Vec3& heading) {
    Vec3 xb(heading.x(), heading.y(), 0.0);
    const double len = xb.norm();
    xb = len > 1e-12 ? Vec3(xb / len) : Vec3(Vec3::UnitX());
    const Vec3 zb = Vec3::UnitZ();
    const Vec3 yb = zb.cross(xb);
    const double pitch = deg2rad(fov.f_a);
    const double c = std::cos(pitch), s = std::sin(pitch);
    return {c * xb + s * zb, yb, -s * xb + c * zb};
}

}  // namespace

Vec3 to_sensor_frame(const FovSpec& fov, const Vec3& heading, const Vec3& direction) {
    const auto axes = sensor_axes(fov, heading);
    return {direction.dot(axes.x), direction.dot(axes.y), direction.dot(axes.z)};
}

FovTester::FovTester(const FovSpec& fov, const Vec3& heading) : all_(fov.covers_sphere()) {
    const auto axes = sensor_axes(fov, heading);
    sx_ = axes.x;
    sy_ = axes.y;
    sz_ = axes.z;
    const double half_x = deg2rad(fov.f_x) / 2.0;
    const double half_z = deg2rad(fov.f_z) / 2.0;
    cos_az_ = half_x + kAngleTol >= M_PI ? -2.0 : std::cos(half_x + kAngleTol);
    const double el = half_z + kAngleTol;
    sin_el_ = el >= M_PI / 2.0 ? 2.0 : std::sin(el);
    // Over the pole |el| must reach π − θ; impossible below θ = π/2.
    const double wrap = M_PI - el;
    sin_wrap_ = wrap <= 0.0 ? -1.0 : (wrap > M_PI / 2.0 ? 2.0 : std::sin(wrap));
}

bool FovTester::visible(const Vec3& d) const {
    if (all_) return true;
    const double norm = d.norm();
    if (norm == 0.0) return true;
    const double x = d.dot(sx_), y = d.dot(sy_), z = std::abs(d.dot(sz_));
    const double rho = std::hypot(x, y);
    // |az| ≤ α  ⇔  x ≥ cos(α)·ρ ;  |el| ≤ θ  ⇔  |z| ≤ sin(θ)·‖d‖.
    if (x >= cos_az_ * rho && z <= sin_el_ * norm) return true;
    // Over-the-pole parameterization (az + π, ±π − el) needs |el| ≥ π − θ.
    return -x >= cos_az_ * rho && z >= sin_wrap_ * norm;
}

bool fov_contains(const FovSpec& fov, const Vec3& position, const Vec3& heading, const Vec3& q) {
    return FovTester(fov, heading).visible(q - position);
}

double fov_azimuth(const FovSpec& fov, const Vec3& position, const Vec3& heading, const Vec3& q) {
    const Vec3 s = to_sensor_frame(fov, heading, q - position);
    if (std::hypot(s.x(), s.y()) < 1e-12) return 0.0;
    return std::atan2(s.y(), s.x());
}

std::vector<HalfSpace> fov_inner_halfspaces(const FovSpec& fov, const Vec3& position,
                                            const Vec3& heading, double azimuth) {
    std::vector<HalfSpace> out;
    if (fov.covers_sphere()) return out;

    const auto axes = sensor_axes(fov, heading);
    auto world = [&](double nx, double ny, double nz) {
        return HalfSpace{nx * axes.x + ny * axes.y + nz * axes.z, position, false};
    };

    const double half_x = deg2rad(fov.f_x) / 2.0;
    const double half_z = deg2rad(fov.f_z) / 2.0;
    double phi = azimuth;

    if (fov.f_x < 360.0) {
        // Azimuth wedge [lo, hi] spanning at most π, so it stays convex.
        double lo = -half_x, hi = half_x;
        if (half_x > M_PI / 2.0) {
            phi = std::clamp(phi, -half_x, half_x);
            lo = std::max(-half_x, phi - M_PI / 2.0);
            hi = std::min(half_x, phi + M_PI / 2.0);
        }
        phi = std::clamp(phi, lo, hi);
        out.push_back(world(-std::sin(hi), std::cos(hi), 0.0));
        out.push_back(world(std::sin(lo), -std::cos(lo), 0.0));
    }

    if (half_z < M_PI / 2.0) {
        const double s = std::sin(half_z), c = std::cos(half_z);
        const double cp = std::cos(phi), sp = std::sin(phi);
        out.push_back(world(-s * cp, -s * sp, c));
        out.push_back(world(-s * cp, -s * sp, -c));
    }
    return out;
}

BallLattice::BallLattice(double radius, double resolution, bool planar)
    : radius_(radius), resolution_(resolution), planar_(planar) {
    if (!(resolution > 0.0)) throw EmptySampling("lattice resolution must be positive");
    const double ratio = radius / resolution;
    const int k_max = static_cast<int>(std::floor(ratio + 1e-9));
    const double limit = ratio * ratio * (1.0 + 1e-12);
    for (int i = -k_max; i <= k_max; ++i)
        for (int j = -k_max; j <= k_max; ++j)
            for (int k = planar ? 0 : -k_max; k <= (planar ? 0 : k_max); ++k)
                if (static_cast<double>(i * i + j * j + k * k) <= limit)
                    offsets_.emplace_back(i * resolution, j * resolution, k * resolution);
}

GridSampling discretize(const ConvexRegion& region, double resolution) {
    return discretize(region, BallLattice(region.radius, resolution));
}

GridSampling discretize(const ConvexRegion& region, const BallLattice& lattice) {
    GridSampling out;
    out.resolution = lattice.resolution();
    for (const Vec3& off : lattice.offsets()) {
        const Vec3 q = region.center + off;
        bool inside = true;
        for (const auto& f : region.faces) {
            if (!f.contains(q)) {
                inside = false;
                break;
            }
        }
        if (inside) out.points.push_back(q);
    }
    if (out.points.empty()) throw EmptySampling("no lattice point inside the region");
    out.weights.assign(out.points.size(), 1.0);
    return out;
}

Vec3 project_from_seed(const ConvexRegion& region, const Vec3& q, const Vec3& seed) {
    const auto planes = unit_planes(region);
    const Vec3& c = region.center;
    const double r = region.radius;

    auto project_at = [&](double mu) {
        const Vec3 target = (q + mu * c) / (1.0 + mu);
        return project_polytope(planes, target, seed);
    };

    Vec3 y = project_at(0.0);
    if ((y - c).norm() <= r) return y;

    // ‖y(μ) − c‖ is non-increasing in the ball multiplier μ.
    double lo = 0.0, hi = 1.0;
    Vec3 y_hi = project_at(hi);
    for (int i = 0; i < 200 && (y_hi - c).norm() > r; ++i) {
        lo = hi;
        hi *= 2.0;
        y_hi = project_at(hi);
    }
    if ((y_hi - c).norm() > r) {
        // Saturated multiplier; fall back to the seed, which is feasible.
        return seed;
    }
    for (int i = 0; i < 200; ++i) {
        if (hi - lo <= 1e-15 * (1.0 + hi)) break;
        const double mid = 0.5 * (lo + hi);
        const Vec3 y_mid = project_at(mid);
        if ((y_mid - c).norm() > r) {
            lo = mid;
        } else {
            hi = mid;
            y_hi = y_mid;
            if ((y_mid - c).norm() >= r * (1.0 - 1e-14)) break;
        }
    }
    return y_hi;
}

Vec3 nearest_in_region(const ConvexRegion& region, const Vec3& q, const GridSampling& sampling) {
    if (region_contains(region, q)) return q;

    const double tol = region_tol(region);
    const Vec3* seed = nullptr;
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& s : sampling.points) {
        const double d = (s - q).squaredNorm();
        if (d < best && region_contains(region, s, tol)) {
            best = d;
            seed = &s;
        }
    }
    if (seed == nullptr) throw EmptyRegion("no sample lies inside the region");
    return project_from_seed(region, q, *seed);
}

double distance_to_boundary(const ConvexRegion& region, const Vec3& q) {
    if (!region_contains(region, q, region_tol(region)))
        throw OutsideRegion("point lies outside the region");
    double d = region.radius - (q - region.center).norm();
    for (const auto& f : region.faces) d = std::min(d, -f.signed_value(q) / f.normal.norm());
    return std::max(d, 0.0);
}

}  // namespace irbl::geom

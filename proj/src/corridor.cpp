#include "irbl/corridor.hpp"

#include "irbl/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace irbl::corridor {

namespace {

double segment_distance(const Vec3& a, const Vec3& b, const Vec3& p) {
    const Vec3 ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (a + t * ab - p).norm();
}

// Ellipsoid with foci on the seed segment: semi-axis `major` along axis0 and
// `minor` along the two others, with major² = minor² + (L/2)².
struct FocalEllipsoid {
    Vec3 center;
    Eigen::Matrix3d axes;  // columns: focal axis, two orthogonal directions
    double half_length;
    double minor;

    double major() const { return std::sqrt(minor * minor + half_length * half_length); }

    Vec3 inv_sq_radii() const {
        const double a = major();
        return {1.0 / (a * a), 1.0 / (minor * minor), 1.0 / (minor * minor)};
    }

    double metric_norm(const Vec3& x) const {
        const Vec3 w = axes.transpose() * (x - center);
        return std::sqrt(w.cwiseProduct(w).dot(inv_sq_radii()));
    }
};

FocalEllipsoid make_ellipsoid(const SeedPair& seeds, double minor) {
    FocalEllipsoid e;
    e.center = 0.5 * (seeds.a + seeds.b);
    const Vec3 d = seeds.b - seeds.a;
    e.half_length = 0.5 * d.norm();
    Vec3 e0 = e.half_length > 1e-12 ? Vec3(d.normalized()) : Vec3(Vec3::UnitX());
    Vec3 helper = std::abs(e0.x()) < 0.9 ? Vec3(Vec3::UnitX()) : Vec3(Vec3::UnitY());
    const Vec3 e1 = e0.cross(helper).normalized();
    const Vec3 e2 = e0.cross(e1);
    e.axes.col(0) = e0;
    e.axes.col(1) = e1;
    e.axes.col(2) = e2;
    e.minor = minor;
    return e;
}

// Point of the sphere (o, r) with the smallest ellipsoid norm; the sphere's
// tangent plane there separates it from the ellipsoid level set through it.
Vec3 tangent_point(const FocalEllipsoid& e, const Vec3& o, double r) {
    const Vec3 w = e.axes.transpose() * (o - e.center);
    const Vec3 q = e.inv_sq_radii();
    auto offset = [&](double lambda) {
        return Vec3(-q.x() * w.x() / (q.x() + lambda), -q.y() * w.y() / (q.y() + lambda),
                    -q.z() * w.z() / (q.z() + lambda));
    };
    double lo = 0.0, hi = q.maxCoeff();
    while (offset(hi).norm() > r) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (offset(mid).norm() > r ? lo : hi) = mid;
    }
    const Vec3 e_off = offset(hi);
    // Snap onto the sphere so the plane touches it exactly.
    return o + r * (e.axes * e_off).normalized();
}

std::vector<HalfSpace> separate(const std::vector<Vec3>& points, const FocalEllipsoid& e, double r) {
    std::vector<double> key(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) key[i] = e.metric_norm(points[i]);
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });

    std::vector<char> alive(points.size(), 1);
    std::vector<HalfSpace> planes;
    for (std::size_t idx : order) {
        if (!alive[idx]) continue;
        const Vec3& o = points[idx];
        const Vec3 x = tangent_point(e, o, r);
        const Vec3 n = (o - x).normalized();
        planes.push_back(HalfSpace{n, x, false});
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (alive[j] && n.dot(points[j] - x) >= r * (1.0 - 1e-12)) alive[j] = 0;
        }
        alive[idx] = 0;
    }
    return planes;
}

// Largest confocal minor semi-axis whose ellipsoid fits inside planes ∩ ball.
double inscribed_minor(const FocalEllipsoid& e, const std::vector<HalfSpace>& planes,
                       const ConvexRegion& bound) {
    const double h2 = e.half_length * e.half_length;
    const double room = bound.radius - (e.center - bound.center).norm();
    double best = room * room - h2;
    for (const auto& p : planes) {
        const double gap = p.normal.dot(p.point - e.center);
        const double along = p.normal.dot(e.axes.col(0));
        best = std::min(best, gap * gap - h2 * along * along);
        if (gap <= 0.0) return 0.0;
    }
    return best > 0.0 ? std::sqrt(best) : 0.0;
}

}  // namespace

std::vector<HalfSpace> inflate_region(const PointCloud& cloud, const SeedPair& seeds, double robot_radius,
                                      const ConvexRegion& bound) {
    const double cull = bound.radius + robot_radius;
    std::vector<Vec3> points;
    double clearance = std::numeric_limits<double>::infinity();
    for (const Vec3& o : cloud.points) {
        if ((o - bound.center).norm() > cull) continue;
        const double d = segment_distance(seeds.a, seeds.b, o) - robot_radius;
        if (d <= 1e-9) throw SeedInCollision("cloud point within robot radius of the seed segment");
        clearance = std::min(clearance, d);
        points.push_back(o);
    }
    if (points.empty()) return {};

    FocalEllipsoid thin = make_ellipsoid(seeds, std::min(0.5 * clearance, 1.0));
    std::vector<HalfSpace> planes = separate(points, thin, robot_radius);

    const double grown = 0.999 * inscribed_minor(thin, planes, bound);
    if (grown > thin.minor) {
        FocalEllipsoid wide = thin;
        wide.minor = grown;
        planes = separate(points, wide, robot_radius);
    }
    return planes;
}

ConvexRegion build_B(const ConvexRegion& ball, std::span<const HalfSpace> a_faces,
                     std::span<const HalfSpace> c_faces) {
    ConvexRegion out{ball.center, ball.radius, {}};
    out.faces.reserve(ball.faces.size() + a_faces.size() + c_faces.size());
    out.faces.insert(out.faces.end(), ball.faces.begin(), ball.faces.end());
    out.faces.insert(out.faces.end(), a_faces.begin(), a_faces.end());
    out.faces.insert(out.faces.end(), c_faces.begin(), c_faces.end());
    return out;
}

bool VisibleRegion::contains(const Vec3& q) const {
    return geom::region_contains(cell, q) && geom::fov_contains(fov, position, heading, q);
}

bool VisibleRegion::contains(const Vec3& q, double tol) const {
    return geom::region_contains(cell, q, tol) && geom::fov_contains(fov, position, heading, q);
}

GridSampling VisibleRegion::filter(const GridSampling& samples) const {
    GridSampling out;
    out.resolution = samples.resolution;
    for (std::size_t i = 0; i < samples.points.size(); ++i) {
        if (geom::fov_contains(fov, position, heading, samples.points[i])) {
            out.points.push_back(samples.points[i]);
            out.weights.push_back(samples.weights.empty() ? 1.0 : samples.weights[i]);
        }
    }
    return out;
}

VisibleRegion build_W(const ConvexRegion& cell, const FovSpec& fov, const Vec3& position, const Vec3& heading) {
    return VisibleRegion{cell, fov, position, heading};
}

Vec3 project_visible(const VisibleRegion& region, const Vec3& q, const GridSampling& visible_samples) {
    if (visible_samples.empty()) throw EmptyRegion("no visible sample");
    if (region.contains(q)) return q;
    if (region.fov.covers_sphere()) return geom::nearest_in_region(region.cell, q, visible_samples);

    const double tol = 1e-9 * std::max(region.cell.radius, 1.0);
    const Vec3* nearest = &visible_samples.points.front();
    for (const Vec3& s : visible_samples.points)
        if ((s - q).squaredNorm() < (*nearest - q).squaredNorm()) nearest = &s;

    const double candidates[] = {
        geom::fov_azimuth(region.fov, region.position, region.heading, q),
        geom::fov_azimuth(region.fov, region.position, region.heading, *nearest),
    };

    Vec3 best = *nearest;
    double best_dist = (best - q).norm();
    for (double phi : candidates) {
        ConvexRegion convex = region.cell;
        const auto window = geom::fov_inner_halfspaces(region.fov, region.position, region.heading, phi);
        convex.faces.insert(convex.faces.end(), window.begin(), window.end());

        const Vec3* seed = nullptr;
        double seed_dist = std::numeric_limits<double>::infinity();
        for (const Vec3& s : visible_samples.points) {
            const double d = (s - q).squaredNorm();
            if (d < seed_dist && geom::region_contains(convex, s, tol)) {
                seed_dist = d;
                seed = &s;
            }
        }
        if (seed == nullptr) continue;
        const Vec3 y = geom::project_from_seed(convex, q, *seed);
        const double d = (y - q).norm();
        if (d < best_dist && region.contains(y, tol)) {
            best = y;
            best_dist = d;
        }
    }
    return best;
}

}  // namespace irbl::corridor

#include "irbl/sim.hpp"

#include <algorithm>
#include <cmath>

namespace irbl::sim {

double distance(const Cylinder& c, const Vec3& q) {
    const double radial = std::hypot(q.x() - c.x, q.y() - c.y) - c.radius;
    const double axial = std::max(c.z_min - q.z(), q.z() - c.z_max);
    if (radial <= 0.0 && axial <= 0.0) return std::max(radial, axial);
    return std::hypot(std::max(radial, 0.0), std::max(axial, 0.0));
}

double distance(const Sphere& s, const Vec3& q) { return (q - s.center).norm() - s.radius; }

namespace {

// Parameter interval of a + t(b − a), t ∈ [0, 1], inside the infinite disk
// prism (2D circle test); false when empty.
bool circle_interval(double ox, double oy, double dx, double dy, double r, double& t0, double& t1) {
    const double a = dx * dx + dy * dy;
    const double c = ox * ox + oy * oy - r * r;
    if (a == 0.0) {
        if (c > 0.0) return false;
        t0 = -std::numeric_limits<double>::infinity();
        t1 = std::numeric_limits<double>::infinity();
        return true;
    }
    const double b = ox * dx + oy * dy;
    const double disc = b * b - a * c;
    if (disc < 0.0) return false;
    const double root = std::sqrt(disc);
    t0 = (-b - root) / a;
    t1 = (-b + root) / a;
    return true;
}

}  // namespace

bool segment_hits(const Cylinder& c, const Vec3& a, const Vec3& b) {
    const Vec3 d = b - a;
    double t0, t1;
    if (!circle_interval(a.x() - c.x, a.y() - c.y, d.x(), d.y(), c.radius, t0, t1)) return false;
    double z0 = -std::numeric_limits<double>::infinity(), z1 = std::numeric_limits<double>::infinity();
    if (d.z() != 0.0) {
        z0 = (c.z_min - a.z()) / d.z();
        z1 = (c.z_max - a.z()) / d.z();
        if (z0 > z1) std::swap(z0, z1);
    } else if (a.z() < c.z_min || a.z() > c.z_max) {
        return false;
    }
    const double lo = std::max({t0, z0, 0.0});
    const double hi = std::min({t1, z1, 1.0});
    return lo < hi;
}

bool segment_hits(const Sphere& s, const Vec3& a, const Vec3& b) {
    const Vec3 d = b - a;
    const Vec3 o = a - s.center;
    const double aa = d.squaredNorm();
    const double c = o.squaredNorm() - s.radius * s.radius;
    if (aa == 0.0) return c < 0.0;
    const double bb = o.dot(d);
    const double disc = bb * bb - aa * c;
    if (disc <= 0.0) return false;
    const double root = std::sqrt(disc);
    const double lo = std::max((-bb - root) / aa, 0.0);
    const double hi = std::min((-bb + root) / aa, 1.0);
    return lo < hi;
}

bool Arena::contains(const Vec3& q) const {
    if (q.z() < lo.z() || q.z() > hi.z()) return false;
    if (disk) return std::hypot(q.x() - disk_x, q.y() - disk_y) <= disk_radius;
    return q.x() >= lo.x() && q.x() <= hi.x() && q.y() >= lo.y() && q.y() <= hi.y();
}

double World::obstacle_distance(const Vec3& q) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : cylinders) best = std::min(best, distance(c, q));
    for (const auto& s : spheres) best = std::min(best, distance(s, q));
    return best;
}

namespace {

void ring(std::vector<Vec3>& out, double cx, double cy, double z, double r, double spacing) {
    if (r <= 0.0) {
        out.emplace_back(cx, cy, z);
        return;
    }
    const int n = std::max(8, static_cast<int>(std::ceil(2.0 * M_PI * r / spacing)));
    for (int i = 0; i < n; ++i) {
        const double th = 2.0 * M_PI * i / n;
        out.emplace_back(cx + r * std::cos(th), cy + r * std::sin(th), z);
    }
}

}  // namespace

SurfaceSamples sample_surfaces(const World& world, double spacing) {
    SurfaceSamples out;
    int index = 0;
    for (const auto& c : world.cylinders) {
        SurfaceSamples::Group g;
        const double h = c.z_max - c.z_min;
        g.center = Vec3(c.x, c.y, 0.5 * (c.z_min + c.z_max));
        g.reach = std::hypot(c.radius, 0.5 * h);
        const int nz = std::max(1, static_cast<int>(std::ceil(h / spacing)));
        for (int k = 0; k <= nz; ++k) ring(g.points, c.x, c.y, c.z_min + h * k / nz, c.radius, spacing);
        const int nr = static_cast<int>(std::ceil(c.radius / spacing));
        for (double z : {c.z_min, c.z_max})
            for (int k = 0; k < nr; ++k) ring(g.points, c.x, c.y, z, c.radius * k / nr, spacing);
        out.groups.push_back(std::move(g));
        out.owner.push_back(index++);
    }
    for (const auto& s : world.spheres) {
        SurfaceSamples::Group g;
        g.center = s.center;
        g.reach = s.radius;
        const int n = std::max(16, static_cast<int>(std::ceil(4.0 * M_PI * s.radius * s.radius / (spacing * spacing))));
        const double golden = M_PI * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < n; ++i) {
            const double z = 1.0 - 2.0 * (i + 0.5) / n;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double th = golden * i;
            g.points.push_back(s.center + s.radius * Vec3(r * std::cos(th), r * std::sin(th), z));
        }
        out.groups.push_back(std::move(g));
        out.owner.push_back(index++);
    }
    return out;
}

}  // namespace irbl::sim

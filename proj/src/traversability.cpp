#include "irbl/error.hpp"
#include "irbl/sim.hpp"

#include <algorithm>
#include <cmath>

namespace irbl::sim {

namespace {

// Travel from o (relative to a circle center) along unit d until the circle
// of radius r is reached from outside; +inf when it is missed.
double hit_circle(double ox, double oy, double dx, double dy, double r) {
    const double c = ox * ox + oy * oy - r * r;
    if (c <= 0.0) return 0.0;
    const double b = ox * dx + oy * dy;
    if (b >= 0.0) return std::numeric_limits<double>::infinity();
    const double disc = b * b - c;
    if (disc < 0.0) return std::numeric_limits<double>::infinity();
    return -b - std::sqrt(disc);
}

// Radius of the horizontal cross-section, at height z, of a cylinder grown by r.
double grown_section(const Cylinder& c, double z, double r) {
    const double beyond = std::max(c.z_min - z, z - c.z_max);
    if (beyond <= 0.0) return c.radius + r;
    if (beyond >= r) return -1.0;
    return c.radius + std::sqrt(r * r - beyond * beyond);
}

}  // namespace

double free_travel(const World& world, const Vec3& start, double dx, double dy, double probe_radius) {
    const Arena& arena = world.arena;
    double best = std::numeric_limits<double>::infinity();
    if (arena.disk) {
        const double ox = start.x() - arena.disk_x, oy = start.y() - arena.disk_y;
        const double b = ox * dx + oy * dy;
        const double c = ox * ox + oy * oy - arena.disk_radius * arena.disk_radius;
        best = -b + std::sqrt(std::max(0.0, b * b - c));
    } else {
        if (dx > 0.0) best = std::min(best, (arena.hi.x() - start.x()) / dx);
        if (dx < 0.0) best = std::min(best, (arena.lo.x() - start.x()) / dx);
        if (dy > 0.0) best = std::min(best, (arena.hi.y() - start.y()) / dy);
        if (dy < 0.0) best = std::min(best, (arena.lo.y() - start.y()) / dy);
    }
    for (const auto& c : world.cylinders) {
        const double r = grown_section(c, start.z(), probe_radius);
        if (r > 0.0) best = std::min(best, hit_circle(start.x() - c.x, start.y() - c.y, dx, dy, r));
    }
    for (const auto& s : world.spheres) {
        const double dz = start.z() - s.center.z();
        const double r2 = (s.radius + probe_radius) * (s.radius + probe_radius) - dz * dz;
        if (r2 > 0.0)
            best = std::min(best, hit_circle(start.x() - s.center.x(), start.y() - s.center.y(), dx, dy, std::sqrt(r2)));
    }
    return std::max(best, 0.0);
}

TraversabilityResult traversability(const World& world, const TraversabilityOptions& options, Rng& rng) {
    if (options.trials < 1) throw ConfigError("traversability.trials", "must be >= 1");
    const Arena& arena = world.arena;

    auto draw_start = [&]() -> Vec3 {
        if (options.fixed_start) return *options.fixed_start;
        for (int attempt = 0; attempt < 10000; ++attempt) {
            Vec3 q;
            if (arena.disk) {
                const double x = rng.uniform(-1.0, 1.0), y = rng.uniform(-1.0, 1.0);
                if (x * x + y * y > 1.0) continue;
                q = Vec3(arena.disk_x + arena.disk_radius * x, arena.disk_y + arena.disk_radius * y, world.altitude);
            } else {
                q = Vec3(rng.uniform(arena.lo.x(), arena.hi.x()), rng.uniform(arena.lo.y(), arena.hi.y()), world.altitude);
            }
            if (world.obstacle_distance(q) >= options.probe_radius) return q;
        }
        throw NoFreeSpace("no collision-free start after 10^4 draws");
    };

    // Running mean: repeated equal samples leave it exactly unchanged.
    double mean = 0.0, m2 = 0.0;
    for (int k = 1; k <= options.trials; ++k) {
        const Vec3 start = draw_start();
        const double th = rng.uniform(0.0, 2.0 * M_PI);
        const double d = std::min(options.line_cap, free_travel(world, start, std::cos(th), std::sin(th),
                                                                options.probe_radius));
        const double delta = d - mean;
        mean += delta / k;
        m2 += delta * (d - mean);
    }
    TraversabilityResult out;
    out.tau = mean;
    out.trials = options.trials;
    out.std_error = options.trials > 1 ? std::sqrt(m2 / (options.trials - 1) / options.trials) : 0.0;
    return out;
}

}  // namespace irbl::sim

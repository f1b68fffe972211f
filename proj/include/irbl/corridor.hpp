#pragma once

#include "irbl/geom.hpp"

#include <span>
#include <vector>

// Obstacle-induced safe set built by seeded region inflation over a point
// cloud, and assembly of the robot's cell and its visible part.
namespace irbl::corridor {

using geom::ConvexRegion;
using geom::FovSpec;
using geom::GridSampling;
using geom::HalfSpace;
using geom::Vec3;

struct PointCloud {
    std::vector<Vec3> points;
};

/// Focal points of the inflation ellipsoid.
struct SeedPair {
    Vec3 a{Vec3::Zero()};
    Vec3 b{Vec3::Zero()};
};

/// Separating half-spaces that keep every point of the region at least
/// `robot_radius` away from every cloud point while containing the seed
/// segment. Two passes: planes from a thin ellipsoid with the seeds as foci,
/// then planes again from the largest confocal ellipsoid inscribed in the first
/// polytope. Cloud points beyond bound.radius + robot_radius are ignored.
/// Every surviving point gets separated; there is no plane budget.
/// Throws SeedInCollision when a cloud point lies within robot_radius of the
/// seed segment.
std::vector<HalfSpace> inflate_region(const PointCloud& cloud, const SeedPair& seeds,
                                      double robot_radius, const ConvexRegion& bound);

ConvexRegion build_B(const ConvexRegion& ball, std::span<const HalfSpace> a_faces,
                     std::span<const HalfSpace> c_faces);

/// The cell intersected with the sensor window of the robot at `position`.
struct VisibleRegion {
    ConvexRegion cell;
    FovSpec fov;
    Vec3 position{Vec3::Zero()};
    Vec3 heading{Vec3::UnitX()};

    bool contains(const Vec3& q) const;
    bool contains(const Vec3& q, double tol) const;

    /// Subset of `samples` that are visible.
    GridSampling filter(const GridSampling& samples) const;
};

VisibleRegion build_W(const ConvexRegion& cell, const FovSpec& fov, const Vec3& position,
                      const Vec3& heading);

/// Nearest visible point to `q`. Exact when the window is convex (full sphere,
/// half-space or plane windows); otherwise the best projection over convex
/// inner approximations of the window around the candidate azimuths.
/// Throws EmptyRegion when `visible_samples` is empty.
Vec3 project_visible(const VisibleRegion& region, const Vec3& q, const GridSampling& visible_samples);

}  // namespace irbl::corridor

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <span>
#include <vector>

namespace irbl::geom {

using Vec3 = Eigen::Vector3d;

/// Set {q : normal·(q − point) ≤ 0}, or `< 0` when `strict`.
struct HalfSpace {
    Vec3 normal{Vec3::UnitX()};
    Vec3 point{Vec3::Zero()};
    bool strict{false};

    double signed_value(const Vec3& q) const { return normal.dot(q - point); }

    /// Membership with an absolute slack `tol` (meters along the unit normal).
    bool contains(const Vec3& q, double tol = 0.0) const;

    /// Same set with a unit-length normal.
    HalfSpace normalized() const;
};

/// Ball(center, radius) intersected with every face.
struct ConvexRegion {
    Vec3 center{Vec3::Zero()};
    double radius{1.0};
    std::vector<HalfSpace> faces;
};

bool region_contains(const ConvexRegion& region, const Vec3& q);

/// Membership where every constraint may be violated by at most `tol` meters;
/// strict faces are treated as closed.
bool region_contains(const ConvexRegion& region, const Vec3& q, double tol);

/// Anisotropic sensor window in degrees: horizontal extent, vertical extent and
/// sensor pitch relative to the body frame (negative pitches down).
struct FovSpec {
    double f_x{360.0};
    double f_z{360.0};
    double f_a{0.0};

    /// Throws ConfigError when a field leaves its admissible range.
    void validate() const;

    /// True when every direction is visible.
    bool covers_sphere() const { return f_z >= 360.0 || (f_x >= 360.0 && f_z >= 180.0); }

    friend bool operator==(const FovSpec&, const FovSpec&) = default;
};

Vec3 heading_from_yaw(double yaw);

/// Direction of `q − position` in the pitched sensor frame (not normalized).
Vec3 to_sensor_frame(const FovSpec& fov, const Vec3& heading, const Vec3& direction);

/// Rectangular azimuth/elevation window test in the yaw-aligned, pitch-rotated
/// sensor frame. A direction is visible if either of its two (az, el)
/// parameterizations lies in the window, so vertical extents above 180 deg wrap
/// over the poles. `q == position` is always visible.
bool fov_contains(const FovSpec& fov, const Vec3& position, const Vec3& heading, const Vec3& q);

/// Precomputed sensor axes and window cosines for repeated visibility tests
/// from a fixed pose. Same answers as fov_contains, without trigonometry.
class FovTester {
public:
    FovTester(const FovSpec& fov, const Vec3& heading);

    /// Visibility of the direction `d` (relative to the sensor position).
    bool visible(const Vec3& d) const;

private:
    bool all_;
    Vec3 sx_, sy_, sz_;
    double cos_az_;    // cos(f_x/2 + tol)
    double sin_el_;    // sin(f_z/2 + tol), 2 when unrestricted
    double sin_wrap_;  // sin(π − f_z/2 − tol), 2 when unreachable
};

/// Azimuth (rad) of `q` in the sensor frame; 0 when undefined.
double fov_azimuth(const FovSpec& fov, const Vec3& position, const Vec3& heading, const Vec3& q);

/// Closed half-spaces through `position` whose intersection is a convex subset
/// of the visible cone that contains every visible ray at sensor azimuth
/// `azimuth`. Empty when the sensor sees the whole sphere.
std::vector<HalfSpace> fov_inner_halfspaces(const FovSpec& fov, const Vec3& position,
                                            const Vec3& heading, double azimuth);

struct GridSampling {
    double resolution{0.0};
    std::vector<Vec3> points;
    std::vector<double> weights;

    bool empty() const { return points.empty(); }
    std::size_t size() const { return points.size(); }
};

/// Lattice offsets of pitch `resolution` inside a ball of `radius`, centered at
/// the origin. Precompute once and reuse for every region of the same radius.
/// A planar lattice keeps only the horizontal layer through the center.
class BallLattice {
public:
    BallLattice(double radius, double resolution, bool planar = false);

    double radius() const { return radius_; }
    double resolution() const { return resolution_; }
    bool planar() const { return planar_; }
    std::span<const Vec3> offsets() const { return offsets_; }

private:
    double radius_;
    double resolution_;
    bool planar_;
    std::vector<Vec3> offsets_;
};

/// Lattice points anchored at region.center that lie in the region.
/// Throws EmptySampling when none survive.
GridSampling discretize(const ConvexRegion& region, double resolution);
GridSampling discretize(const ConvexRegion& region, const BallLattice& lattice);

/// Euclidean projection of `q` onto the region. The nearest sample is used as
/// the feasible start of an active-set solve over the faces; the ball is handled
/// through its Lagrange multiplier by bisection. Throws EmptyRegion when no
/// sample lies in the region.
Vec3 nearest_in_region(const ConvexRegion& region, const Vec3& q, const GridSampling& sampling);

/// Projection of `q` onto the region starting from a point already inside it.
Vec3 project_from_seed(const ConvexRegion& region, const Vec3& q, const Vec3& seed);

/// Clearance of an interior point to the region boundary. Throws OutsideRegion.
double distance_to_boundary(const ConvexRegion& region, const Vec3& q);

inline double deg2rad(double deg) { return deg * EIGEN_PI / 180.0; }

/// Wraps an angle to (−π, π].
double wrap_angle(double a);

}  // namespace irbl::geom

#pragma once

#include "irbl/geom.hpp"

#include <span>
#include <utility>
#include <vector>

// Robot-induced safe set: one buffered separating half-space per neighbor.
namespace irbl::cwvd {

using geom::HalfSpace;
using geom::Vec3;

struct RobotDisk {
    Vec3 position{Vec3::Zero()};
    double radius{0.2};
};

struct CwvdParams {
    double epsilon_sep{0.5};  // offset of the plane point along the normal, in [0, 1]
};

/// p̃_i and p̃_j: each position pushed toward the other by δ_i + δ_j.
std::pair<Vec3, Vec3> buffered_points(const RobotDisk& self, const RobotDisk& other);

/// Half-space of `self` induced by `other`. Points of the returned set stay at
/// least δ_i + δ_j away from `other.position`. Throws CoincidentRobots.
HalfSpace neighbor_halfspace(const RobotDisk& self, const RobotDisk& other, const CwvdParams& params);

std::vector<HalfSpace> build_A(const RobotDisk& self, std::span<const RobotDisk> neighbors,
                               const CwvdParams& params);

}  // namespace irbl::cwvd

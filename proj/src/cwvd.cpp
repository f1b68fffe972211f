#include "irbl/cwvd.hpp"

#include "irbl/error.hpp"

namespace irbl::cwvd {

namespace {

constexpr double kCoincident = 1e-9;
constexpr double kDegenerateNormal = 1e-9;

Vec3 unit_direction(const RobotDisk& self, const RobotDisk& other) {
    const Vec3 d = other.position - self.position;
    const double len = d.norm();
    if (len < kCoincident) throw CoincidentRobots("robots share the same position");
    return d / len;
}

}  // namespace

std::pair<Vec3, Vec3> buffered_points(const RobotDisk& self, const RobotDisk& other) {
    const Vec3 u = unit_direction(self, other);
    const double delta = self.radius + other.radius;
    return {self.position + delta * u, other.position - delta * u};
}

HalfSpace neighbor_halfspace(const RobotDisk& self, const RobotDisk& other, const CwvdParams& params) {
    const Vec3 u = unit_direction(self, other);
    const auto [pi_t, pj_t] = buffered_points(self, other);
    Vec3 n = pj_t - pi_t;
    const double n_len = n.norm();

    // At d = 2Δ the buffered points meet and the normal vanishes. Both branches
    // converge to the plane through p̃_i with the robot axis as normal.
    if (n_len < kDegenerateNormal) return HalfSpace{u, pi_t, false};
    const Vec3 n_hat = n / n_len;

    const bool near_branch = (pi_t - self.position).norm() <= (pj_t - self.position).norm();
    if (near_branch) {
        const Vec3 a = pi_t + params.epsilon_sep * n;
        return HalfSpace{n_hat, a, false};
    }
    // {n·(q − p̃_j) > 0} written as {−n̂·(q − p̃_j) < 0}.
    return HalfSpace{-n_hat, pj_t, true};
}

std::vector<HalfSpace> build_A(const RobotDisk& self, std::span<const RobotDisk> neighbors,
                               const CwvdParams& params) {
    std::vector<HalfSpace> out;
    out.reserve(neighbors.size());
    for (const auto& nb : neighbors) out.push_back(neighbor_halfspace(self, nb, params));
    return out;
}

}  // namespace irbl::cwvd

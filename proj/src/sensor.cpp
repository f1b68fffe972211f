#include "irbl/sim.hpp"

#include <cmath>

namespace irbl::sim {

namespace {

bool occluded(const World& world, const std::vector<int>& nearby, const Vec3& from, const Vec3& to) {
    // Stop just short of the target so a surface point does not occlude itself.
    const Vec3 d = to - from;
    const double len = d.norm();
    if (len <= 1e-6) return false;
    const Vec3 end = from + d * ((len - 1e-6) / len);
    const int nc = static_cast<int>(world.cylinders.size());
    for (int k : nearby) {
        const bool hit = k < nc ? segment_hits(world.cylinders[k], from, end)
                                : segment_hits(world.spheres[k - nc], from, end);
        if (hit) return true;
    }
    return false;
}

}  // namespace

SensorSnapshot sense(const World& world, const SurfaceSamples& surfaces, const std::vector<AgentPose>& poses,
                     std::size_t self, const FovSpec& fov, const SensorModel& model, double time, Rng* noise) {
    SensorSnapshot out;
    out.timestamp = time;
    const Vec3& p = poses[self].position;
    const geom::FovTester tester(fov, geom::heading_from_yaw(poses[self].yaw));
    const bool planar = fov.f_z == 0.0;

    auto visible = [&](Vec3 d) {
        if (planar) {
            if (std::abs(d.z()) > model.planar_slab) return false;
            d.z() = 0.0;
        }
        return tester.visible(d);
    };

    std::vector<int> nearby;
    for (std::size_t g = 0; g < surfaces.groups.size(); ++g) {
        const auto& group = surfaces.groups[g];
        if ((group.center - p).norm() - group.reach <= model.range) nearby.push_back(surfaces.owner[g]);
    }
    for (std::size_t g = 0; g < surfaces.groups.size(); ++g) {
        const auto& group = surfaces.groups[g];
        if ((group.center - p).norm() - group.reach > model.range) continue;
        for (const Vec3& q : group.points) {
            const Vec3 d = q - p;
            if (d.norm() > model.range || !visible(d)) continue;
            if (model.occlusion && occluded(world, nearby, p, q)) continue;
            out.cloud.points.push_back(q);
        }
    }

    for (std::size_t j = 0; j < poses.size(); ++j) {
        if (j == self) continue;
        const Vec3& c = poses[j].position;
        const double r = poses[j].radius;
        if ((c - p).norm() > model.range) continue;
        bool seen = false;
        const Vec3 probes[] = {c,
                               c + r * Vec3::UnitX(), c - r * Vec3::UnitX(),
                               c + r * Vec3::UnitY(), c - r * Vec3::UnitY(),
                               c + r * Vec3::UnitZ(), c - r * Vec3::UnitZ()};
        for (const Vec3& q : probes) {
            if (visible(q - p) && !(model.occlusion && occluded(world, nearby, p, q))) {
                seen = true;
                break;
            }
        }
        if (!seen) continue;
        Vec3 observed = c;
        if (model.sigma_obs > 0.0 && noise != nullptr)
            observed += model.sigma_obs * Vec3(noise->normal(), noise->normal(), noise->normal());
        out.neighbors.push_back({observed, r});
    }
    return out;
}

}  // namespace irbl::sim

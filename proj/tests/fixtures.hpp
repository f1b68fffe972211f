#pragma once

#include "irbl/geom.hpp"
#include "irbl/rng.hpp"

#include <cmath>

namespace fixtures {

using irbl::Rng;
using irbl::geom::ConvexRegion;
using irbl::geom::HalfSpace;
using irbl::geom::Vec3;

inline Vec3 random_unit(Rng& rng) {
    const double z = rng.uniform(-1.0, 1.0);
    const double phi = rng.uniform(0.0, 2.0 * M_PI);
    const double s = std::sqrt(1.0 - z * z);
    return {s * std::cos(phi), s * std::sin(phi), z};
}

inline Vec3 random_in_ball(Rng& rng, double r) {
    for (;;) {
        const Vec3 q(rng.uniform(-r, r), rng.uniform(-r, r), rng.uniform(-r, r));
        if (q.norm() <= r) return q;
    }
}

// Ball around `center` cut by `faces` planes that all keep the center inside.
inline ConvexRegion random_region(Rng& rng, int faces, const Vec3& center = Vec3::Zero()) {
    ConvexRegion r;
    r.center = center;
    r.radius = rng.uniform(1.0, 5.0);
    for (int i = 0; i < faces; ++i) {
        const Vec3 n = random_unit(rng);
        r.faces.push_back({n, center + n * rng.uniform(0.1, 1.0) * r.radius, false});
    }
    return r;
}

// Plain loop membership, independent of the library.
inline bool oracle_contains(const ConvexRegion& r, const Vec3& q, double tol = 0.0) {
    if ((q - r.center).norm() > r.radius + tol) return false;
    for (const auto& f : r.faces)
        if (f.normal.dot(q - f.point) / f.normal.norm() > tol) return false;
    return true;
}

}  // namespace fixtures

#include "fixtures.hpp"
#include "irbl/error.hpp"
#include "irbl/lloyd.hpp"

#include <doctest.h>

#include <cmath>

using namespace irbl;
using namespace irbl::lloyd;
using fixtures::oracle_contains;
using fixtures::random_in_ball;
using fixtures::random_unit;

namespace {

// Direct ψ-weighted sum without the shifted-exponent trick.
Vec3 oracle_centroid(const std::vector<Vec3>& pts, const Vec3& p_bar, double beta) {
    Vec3 acc = Vec3::Zero();
    double total = 0.0;
    for (const auto& q : pts) {
        const double w = std::exp(-(q - p_bar).norm() / beta);
        acc += w * q;
        total += w;
    }
    return acc / total;
}

double oracle_clearance(const ConvexRegion& r, const Vec3& q) {
    double d = r.radius - (q - r.center).norm();
    for (const auto& f : r.faces) d = std::min(d, -f.normal.dot(q - f.point) / f.normal.norm());
    return d;
}

}  // namespace

TEST_CASE("psi") {
    const Vec3 pb(1, 2, 3);
    CHECK(psi(pb, pb, 0.7) == 1.0);
    CHECK(psi(pb + Vec3(0.7, 0, 0), pb, 0.7) == doctest::Approx(std::exp(-1.0)));
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        const Vec3 a = random_in_ball(rng, 3), b = random_in_ball(rng, 3);
        const double beta = rng.uniform(0.05, 3.0);
        const double expect = std::exp(((b - pb).norm() - (a - pb).norm()) / beta);
        CHECK(psi(a, pb, beta) / psi(b, pb, beta) == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("centroid examples") {
    GridSampling two;
    two.points = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
    two.weights = {1, 1};
    const double e = std::exp(-1.0);
    CHECK(centroid(two, Vec3(1, 0, 0), 1.0).x() == doctest::Approx(1.0 / (e + 1.0)));
    CHECK(centroid(two, Vec3(1, 0, 0), 1.0).x() == doctest::Approx(0.7311).epsilon(1e-4));

    GridSampling box;
    for (int i = -3; i <= 3; ++i)
        for (int j = -2; j <= 2; ++j)
            for (int k = -1; k <= 1; ++k) box.points.push_back(Vec3(i, j, k) * 0.25 + Vec3(1, 1, 1));
    CHECK((centroid(box, Vec3(9, 9, 9), 1e9) - Vec3(1, 1, 1)).norm() < 1e-6);

    CHECK_THROWS_AS(centroid(GridSampling{}, Vec3::Zero(), 1.0), EmptySampling);
}

TEST_CASE("centroid matches oracle and stays in the hull") {
    Rng rng(2);
    for (int t = 0; t < 100; ++t) {
        GridSampling s;
        const int n = 1 + static_cast<int>(rng.uniform() * 300);
        for (int i = 0; i < n; ++i) s.points.push_back(random_in_ball(rng, 4.0));
        const Vec3 pb = random_in_ball(rng, 8.0);
        const double beta = std::exp(rng.uniform(std::log(0.05), std::log(50.0)));
        const Vec3 c = centroid(s, pb, beta);
        CHECK((c - oracle_centroid(s.points, pb, beta)).norm() < 1e-9);
        for (int a = 0; a < 3; ++a) {
            double lo = 1e300, hi = -1e300;
            for (const auto& q : s.points) lo = std::min(lo, q[a]), hi = std::max(hi, q[a]);
            CHECK(c[a] >= lo - 1e-12);
            CHECK(c[a] <= hi + 1e-12);
        }
    }
}

TEST_CASE("free centroid of the ball") {
    const ConvexRegion ball{Vec3(1, 2, 3), 2.0, {}};
    const GridSampling s = geom::discretize(ball, 0.25);
    CHECK((free_centroid(s, Vec3(1, 2, 3) + Vec3(9, 0, 0), 1e9) - ball.center).norm() < 1e-6);
    const Vec3 c = free_centroid(s, ball.center + Vec3(3, 0, 0), 0.5);
    CHECK(c.x() > ball.center.x());
    CHECK(c == centroid(s, ball.center + Vec3(3, 0, 0), 0.5));
}

TEST_CASE("beta Euler step") {
    RuleParams p;
    const Vec3 pos = Vec3::Zero();
    // Congested: c_B near p, c_S far from c_B.
    CHECK(beta_step(0.5, Vec3(0.1, 0, 0), Vec3(2, 0, 0), pos, 0.1, p) == doctest::Approx(0.45));
    CHECK(beta_step(0.1, Vec3(3, 0, 0), Vec3(3, 0, 0), pos, 0.1, p) == doctest::Approx(0.14));
}

TEST_CASE("beta clamp") {
    // Ball with p_bar outside: small β hugs the boundary.
    const ConvexRegion cell{Vec3::Zero(), 2.0, {{Vec3::UnitX(), Vec3(0.5, 0, 0), false}}};
    const GridSampling s = geom::discretize(cell, 0.25);
    const Vec3 pb(3, 0, 0);
    RuleParams rules;
    const double bm = beta_min(cell, s, pb, rules.d_u);
    REQUIRE(bm > 0.1);
    const double clamped = clamp_beta(0.75 * bm, cell, s, pb, rules);
    CHECK(clamped == doctest::Approx(bm).epsilon(1e-3));
    CHECK(clamp_beta(2.0 * bm, cell, s, pb, rules) == 2.0 * bm);
    CHECK(clamp_beta(1e6, cell, s, pb, rules) == rules.beta_cap);

    RuleState st;
    st.beta = 0.75 * bm;
    st.p_bar = pb;
    const double next = update_beta(st, Vec3(3, 0, 0), Vec3(3, 0, 0), Vec3::Zero(), 0.1, rules, cell, s);
    CHECK(next >= bm - 1e-3);
    CHECK(next <= rules.beta_cap);
}

TEST_CASE("beta_min examples") {
    const ConvexRegion ball{Vec3::Zero(), 2.0, {}};
    const GridSampling s = geom::discretize(ball, 0.25);
    CHECK(beta_min(ball, s, Vec3::Zero(), 0.3) == kBetaFloor);

    const ConvexRegion sliver{Vec3::Zero(), 2.0,
                              {{Vec3::UnitZ(), Vec3(0, 0, 0.1), false}, {-Vec3::UnitZ(), Vec3(0, 0, -0.1), false}}};
    CHECK(beta_min(sliver, geom::discretize(sliver, 0.1), Vec3(1, 0, 0), 0.3) == 50.0);
    CHECK_THROWS_AS(beta_min(ball, GridSampling{}, Vec3::Zero(), 0.3), EmptySampling);
}

TEST_CASE("beta_min matches a dense scan of the squared objective") {
    const ConvexRegion ball{Vec3::Zero(), 2.0, {}};
    const GridSampling s = geom::discretize(ball, 0.25);
    const Vec3 pb(2, 0, 0);
    const double d_u = 0.3;
    double best_beta = 0, best = 1e300;
    for (double b = 1e-3; b <= 10.0; b += 1e-3) {
        const double obj = std::pow(oracle_clearance(ball, oracle_centroid(s.points, pb, b)) - d_u, 2);
        if (obj < best) best = obj, best_beta = b;
    }
    CHECK(std::abs(beta_min(ball, s, pb, d_u) - best_beta) < 1e-2);
}

TEST_CASE("margin and clamp invariants") {
    Rng rng(5);
    RuleParams rules;
    for (int t = 0; t < 40; ++t) {
        const ConvexRegion cell = fixtures::random_region(rng, 4);
        const GridSampling s = geom::discretize(cell, 0.25);
        const Vec3 pb = random_in_ball(rng, 8.0);
        const double bm = beta_min(cell, s, pb, rules.d_u);
        CHECK(bm >= kBetaFloor);
        CHECK(bm <= rules.beta_cap);
        const Vec3 c = centroid(s, pb, bm);
        CHECK(oracle_contains(cell, c, 1e-9));
        if (bm < rules.beta_cap) CHECK(oracle_clearance(cell, c) >= rules.d_u - s.resolution);
        const double clamped = clamp_beta(rng.uniform(kBetaFloor, 5.0), cell, s, pb, rules);
        const bool feasible = oracle_clearance(cell, centroid(s, pb, clamped)) >= rules.d_u - 1e-12;
        CHECK((feasible || clamped == rules.beta_cap));
    }
}

TEST_CASE("uniform limit equals sample mean") {
    Rng rng(6);
    const ConvexRegion cell = fixtures::random_region(rng, 4);
    const GridSampling s = geom::discretize(cell, 0.25);
    Vec3 mean = Vec3::Zero();
    for (const auto& q : s.points) mean += q;
    mean /= double(s.size());
    CHECK((centroid(s, Vec3(40, -3, 2), 1e9) - mean).norm() < 1e-6);
}

TEST_CASE("attraction monotonicity on symmetric cells") {
    const ConvexRegion cell{Vec3::Zero(), 2.0,
                            {{Vec3::UnitX(), Vec3(1, 0, 0), false}, {-Vec3::UnitX(), Vec3(-1, 0, 0), false}}};
    const GridSampling s = geom::discretize(cell, 0.25);
    for (double beta : {0.1, 0.5, 2.0}) {
        double prev = -1e300;
        for (double x = -5.0; x <= 5.0; x += 0.25) {
            const double cx = centroid(s, Vec3(x, 0, 0), beta).x();
            CHECK(cx >= prev - 1e-12);
            prev = cx;
        }
    }
}

TEST_CASE("p_bar update") {
    RuleParams rules;
    RuleState st;
    st.p_bar = Vec3::Zero();
    const Vec3 far(5, 0, 0);
    const auto free_step = update_pbar(st, Vec3(1, 0, 0), far, far, far, Vec3::Zero(), 0.1, rules);
    CHECK((free_step.p_bar - Vec3(0.1, 0, 0)).norm() < 1e-12);
    CHECK_FALSE(free_step.rotated);

    const Vec3 target = rotated_waypoint(Vec3(1, 0, 0), Vec3::Zero(), 0.01);
    CHECK((target - Vec3(std::sin(0.01), std::cos(0.01), 0)).norm() < 1e-12);
    CHECK(target.x() == doctest::Approx(0.0100).epsilon(1e-3));
    CHECK(target.y() == doctest::Approx(0.99995));

    const auto congested = update_pbar(st, Vec3(1, 0, 0), Vec3(0.1, 0, 0), Vec3(0.1, 0, 0), Vec3(3, 0, 0),
                                       Vec3::Zero(), 0.1, rules);
    CHECK(congested.rotated);
    CHECK(congested.p_bar.y() > 0.0);

    RuleState rot = st;
    rot.rotated = true;
    rot.p_bar = Vec3(0.3, 0.9, 0);
    const auto snap = update_pbar(rot, Vec3(1, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(1, 0, 0), Vec3::Zero(), 0.1,
                                  rules);
    CHECK_FALSE(snap.rotated);
    CHECK(snap.p_bar == Vec3(1, 0, 0));
}

TEST_CASE("rotation is anchored at the robot") {
    const Vec3 p(10, -4, 2);
    const Vec3 r = rotated_waypoint(p + Vec3(1, 0, 0), p, 0.01);
    CHECK(((r - p) - Vec3(std::sin(0.01), std::cos(0.01), 0)).norm() < 1e-12);
}

TEST_CASE("pipeline tick without obstacles pulls toward the waypoint") {
    const geom::BallLattice lattice(5.0, 0.25);
    AgentView v;
    v.position = Vec3(1, 1, 2);
    v.waypoint = Vec3(6, 1, 2);
    v.state.p_bar = v.waypoint;
    const TickResult r = pipeline_tick(v, {}, lattice);
    CHECK(r.projection.x() > v.position.x() + 0.5);
    CHECK(std::abs(r.projection.y() - 1.0) < 1e-6);
    CHECK(oracle_contains(r.cell, r.c_B, 1e-9));

    const TickResult again = pipeline_tick(v, {}, lattice);
    CHECK(again.c_B == r.c_B);
    CHECK(again.projection == r.projection);
    CHECK(again.state.beta == r.state.beta);
    CHECK(again.state.p_bar == r.state.p_bar);
}

TEST_CASE("pipeline tick with a neighbor inside the buffer") {
    const geom::BallLattice lattice(5.0, 0.25);
    AgentView v;
    v.radius = 0.5;
    v.waypoint = Vec3(4, 0, 0);
    v.state.p_bar = v.waypoint;
    v.neighbors = {{Vec3(0.8, 0, 0), 0.5}};
    for (const Vec3& u : {Vec3(-1, 1, 1), Vec3(-1, -1, 1), Vec3(-1, 0, -1)}) v.neighbors.push_back({3.0 * u.normalized(), 0.5});
    const TickResult r = pipeline_tick(v, {}, lattice);
    CHECK_FALSE(geom::region_contains(r.cell, v.position));
    CHECK(r.projection.x() < -0.2 + 1e-9);
    CHECK(oracle_contains(r.cell, r.projection, 1e-9));
    // Projection is the nearest cell sample point to c_B or better.
    for (const auto& q : geom::discretize(r.cell, lattice).points)
        CHECK((q - r.c_B).norm() >= (r.projection - r.c_B).norm() - 1e-9);
}

TEST_CASE("pipeline tick with four close neighbors is infeasible") {
    const geom::BallLattice lattice(5.0, 0.25);
    AgentView v;
    v.radius = 0.5;
    for (const Vec3& u : {Vec3(1, 1, 1), Vec3(1, -1, -1), Vec3(-1, 1, -1), Vec3(-1, -1, 1)})
        v.neighbors.push_back({0.8 * u.normalized(), 0.5});
    CHECK_THROWS_AS(pipeline_tick(v, {}, lattice), InfeasibleCell);
}

TEST_CASE("pipeline invariants on random snapshots") {
    Rng rng(9);
    const geom::BallLattice lattice(5.0, 0.25);
    const geom::FovSpec fovs[] = {{180, 59, -20}, {180, 180, -90}, {180, 360, 0}};
    int ticks = 0;
    for (int t = 0; t < 60; ++t) {
        AgentView v;
        v.fov = fovs[t % 3];
        v.heading = geom::heading_from_yaw(rng.uniform(-M_PI, M_PI));
        v.waypoint = 4.0 * random_unit(rng);
        v.state.p_bar = v.waypoint;
        v.state.beta = rng.uniform(0.05, 2.0);
        for (int k = 0; k < 3; ++k) v.neighbors.push_back({rng.uniform(1.0, 4.0) * random_unit(rng), 0.2});
        for (int k = 0; k < 40; ++k) {
            const Vec3 o = rng.uniform(0.6, 5.0) * random_unit(rng);
            v.cloud.points.push_back(o);
        }
        try {
            const TickResult r = pipeline_tick(v, {}, lattice);
            ++ticks;
            CHECK(oracle_contains(r.cell, r.c_B, 1e-9));
            CHECK(oracle_contains(r.cell, r.projection, 1e-9));
            CHECK(geom::fov_contains(v.fov, v.position, v.heading, r.projection));
            CHECK(r.state.beta >= kBetaFloor);
            CHECK(r.state.beta <= RuleParams{}.beta_cap);
            for (const auto& o : v.cloud.points) CHECK((r.projection - o).norm() >= v.radius - 1e-6);
        } catch (const InfeasibleCell&) {
        }
    }
    CHECK(ticks > 30);
}

// Acceptance suite: one pass/fail line per criterion. `--only N` runs one.

#include "fixtures.hpp"
#include "irbl/config.hpp"
#include "irbl/corridor.hpp"
#include "irbl/ctl.hpp"
#include "irbl/cwvd.hpp"
#include "irbl/error.hpp"
#include "irbl/geom.hpp"
#include "irbl/lloyd.hpp"
#include "irbl/plan.hpp"
#include "irbl/report_io.hpp"
#include "irbl/sim.hpp"
#include "irbl/suite.hpp"
#include "oracles.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>

using namespace irbl;
using fixtures::oracle_contains;
using fixtures::random_in_ball;
using fixtures::random_unit;
using geom::ConvexRegion;
using geom::Vec3;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

int hardware_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// 1. Every sampled point of the neighbor half-space keeps Δ from p_j. Points
// are drawn in a ball of radius 2Δ around the foot of p_j on the boundary
// plane, where the half-space comes closest to p_j; draws on the wrong side
// are mirrored across the plane, so every draw is a cell point.
Outcome cwvd_point_safety() {
    Rng rng(101);
    long checked = 0, bad = 0;
    double worst = 1e300;
    for (int t = 0; t < 1000; ++t) {
        const cwvd::RobotDisk i{random_in_ball(rng, 3.0), rng.uniform(0.1, 1.0)};
        const double rj = rng.uniform(0.1, 1.0);
        const cwvd::RobotDisk j{i.position + rng.uniform(0.05, 4.0 * (i.radius + rj)) * random_unit(rng), rj};
        const double delta = i.radius + j.radius;
        for (int e = 0; e < 3; ++e) {
            const geom::HalfSpace h = cwvd::neighbor_halfspace(i, j, {0.5 * e});
            const Vec3 n = h.normal.normalized();
            const Vec3 foot = j.position - n.dot(j.position - h.point) * n;
            for (int k = 0; k < (e == 0 ? 33334 : 33333); ++k) {
                Vec3 q = foot + random_in_ball(rng, 2.0 * delta);
                if (!h.contains(q)) q -= 2.0 * n.dot(q - h.point) * n;
                if (!h.contains(q)) continue;  // on the plane of a strict half-space
                ++checked;
                const double margin = (q - j.position).norm() - delta;
                worst = std::min(worst, margin);
                if (margin < -1e-6) ++bad;
            }
        }
    }
    return {bad == 0 && checked > 0, fmt("%ld cell points checked, worst margin %.3g m, %ld violations", checked, worst, bad)};
}

// 2. Corridor clearance and seed containment on random clouds.
Outcome corridor_clearance() {
    Rng rng(202);
    long bad = 0, points = 0;
    int seeds_out = 0;
    double worst = 1e300;
    const ConvexRegion ball{Vec3::Zero(), 5.0, {}};
    for (int t = 0; t < 1000; ++t) {
        const double r = rng.uniform(0.1, 0.6);
        const Vec3 sa = Vec3::Zero(), sb = random_in_ball(rng, 2.0);
        corridor::PointCloud cloud;
        const int n = 1 + static_cast<int>(rng.uniform() * 200);
        while (static_cast<int>(cloud.points.size()) < n) {
            const Vec3 o = random_in_ball(rng, 6.0);
            const Vec3 ab = sb - sa;
            const double s = std::clamp((o - sa).dot(ab) / std::max(ab.squaredNorm(), 1e-12), 0.0, 1.0);
            if ((o - (sa + s * ab)).norm() > r + 1e-3) cloud.points.push_back(o);
        }
        ConvexRegion region = ball;
        region.faces = corridor::inflate_region(cloud, {sa, sb}, r, ball);
        if (!oracle_contains(region, sa, 1e-9) || !oracle_contains(region, sb, 1e-9)) ++seeds_out;
        for (int k = 0; k < 4000; ++k) {
            const Vec3 q = random_in_ball(rng, 5.0);
            if (!oracle_contains(region, q)) continue;
            ++points;
            for (const auto& o : cloud.points) {
                const double m = (q - o).norm() - r;
                worst = std::min(worst, m);
                if (m < -1e-6) ++bad;
            }
        }
    }
    return {bad == 0 && seeds_out == 0,
            fmt("%ld corridor samples, worst margin %.3g m, %ld violations, %d seeds outside", points, worst, bad, seeds_out)};
}

// Brute-force ψ-weighted centroid over a cubic grid of the region.
Vec3 brute_centroid(const ConvexRegion& r, const Vec3& p_bar, double beta, double h) {
    std::vector<Vec3> pts;
    std::vector<double> dist;
    const int m = static_cast<int>(std::floor(r.radius / h));
    for (int x = -m; x <= m; ++x)
        for (int y = -m; y <= m; ++y)
            for (int z = -m; z <= m; ++z) {
                const Vec3 q = r.center + h * Vec3(x, y, z);
                if (!oracle_contains(r, q)) continue;
                pts.push_back(q);
                dist.push_back((q - p_bar).norm());
            }
    const double lo = *std::min_element(dist.begin(), dist.end());
    Vec3 acc = Vec3::Zero();
    double total = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const double w = std::exp(-(dist[k] - lo) / beta);
        acc += w * pts[k];
        total += w;
    }
    return acc / total;
}

// 3. Coarse centroid against a fine brute-force centroid.
Outcome centroid_oracle() {
    Rng rng(303);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        ConvexRegion r = fixtures::random_region(rng, 1 + t % 6);
        r.radius = rng.uniform(1.0, 3.0);
        for (auto& f : r.faces) f.point = r.center + f.normal * rng.uniform(0.3, 1.0) * r.radius;
        const Vec3 p_bar = random_in_ball(rng, 2.0 * r.radius);
        const double beta = std::exp(rng.uniform(std::log(0.3), std::log(5.0)));
        const Vec3 coarse = lloyd::centroid(geom::discretize(r, 0.25), p_bar, beta);
        const Vec3 fine = brute_centroid(r, p_bar, beta, 0.05);
        worst = std::max(worst, (coarse - fine).norm());
    }
    return {worst <= 0.5 * 0.25, fmt("100 cells, worst centroid gap %.4f m (limit 0.125)", worst)};
}

// 4. Exact projection against dense samples, and idempotence.
Outcome projection_oracle() {
    Rng rng(404);
    double worst = 1e300, drift = 0.0;
    int outside = 0;
    for (int t = 0; t < 10000; ++t) {
        const ConvexRegion r = fixtures::random_region(rng, 1 + t % 7);
        const geom::GridSampling coarse = geom::discretize(r, r.radius / 8);
        const Vec3 q = random_in_ball(rng, 2.0 * r.radius);
        const Vec3 proj = geom::nearest_in_region(r, q, coarse);
        if (!oracle_contains(r, proj, 1e-9 * r.radius + 1e-12)) ++outside;
        const double d = (q - proj).norm();
        for (const auto& y : geom::discretize(r, r.radius / 10).points) worst = std::min(worst, (q - y).norm() - d);
        drift = std::max(drift, (geom::nearest_in_region(r, proj, coarse) - proj).norm());
    }
    return {worst >= -1e-6 && drift < 1e-9 && outside == 0,
            fmt("10^4 projections, worst sample margin %.3g, idempotence drift %.3g, %d outside", worst, drift, outside)};
}

double clearance(const ConvexRegion& r, const Vec3& q) {
    double d = r.radius - (q - r.center).norm();
    for (const auto& f : r.faces) d = std::min(d, -f.normal.dot(q - f.point) / f.normal.norm());
    return d;
}

// 5. β_min against a dense scan: the smallest scanned β whose centroid keeps
// d_u from the boundary, i.e. where the squared objective first reaches zero.
Outcome beta_min_oracle() {
    Rng rng(505);
    double worst = 0.0;
    int crossings = 0;
    const double cap = 10.0, d_u = 0.3;
    for (int t = 0; t < 50; ++t) {
        const ConvexRegion r = fixtures::random_region(rng, t % 5);
        const geom::GridSampling s = geom::discretize(r, r.radius / 8);
        const Vec3 p_bar = r.center + rng.uniform(0.5, 2.0) * r.radius * random_unit(rng);
        std::vector<double> dist;
        for (const auto& q : s.points) dist.push_back((q - p_bar).norm());
        const double lo = *std::min_element(dist.begin(), dist.end());
        double expect = cap;
        for (double b = 1e-3; b <= cap + 1e-12; b += 1e-3) {
            Vec3 acc = Vec3::Zero();
            double total = 0.0;
            for (std::size_t k = 0; k < s.points.size(); ++k) {
                const double w = std::exp(-(dist[k] - lo) / b);
                acc += w * s.points[k];
                total += w;
            }
            if (clearance(r, acc / total) >= d_u) {
                expect = b;
                break;
            }
        }
        if (expect > 1e-3 && expect < cap) ++crossings;
        worst = std::max(worst, std::abs(lloyd::beta_min(r, s, p_bar, d_u, cap) - expect));
    }
    return {worst <= 1e-2, fmt("50 cells (%d with an interior crossing), worst gap %.4g", crossings, worst)};
}

bool admissible(const ctl::AxisState& x0, const Eigen::VectorXd& u, const ctl::MpcConfig& cfg) {
    ctl::AxisState x = x0;
    for (int k = 0; k < u.size(); ++k) {
        x = ctl::axis_step(x, u[k], cfg.dt);
        if (std::abs(x.v) > cfg.v_max + 1e-9 || std::abs(x.a) > cfg.a_max + 1e-9 || std::abs(u[k]) > cfg.j_max + 1e-9)
            return false;
    }
    return true;
}

// 6. MPC contract on random single-axis instances.
Outcome mpc_contract() {
    Rng rng(606);
    double residual = 0.0, excess = -1e300, dominance = -1e300, lsq = 0.0;
    int unconstrained = 0, braked = 0;
    for (int t = 0; t < 1000; ++t) {
        ctl::MpcConfig cfg;
        const bool generous = t % 2 == 1;
        cfg.v_max = generous ? 1e3 : rng.uniform(0.2, 4.0);
        cfg.a_max = generous ? 1e3 : rng.uniform(0.5, 4.0);
        cfg.j_max = generous ? 1e4 : rng.uniform(1.0, 20.0);
        const double lim_v = generous ? 3.0 : cfg.v_max, lim_a = generous ? 3.0 : cfg.a_max;
        const ctl::AxisState x0{rng.uniform(-5, 5), rng.uniform(-lim_v, lim_v), rng.uniform(-lim_a, lim_a)};
        const double ref = rng.uniform(-10, 10);
        const ctl::AxisSolution s = ctl::solve_axis(x0, ref, cfg);
        ctl::AxisState x = x0;
        for (int k = 0; k < cfg.horizon; ++k) {
            x = {x.p + x.v * cfg.dt + 0.5 * x.a * cfg.dt * cfg.dt, x.v + x.a * cfg.dt, x.a + s.u[k] * cfg.dt};
            const auto& y = s.states[k + 1];
            residual = std::max({residual, std::abs(x.p - y.p), std::abs(x.v - y.v), std::abs(x.a - y.a)});
            if (!s.relaxed) excess = std::max(excess, std::abs(y.v) - cfg.v_max);
            excess = std::max({excess, std::abs(y.a) - cfg.a_max, std::abs(s.u[k]) - cfg.j_max});
        }
        // Baseline: the zero-input rollout, or the braking rollout when zero
        // input breaks a bound.
        Eigen::VectorXd base = Eigen::VectorXd::Zero(cfg.horizon);
        if (!admissible(x0, base, cfg)) {
            ++braked;
            ctl::AxisState b = x0;
            for (int k = 0; k < cfg.horizon; ++k) {
                base[k] = std::clamp(-b.a / cfg.dt, -cfg.j_max, cfg.j_max);
                b = ctl::axis_step(b, base[k], cfg.dt);
            }
        }
        if (!s.relaxed) dominance = std::max(dominance, s.objective - ctl::axis_objective(x0, base, ref, cfg));
        if (!s.constrained) {
            ++unconstrained;
            const auto o = oracles::axis_least_squares(x0.p, x0.v, x0.a, ref, cfg);
            lsq = std::max(lsq, (s.u - o.u).norm() / std::max(o.u.norm(), 1e-12));
        }
    }
    const bool pass = residual <= 1e-9 && excess <= 1e-9 && dominance <= 1e-9 && lsq <= 1e-4 && unconstrained > 0;
    return {pass, fmt("residual %.3g, bound excess %.3g, objective minus baseline %.3g (%d braking baselines), %d "
                      "unconstrained with lsq gap %.3g",
                      residual, excess, dominance, braked, unconstrained, lsq)};
}

// 7. Pre-shortcut A* cost equals Dijkstra on random grids.
Outcome astar_optimality() {
    Rng rng(707);
    int equal = 0, nopath = 0, mismatched = 0;
    for (int t = 0; t < 100; ++t) {
        const int n = 20;
        const double cell = 0.25;
        const double inflation = std::array{0.1, 0.3, 0.4}[t % 3];
        oracles::DenseGrid d{n, std::vector<char>(n * n * n, 0)};
        plan::OccupancyGrid g(cell, inflation);
        const double density = rng.uniform(0.02, 0.1);
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y)
                for (int z = 0; z < n; ++z)
                    if (rng.uniform() < density) {
                        d.occ[(x * n + y) * n + z] = 1;
                        g.insert(Vec3(x, y, z) * cell);
                    }
        const auto blocked = oracles::blocked_mask(d, cell, inflation);
        auto free_cell = [&] {
            for (;;) {
                std::array<int, 3> c{int(rng.uniform() * n), int(rng.uniform() * n), int(rng.uniform() * n)};
                if (!blocked[(c[0] * n + c[1]) * n + c[2]]) return c;
            }
        };
        const auto s = free_cell(), e = free_cell();
        const auto oracle = oracles::dijkstra(d, blocked, s, e);
        const Vec3 start = Vec3(s[0], s[1], s[2]) * cell, goal = Vec3(e[0], e[1], e[2]) * cell;
        const plan::SearchBounds b{{0, 0, 0}, {n - 1, n - 1, n - 1}};
        try {
            const plan::PlanResult r = plan::plan_path(g, start, goal, inflation, b);
            if (oracle && r.steps == *oracle) ++equal;
            else ++mismatched;
        } catch (const NoPath&) {
            if (oracle) ++mismatched;
            else ++nopath;
        }
    }
    return {mismatched == 0, fmt("%d equal costs, %d agreed no-path, %d mismatches", equal, nopath, mismatched)};
}

config::ExperimentConfig base_config(const std::string& kind, int n) {
    config::ExperimentConfig c;
    c.scenario.kind = kind;
    c.scenario.n = n;
    c.delta = 0.2;
    c.fov = config::fov_preset("half");
    c.seeds = {1, 2, 3, 4, 5};
    return c;
}

// 8. All-success runs at δ = 0.2 with the lower-hemisphere FoV.
Outcome end_to_end() {
    int runs = 0, agents = 0, failures = 0;
    std::string first_failure;
    for (const auto& [kind, n] : std::vector<std::pair<std::string, int>>{{"circle", 10}, {"circle_obstacles", 10}, {"forest", 5}}) {
        const config::ExperimentConfig c = base_config(kind, n);
        std::vector<suite::RunSpec> specs;
        for (auto seed : c.seeds) specs.push_back(suite::single(c, seed));
        const suite::BatchResult batch = suite::run_batch(c, specs, hardware_workers());
        for (std::size_t k = 0; k < specs.size(); ++k) {
            ++runs;
            if (!batch.reports[k]) {
                ++failures;
                if (first_failure.empty()) first_failure = specs[k].name() + ": " + batch.errors[k];
                continue;
            }
            for (std::size_t i = 0; i < batch.reports[k]->agents.size(); ++i) {
                const auto& m = batch.reports[k]->agents[i];
                ++agents;
                const bool ok = m.sr_acc && m.sr_conv && m.sr_safe && m.dmin >= 0.4 && m.domin >= 0.2 && m.t &&
                                *m.t < c.sim.t_max;
                if (!ok) {
                    ++failures;
                    if (first_failure.empty())
                        first_failure = fmt("%s agent %zu: acc %d conv %d safe %d dmin %.3f domin %.3f",
                                            specs[k].name().c_str(), i, m.sr_acc, m.sr_conv, m.sr_safe, m.dmin, m.domin);
                }
            }
        }
    }
    std::string d = fmt("%d runs, %d agents, %d failures", runs, agents, failures);
    if (!first_failure.empty()) d += "; first: " + first_failure;
    return {failures == 0, d};
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// 9. Median v̄ ordering full ≥ half ≥ 2D, with a 5% tie allowance.
Outcome fov_ablation() {
    std::map<std::string, double> med;
    int unconverged = 0;
    for (const std::string fov : {"full", "half", "2d"}) {
        config::ExperimentConfig c = base_config("circle", 10);
        c.fov = config::fov_preset(fov);
        std::vector<suite::RunSpec> specs;
        for (auto seed : c.seeds) specs.push_back(suite::single(c, seed));
        const suite::BatchResult batch = suite::run_batch(c, specs, hardware_workers());
        std::vector<double> v;
        for (const auto& r : batch.reports) {
            if (!r) continue;
            for (const auto& m : r->agents) {
                if (m.vbar) v.push_back(*m.vbar);
                else ++unconverged;
            }
        }
        med[fov] = v.empty() ? 0.0 : median(v);
    }
    auto geq = [](double a, double b) { return a >= 0.95 * b; };
    const bool pass = geq(med["full"], med["half"]) && geq(med["half"], med["2d"]);
    return {pass, fmt("median vbar full %.3f, half %.3f, 2d %.3f m/s (%d agents without arrival)", med["full"],
                      med["half"], med["2d"], unconverged)};
}

// 10. Traversability: exact fixed-start disk and a Monte-Carlo oracle written
// with the standard library generators.
Outcome traversability_check() {
    sim::World disk;
    disk.arena.disk = true;
    disk.arena.disk_radius = 12.5;
    sim::TraversabilityOptions fixed;
    fixed.trials = 10000;
    fixed.fixed_start = Vec3(0, 0, 2);
    Rng rng(1010);
    const double tau_disk = sim::traversability(disk, fixed, rng).tau;

    sim::World square;
    square.arena.lo = Vec3(-10, -10, 0);
    square.arena.hi = Vec3(10, 10, 4);
    sim::TraversabilityOptions uniform;
    uniform.trials = 100000;
    uniform.probe_radius = 0.2;
    const sim::TraversabilityResult est = sim::traversability(square, uniform, rng);

    std::mt19937_64 eng(99);
    std::uniform_real_distribution<double> pos(-10.0, 10.0), ang(-M_PI, M_PI);
    const int n = 100000;
    double sum = 0.0, sum2 = 0.0;
    for (int k = 0; k < n; ++k) {
        const double x = pos(eng), y = pos(eng), th = ang(eng);
        const double c = std::cos(th), s = std::sin(th);
        // Exit distance by marching to the nearest wall crossing per axis.
        double tx = std::numeric_limits<double>::infinity(), ty = tx;
        if (std::abs(c) > 0.0) tx = ((c > 0 ? 10.0 : -10.0) - x) / c;
        if (std::abs(s) > 0.0) ty = ((s > 0 ? 10.0 : -10.0) - y) / s;
        const double d = std::min(tx, ty);
        sum += d;
        sum2 += d * d;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum2 / n - mean * mean) / (n - 1));
    const double combined = std::hypot(se, est.std_error);
    const double gap = std::abs(est.tau - mean);
    const bool pass = tau_disk == 12.5 && gap <= 2.0 * combined;
    return {pass, fmt("disk tau %.17g (R 12.5); square tau %.4f vs oracle %.4f, gap %.4f, 2 combined se %.4f", tau_disk,
                      est.tau, mean, gap, 2.0 * combined)};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// 11. Byte-identical artifacts across repeats and worker counts.
Outcome determinism() {
    config::ExperimentConfig c;
    c.scenario.kind = "circle_obstacles";
    c.scenario.n = 4;
    c.scenario.circle_radius = 6.0;
    c.scenario.obstacle_count = 4;
    c.scenario.obstacle_keepout = 1.5;
    c.scenario.obstacle_spacing = 2.5;
    c.sim.t_max = 30.0;
    c.sim.traversability_trials = 1000;
    c.seeds = {3, 8};
    c.suite.fovs = {config::fov_preset("half"), config::fov_preset("lim")};
    c.suite.deltas = {0.2};

    const fs::path root = fs::temp_directory_path() / "irbl_acceptance_determinism";
    fs::remove_all(root);
    const int workers[] = {1, 1, 3};
    for (int k = 0; k < 3; ++k) {
        suite::run_single(c, root / fmt("single_%d", k), workers[k]);
        suite::run_suite(c, root / fmt("suite_%d", k), workers[k]);
    }
    int compared = 0, differ = 0;
    auto same = [&](const fs::path& a, const fs::path& b) {
        ++compared;
        if (!fs::exists(a) || slurp(a) != slurp(b)) ++differ;
    };
    for (int k = 1; k < 3; ++k) {
        const fs::path s0 = root / "single_0", sk = root / fmt("single_%d", k);
        const fs::path u0 = root / "suite_0", uk = root / fmt("suite_%d", k);
        same(s0 / "summary.csv", sk / "summary.csv");
        same(u0 / "summary.csv", uk / "summary.csv");
        for (auto seed : c.seeds) {
            const std::string name = suite::single(c, seed).name();
            same(s0 / name / "report.json", sk / name / "report.json");
        }
        for (const auto& spec : suite::expand(c)) same(u0 / spec.name() / "report.json", uk / spec.name() / "report.json");
    }
    fs::remove_all(root);
    return {differ == 0 && compared > 0, fmt("%d file comparisons (workers 1, 1, 3), %d differ", compared, differ)};
}

struct Criterion {
    const char* name;
    double limit_s;  // runtime bound; 0 when none is stated
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    int only = 0;
    app.add_option("--only", only, "Run a single criterion (1-11)")->check(CLI::Range(1, 11));
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> criteria{
        {"CWVD point safety", 30, cwvd_point_safety},
        {"corridor clearance", 60, corridor_clearance},
        {"centroid oracle", 60, centroid_oracle},
        {"projection oracle", 30, projection_oracle},
        {"beta_min oracle", 120, beta_min_oracle},
        {"MPC contract", 120, mpc_contract},
        {"A* optimality", 60, astar_optimality},
        {"end-to-end safety and convergence", 600, end_to_end},
        {"FoV ablation ordering", 0, fov_ablation},
        {"traversability estimator", 60, traversability_check},
        {"determinism", 0, determinism},
    };

    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        if (only && static_cast<int>(k) + 1 != only) continue;
        const auto& c = criteria[k];
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = c.limit_s == 0 || secs < c.limit_s;
        const bool pass = o.pass && in_time;
        failed += !pass;
        std::printf("[%s] %2zu %s: %s (%.1f s%s)\n", pass ? "PASS" : "FAIL", k + 1, c.name, o.detail.c_str(), secs,
                    in_time ? "" : fmt(", over the %.0f s limit", c.limit_s).c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}

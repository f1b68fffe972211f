#include "irbl/plan.hpp"

#include "irbl/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace irbl::plan {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kSqrt3 = 1.73205080756887729353;

}  // namespace

double StepCounts::value() const {
    return static_cast<double>(axial) + static_cast<double>(planar) * kSqrt2 + static_cast<double>(spatial) * kSqrt3;
}

OccupancyGrid::OccupancyGrid(double cell_size, double inflation_radius, Vec3 origin)
    : cell_size_(cell_size), inflation_(inflation_radius), origin_(std::move(origin)) {
    if (!(cell_size > 0.0)) throw ConfigError("plan.cell_size", "must be > 0");
    if (!(inflation_radius >= 0.0)) throw ConfigError("plan.inflation", "must be >= 0");
    const int reach = static_cast<int>(std::ceil(inflation_ / cell_size_));
    for (int dx = -reach; dx <= reach; ++dx)
        for (int dy = -reach; dy <= reach; ++dy)
            for (int dz = -reach; dz <= reach; ++dz) {
                const double d = cell_size_ * std::sqrt(double(dx * dx + dy * dy + dz * dz));
                if (d <= inflation_) stencil_.push_back({CellIndex{dx, dy, dz}, d});
            }
}

CellIndex OccupancyGrid::index_of(const Vec3& q) const {
    const Vec3 r = (q - origin_) / cell_size_;
    return {static_cast<int>(std::floor(r.x() + 0.5)), static_cast<int>(std::floor(r.y() + 0.5)),
            static_cast<int>(std::floor(r.z() + 0.5))};
}

Vec3 OccupancyGrid::center_of(const CellIndex& c) const {
    return origin_ + cell_size_ * Vec3(c.x, c.y, c.z);
}

bool OccupancyGrid::insert(const Vec3& q) {
    const CellIndex c = index_of(q);
    if (!occupied_.insert(c).second) return false;
    for (const auto& [off, d] : stencil_) {
        const CellIndex n{c.x + off.x, c.y + off.y, c.z + off.z};
        auto [it, fresh] = near_.try_emplace(n, d);
        if (!fresh) it->second = std::min(it->second, d);
    }
    return true;
}

std::vector<CellIndex> OccupancyGrid::update(const corridor::PointCloud& cloud) {
    std::vector<CellIndex> fresh;
    for (const Vec3& q : cloud.points)
        if (insert(q)) fresh.push_back(index_of(q));
    return fresh;
}

double OccupancyGrid::clearance(const CellIndex& c) const {
    const auto it = near_.find(c);
    return it == near_.end() ? std::numeric_limits<double>::infinity() : it->second;
}

bool OccupancyGrid::blocked(const CellIndex& c, double radius) const {
    return clearance(c) < std::min(radius, inflation_);
}

bool OccupancyGrid::line_free(const Vec3& a, const Vec3& b, double radius) const {
    const double len = (b - a).norm();
    const int n = std::max(1, static_cast<int>(std::ceil(len / (0.25 * cell_size_))));
    for (int i = 0; i <= n; ++i) {
        const Vec3 q = a + (b - a) * (static_cast<double>(i) / n);
        if (blocked(index_of(q), radius)) return false;
    }
    return true;
}

double Path::length() const {
    double total = 0.0;
    for (std::size_t i = 1; i < waypoints.size(); ++i) total += (waypoints[i] - waypoints[i - 1]).norm();
    return total;
}

namespace {

struct OpenEntry {
    double f;
    double h;
    CellIndex cell;
    StepCounts g;
};

struct OpenOrder {
    bool operator()(const OpenEntry& a, const OpenEntry& b) const {
        if (a.f != b.f) return a.f > b.f;
        if (a.h != b.h) return a.h > b.h;
        return a.cell > b.cell;
    }
};

struct NodeRecord {
    StepCounts g;
    CellIndex parent;
    bool closed{false};
};

double heuristic(const CellIndex& a, const CellIndex& b) {
    const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

std::vector<CellIndex> astar(const OccupancyGrid& grid, const CellIndex& start, const CellIndex& goal, double radius,
                             const SearchBounds& bounds, StepCounts& cost) {
    std::unordered_map<CellIndex, NodeRecord, CellHash> nodes;
    std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenOrder> open;
    nodes[start] = NodeRecord{StepCounts{}, start, false};
    open.push({heuristic(start, goal), heuristic(start, goal), start, StepCounts{}});

    while (!open.empty()) {
        const OpenEntry top = open.top();
        open.pop();
        NodeRecord& rec = nodes[top.cell];
        if (rec.closed || !(rec.g == top.g)) continue;
        rec.closed = true;
        if (top.cell == goal) {
            cost = rec.g;
            std::vector<CellIndex> cells{goal};
            for (CellIndex c = goal; !(c == start);) {
                c = nodes[c].parent;
                cells.push_back(c);
            }
            std::reverse(cells.begin(), cells.end());
            return cells;
        }
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dz = -1; dz <= 1; ++dz) {
                    const int kind = std::abs(dx) + std::abs(dy) + std::abs(dz);
                    if (kind == 0) continue;
                    const CellIndex next{top.cell.x + dx, top.cell.y + dy, top.cell.z + dz};
                    if (!bounds.contains(next) || grid.blocked(next, radius)) continue;
                    StepCounts g = top.g;
                    (kind == 1 ? g.axial : kind == 2 ? g.planar : g.spatial) += 1;
                    const double g_val = g.value();
                    auto it = nodes.find(next);
                    if (it != nodes.end() && it->second.g.value() <= g_val) continue;
                    nodes[next] = NodeRecord{g, top.cell, false};
                    const double h = heuristic(next, goal);
                    open.push({g_val + h, h, next, g});
                }
    }
    throw NoPath("goal unreachable in the current map");
}

}  // namespace

PlanResult plan_path(const OccupancyGrid& grid, const Vec3& start, const Vec3& goal, double inflation,
                     const SearchBounds& bounds, const PlanOptions& options) {
    const CellIndex s = grid.index_of(start);
    const CellIndex g = grid.index_of(goal);
    if (!bounds.contains(s) || !bounds.contains(g)) throw NoPath("start or goal outside the search bounds");

    double radius = inflation;
    for (int k = 1; grid.blocked(s, radius); ++k) {
        if (!options.relax_start) throw StartOccupied("start cell is inside the inflated map");
        radius = inflation * std::max(0.0, 1.0 - 0.1 * k);
    }
    if (grid.blocked(g, radius)) throw NoPath("goal cell is inside the inflated map");

    PlanResult out;
    out.inflation_used = radius;
    out.cells = astar(grid, s, g, radius, bounds, out.steps);

    Path raw;
    raw.waypoints.push_back(start);
    for (std::size_t i = 1; i + 1 < out.cells.size(); ++i) raw.waypoints.push_back(grid.center_of(out.cells[i]));
    raw.waypoints.push_back(goal);
    out.path = shortcut(grid, raw, radius);
    return out;
}

Path shortcut(const OccupancyGrid& grid, const Path& raw, double radius) {
    const auto& w = raw.waypoints;
    if (w.size() <= 2) return raw;
    Path out;
    out.waypoints.push_back(w.front());
    std::size_t i = 0;
    while (i + 1 < w.size()) {
        std::size_t j = i + 1;
        while (j + 1 < w.size() && grid.line_free(w[i], w[j + 1], radius)) ++j;
        out.waypoints.push_back(w[j]);
        i = j;
    }
    return out;
}

double nearest_arc_length(const Path& path, const Vec3& p) {
    const auto& w = path.waypoints;
    double best_s = 0.0, best_d = std::numeric_limits<double>::infinity(), s = 0.0;
    if (w.size() == 1) return 0.0;
    for (std::size_t i = 1; i < w.size(); ++i) {
        const Vec3 seg = w[i] - w[i - 1];
        const double len = seg.norm();
        const double t = len > 0.0 ? std::clamp((p - w[i - 1]).dot(seg) / (len * len), 0.0, 1.0) : 0.0;
        const double d = (w[i - 1] + t * seg - p).norm();
        if (d < best_d) {
            best_d = d;
            best_s = s + t * len;
        }
        s += len;
    }
    return best_s;
}

Vec3 point_at(const Path& path, double s) {
    const auto& w = path.waypoints;
    for (std::size_t i = 1; i < w.size(); ++i) {
        const double len = (w[i] - w[i - 1]).norm();
        if (s <= len) return len > 0.0 ? Vec3(w[i - 1] + (w[i] - w[i - 1]) * (s / len)) : w[i - 1];
        s -= len;
    }
    return w.back();
}

Vec3 select_waypoint(const Path& path, const OccupancyGrid& grid, double radius, const Vec3& p, double lookahead) {
    const auto& w = path.waypoints;
    if (w.size() == 1 || (w.back() - p).norm() <= lookahead) return w.back();

    auto ok = [&](double s) {
        const Vec3 q = point_at(path, s);
        return (q - p).norm() <= lookahead && grid.line_free(p, q, radius);
    };
    const double total = path.length();
    const double step = 0.5 * grid.cell_size();
    double good = nearest_arc_length(path, p);
    if (!ok(good)) return point_at(path, good);

    std::optional<double> bad;
    for (double s = good + step;; s += step) {
        s = std::min(s, total);
        if (!ok(s)) {
            bad = s;
            break;
        }
        good = s;
        if (s >= total) break;
    }
    if (bad) {
        double hi = *bad;
        for (int i = 0; i < 30; ++i) {
            const double mid = 0.5 * (good + hi);
            (ok(mid) ? good : hi) = mid;
        }
    }
    return point_at(path, good);
}

bool path_blocked(const OccupancyGrid& grid, const Path& path, double radius) {
    const auto& w = path.waypoints;
    for (std::size_t i = 1; i < w.size(); ++i)
        if (!grid.line_free(w[i - 1], w[i], radius)) return true;
    return false;
}

}  // namespace irbl::plan

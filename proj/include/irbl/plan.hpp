#pragma once

#include "irbl/corridor.hpp"
#include "irbl/geom.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

// Global map, grid search and the moving waypoint.
namespace irbl::plan {

using geom::Vec3;

struct CellIndex {
    int x{0}, y{0}, z{0};

    friend bool operator==(const CellIndex&, const CellIndex&) = default;
    friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

struct CellHash {
    std::size_t operator()(const CellIndex& c) const noexcept {
        std::uint64_t h = static_cast<std::uint32_t>(c.x);
        h = h * 0x9E3779B97F4A7C15ull ^ static_cast<std::uint32_t>(c.y);
        h = h * 0x9E3779B97F4A7C15ull ^ static_cast<std::uint32_t>(c.z);
        return static_cast<std::size_t>(h ^ (h >> 29));
    }
};

/// Inclusive cell-index box the search may visit.
struct SearchBounds {
    CellIndex lo;
    CellIndex hi;

    bool contains(const CellIndex& c) const {
        return c.x >= lo.x && c.x <= hi.x && c.y >= lo.y && c.y <= hi.y && c.z >= lo.z && c.z <= hi.z;
    }
};

/// Sparse occupied-cell set with monotone insertion. Cells near an occupied
/// cell carry the distance to the nearest occupied center, up to
/// `inflation_radius`, so blocking tests at any radius ≤ inflation are O(1).
class OccupancyGrid {
public:
    explicit OccupancyGrid(double cell_size = 0.25, double inflation_radius = 0.5, Vec3 origin = Vec3::Zero());

    double cell_size() const { return cell_size_; }
    double inflation_radius() const { return inflation_; }
    const Vec3& origin() const { return origin_; }

    CellIndex index_of(const Vec3& q) const;
    Vec3 center_of(const CellIndex& c) const;

    /// Marks the cell of every point; returns the cells that became occupied.
    std::vector<CellIndex> update(const corridor::PointCloud& cloud);
    bool insert(const Vec3& q);

    bool occupied(const CellIndex& c) const { return occupied_.contains(c); }
    std::size_t occupied_count() const { return occupied_.size(); }
    const std::unordered_set<CellIndex, CellHash>& occupied_cells() const { return occupied_; }

    /// True when an occupied cell center lies closer than `radius` to the
    /// center of `c`. `radius` above the inflation radius is clamped to it.
    bool blocked(const CellIndex& c, double radius) const;

    /// Distance from the center of `c` to the nearest occupied center, or
    /// +inf when none is within the inflation radius.
    double clearance(const CellIndex& c) const;

    /// Segment test by sampling at a quarter cell.
    bool line_free(const Vec3& a, const Vec3& b, double radius) const;

private:
    double cell_size_;
    double inflation_;
    Vec3 origin_;
    std::unordered_set<CellIndex, CellHash> occupied_;
    std::unordered_map<CellIndex, double, CellHash> near_;
    std::vector<std::pair<CellIndex, double>> stencil_;
};

struct Path {
    std::vector<Vec3> waypoints;

    double length() const;
    bool empty() const { return waypoints.empty(); }
};

/// Number of unit, face-diagonal and space-diagonal moves; the cost is
/// compared exactly through this decomposition.
struct StepCounts {
    std::int64_t axial{0}, planar{0}, spatial{0};

    double value() const;
    friend bool operator==(const StepCounts&, const StepCounts&) = default;
};

struct PlanResult {
    Path path;                     // start, shortcut vertices, goal
    std::vector<CellIndex> cells;  // grid path before shortcutting
    StepCounts steps;
    double inflation_used{0.0};

    /// Grid path cost in meters.
    double grid_cost(double cell_size) const { return steps.value() * cell_size; }
};

struct PlanOptions {
    bool relax_start{true};  // otherwise StartOccupied is raised
};

/// A* over the 26-connected lattice with Euclidean edge costs and heuristic;
/// ties broken on (f, h, cell index). Cells blocked at `inflation` are not
/// entered. When the start cell is blocked the inflation shrinks in steps of
/// 10% until it frees. Throws NoPath, StartOccupied.
PlanResult plan_path(const OccupancyGrid& grid, const Vec3& start, const Vec3& goal, double inflation,
                     const SearchBounds& bounds, const PlanOptions& options = {});

/// Greedy line-of-sight shortcutting of a polyline.
Path shortcut(const OccupancyGrid& grid, const Path& raw, double radius);

/// Arc length of the point of `path` nearest to `p`.
double nearest_arc_length(const Path& path, const Vec3& p);

Vec3 point_at(const Path& path, double s);

/// Farthest point along the path, from the point nearest to `p`, that stays
/// within `lookahead` of `p` and in line of sight. Returns the final point when
/// it is within `lookahead`.
Vec3 select_waypoint(const Path& path, const OccupancyGrid& grid, double radius, const Vec3& p, double lookahead);

/// True when the polyline crosses a cell blocked at `radius`.
bool path_blocked(const OccupancyGrid& grid, const Path& path, double radius);

}  // namespace irbl::plan

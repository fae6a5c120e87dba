#pragma once

// Independent reference computations used by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "mechsearch/actions.hpp"
#include "mechsearch/planners.hpp"
#include "mechsearch/scene.hpp"

namespace oracles {

using namespace mechsearch;

/// Nearest set cell by exhaustive scan; -1 when nothing is set.
inline std::vector<long long> brute_force_sq_distance(const std::vector<std::uint8_t>& set, int rows, int cols) {
    std::vector<std::pair<int, int>> points;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (set[static_cast<std::size_t>(r) * cols + c]) points.emplace_back(r, c);
        }
    }
    std::vector<long long> out(set.size(), -1);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            long long best = -1;
            for (const auto& [pr, pc] : points) {
                const long long d = static_cast<long long>(pr - r) * (pr - r) + static_cast<long long>(pc - c) * (pc - c);
                if (best < 0 || d < best) best = d;
            }
            out[static_cast<std::size_t>(r) * cols + c] = best;
        }
    }
    return out;
}

struct PushCandidate {
    Vec2 start;
    Vec2 end;
    double deviation = 0.0;
};

/// Pixel center farthest from any occupied pixel (first in row-major order on
/// ties); false when even that one is closer than `min_clearance`.
inline bool brute_force_most_free_point(const MaskImage& occ, double min_clearance, Vec2& out) {
    const auto d2 = brute_force_sq_distance(occ.bits, occ.rows, occ.cols);
    std::size_t best = 0;
    for (std::size_t i = 1; i < d2.size(); ++i) {
        if (d2[i] > d2[best]) best = i;
    }
    if (d2.empty() || d2[best] < 0 || std::sqrt(static_cast<double>(d2[best])) / occ.resolution < min_clearance) return false;
    out = {occ.origin.x + (static_cast<double>(best % occ.cols) + 0.5) / occ.resolution,
           occ.origin.y + (static_cast<double>(best / occ.cols) + 0.5) / occ.resolution};
    return true;
}

/// Re-scores every sampled start of a push on `goal_id` toward `free_pt`: the
/// closed gripper must sit inside the walls clear of every object, and the
/// stroke (cut short at the walls) must pass the centroid within the
/// tolerance. Returns the feasible candidates.
inline std::vector<PushCandidate> feasible_pushes(const SceneState& scene, int goal_id, Vec2 free_pt, const PlannerParams& params) {
    std::vector<PushCandidate> out;
    const ObjectState& goal = scene.at(goal_id);
    const GripperGeometry& g = params.gripper;
    const double hw = 0.5 * g.push_width;

    const Vec2 com = goal.pose.position();
    const Vec2 to_free = free_pt - com;
    const Vec2 preferred = norm(to_free) > 1e-12 ? to_free * (1.0 / norm(to_free)) : Vec2{1.0, 0.0};
    const double standoff = goal.shape.bounding_radius() + hw + params.push_standoff_margin;
    const Aabb in = scene.bin.interior();
    for (int k = 0; k < params.push_angles; ++k) {
        const double a = 2.0 * std::numbers::pi * k / params.push_angles;
        const Vec2 u{std::cos(a), std::sin(a)};
        const Vec2 v{-u.y, u.x};
        const Vec2 start = com - u * standoff;
        // Closed-gripper rectangle: tip at start, extending push_length behind.
        const Polygon fp = {start + v * -hw, start + v * hw, start - u * g.push_length + v * hw, start - u * g.push_length + v * -hw};
        bool ok = std::all_of(fp.begin(), fp.end(), [&](Vec2 p) { return p.x >= in.lo.x && p.x <= in.hi.x && p.y >= in.lo.y && p.y <= in.hi.y; });
        for (const ObjectState& o : scene.objects) {
            if (!ok || !o.active()) continue;
            for (const Polygon& part : o.world_parts()) {
                if (convex_intersection_area(make_ccw(fp), part) > 1e-12) ok = false;
            }
        }
        if (!ok) continue;
        // Wall room along the stroke for both gripper edges.
        double room = std::numeric_limits<double>::infinity();
        for (const Vec2 edge : {start + v * hw, start - v * hw}) {
            double t = std::numeric_limits<double>::infinity();
            if (u.x > 1e-12) t = std::min(t, (in.hi.x - edge.x) / u.x);
            if (u.x < -1e-12) t = std::min(t, (in.lo.x - edge.x) / u.x);
            if (u.y > 1e-12) t = std::min(t, (in.hi.y - edge.y) / u.y);
            if (u.y < -1e-12) t = std::min(t, (in.lo.y - edge.y) / u.y);
            room = std::min(room, t);
        }
        const double travel = std::min(dot(free_pt - start, u), room);
        if (!(travel > 0.0)) continue;
        const Vec2 end = start + u * travel;
        // Distance from the centroid to the stroke segment.
        const double t = std::clamp(dot(com - start, u), 0.0, travel);
        if (norm(com - (start + u * t)) > params.com_tolerance) continue;
        out.push_back({start, end, std::acos(std::clamp(dot(u, preferred), -1.0, 1.0))});
    }
    return out;
}

}  // namespace oracles

#include "mechsearch/planners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mechsearch/errors.hpp"

namespace mechsearch {

namespace {

// Lower envelope of parabolas for one line: out[q] = min_v (q - v)^2 + f[v].
void envelope_1d(const std::int64_t* f, std::int64_t* out, int n, std::size_t stride, std::vector<int>& v, std::vector<double>& z) {
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    auto fv = [&](int q) { return static_cast<double>(f[static_cast<std::size_t>(q) * stride]); };
    for (int q = 1; q < n; ++q) {
        double s = 0.0;
        while (true) {
            const int p = v[k];
            s = ((fv(q) + static_cast<double>(q) * q) - (fv(p) + static_cast<double>(p) * p)) / (2.0 * (q - p));
            if (s <= z[k] && k > 0) {
                --k;
                continue;
            }
            break;
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const std::int64_t d = q - v[k];
        out[static_cast<std::size_t>(q) * stride] = d * d + f[static_cast<std::size_t>(v[k]) * stride];
    }
}

}  // namespace

std::vector<std::int64_t> squared_distance_transform(const std::vector<std::uint8_t>& set, int rows, int cols) {
    const std::int64_t far = static_cast<std::int64_t>(rows) * rows + static_cast<std::int64_t>(cols) * cols + 1;
    const std::size_t n = static_cast<std::size_t>(rows) * cols;
    std::vector<std::int64_t> f(n), g(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = set[i] ? 0 : far;

    const int longest = std::max(rows, cols);
    std::vector<int> v(static_cast<std::size_t>(longest) + 1);
    std::vector<double> z(static_cast<std::size_t>(longest) + 2);
    for (int c = 0; c < cols; ++c) envelope_1d(f.data() + c, g.data() + c, rows, static_cast<std::size_t>(cols), v, z);
    for (int r = 0; r < rows; ++r) {
        const std::size_t off = static_cast<std::size_t>(r) * cols;
        envelope_1d(g.data() + off, f.data() + off, cols, 1, v, z);
    }
    return f;
}

DistanceField distance_transform(const MaskImage& occupancy) {
    DistanceField field{occupancy.rows, occupancy.cols, occupancy.resolution, occupancy.origin, {}};
    const auto d2 = squared_distance_transform(occupancy.bits, occupancy.rows, occupancy.cols);
    field.values.resize(d2.size());
    const std::int64_t far = static_cast<std::int64_t>(occupancy.rows) * occupancy.rows +
                             static_cast<std::int64_t>(occupancy.cols) * occupancy.cols;
    for (std::size_t i = 0; i < d2.size(); ++i) {
        field.values[i] = d2[i] > far ? std::numeric_limits<double>::infinity()
                                      : std::sqrt(static_cast<double>(d2[i])) / occupancy.resolution;
    }
    return field;
}

Vec2 most_free_point(const DistanceField& field, double min_clearance) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < field.values.size(); ++i) {
        if (field.values[i] > field.values[best]) best = i;
    }
    if (field.values.empty() || !(field.values[best] >= min_clearance)) {
        throw Error(ErrorCode::NoFreeSpace, "largest clearance in the bin is below the gripper half-width");
    }
    const int row = static_cast<int>(best / static_cast<std::size_t>(field.cols));
    const int col = static_cast<int>(best % static_cast<std::size_t>(field.cols));
    return {field.origin.x + (col + 0.5) / field.resolution, field.origin.y + (row + 0.5) / field.resolution};
}

namespace {

struct Deepest {
    PixelIndex px;
    double depth_px = 0.0;  // distance to the nearest pixel outside the mask
};

Deepest deepest_pixel(const MaskImage& mask) {
    int r0 = mask.rows, r1 = -1, c0 = mask.cols, c1 = -1;
    for (int r = 0; r < mask.rows; ++r) {
        for (int c = 0; c < mask.cols; ++c) {
            if (!mask.at(r, c)) continue;
            r0 = std::min(r0, r);
            r1 = std::max(r1, r);
            c0 = std::min(c0, c);
            c1 = std::max(c1, c);
        }
    }
    if (r1 < 0) throw Error(ErrorCode::EmptyMask, "mask has no pixels");
    // One-pixel frame of background so the window always contains a boundary.
    const int rows = r1 - r0 + 3;
    const int cols = c1 - c0 + 3;
    std::vector<std::uint8_t> background(static_cast<std::size_t>(rows) * cols, 1);
    for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
            if (mask.at(r, c)) background[static_cast<std::size_t>(r - r0 + 1) * cols + (c - c0 + 1)] = 0;
        }
    }
    const auto d2 = squared_distance_transform(background, rows, cols);
    std::size_t best = 0;
    for (std::size_t i = 1; i < d2.size(); ++i) {
        if (d2[i] > d2[best]) best = i;
    }
    const int br = static_cast<int>(best / static_cast<std::size_t>(cols));
    const int bc = static_cast<int>(best % static_cast<std::size_t>(cols));
    return {{br - 1 + r0, bc - 1 + c0}, std::sqrt(static_cast<double>(d2[best]))};
}

// Distance (meters) along `dir` from `start` to where the ray leaves the run of
// mask pixels containing `start` (grid traversal over pixel cells).
double exit_distance(const MaskImage& mask, Vec2 start, Vec2 dir) {
    const double x = (start.x - mask.origin.x) * mask.resolution;
    const double y = (start.y - mask.origin.y) * mask.resolution;
    int cx = static_cast<int>(std::floor(x));
    int cy = static_cast<int>(std::floor(y));
    constexpr double inf = std::numeric_limits<double>::infinity();
    const int sx = dir.x > 0 ? 1 : -1;
    const int sy = dir.y > 0 ? 1 : -1;
    double tx = std::abs(dir.x) > 1e-12 ? (dir.x > 0 ? (cx + 1 - x) : (x - cx)) / std::abs(dir.x) : inf;
    double ty = std::abs(dir.y) > 1e-12 ? (dir.y > 0 ? (cy + 1 - y) : (y - cy)) / std::abs(dir.y) : inf;
    const double dx = std::abs(dir.x) > 1e-12 ? 1.0 / std::abs(dir.x) : inf;
    const double dy = std::abs(dir.y) > 1e-12 ? 1.0 / std::abs(dir.y) : inf;
    while (true) {
        double t;
        if (tx < ty) {
            t = tx;
            cx += sx;
            tx += dx;
        } else {
            t = ty;
            cy += sy;
            ty += dy;
        }
        if (!mask.in_grid(cy, cx) || !mask.at(cy, cx)) return t / mask.resolution;
    }
}

ActionPlan degenerate_push(const ObjectState& goal, double z) {
    const Vec3 c{goal.pose.x, goal.pose.y, z};
    return ActionPlan{Push{c, c}, 0.0, goal.id};
}

}  // namespace

Planner::Planner(const SceneState& scene, const SegMasks& masks, PlannerParams params)
    : scene_(scene), masks_(masks), params_(params), elevation_(elevations(scene)) {}

double Planner::goal_elevation(int goal_id) const {
    for (std::size_t i = 0; i < scene_.objects.size(); ++i) {
        if (scene_.objects[i].id == goal_id) return elevation_[i];
    }
    throw Error(ErrorCode::UnknownObject, "object " + std::to_string(goal_id));
}

double Planner::goal_top(int goal_id) const { return goal_elevation(goal_id) + scene_.at(goal_id).shape.height(); }

const DistanceField& Planner::free_space() const {
    if (!free_space_) free_space_ = std::make_shared<const DistanceField>(distance_transform(masks_.occupancy));
    return *free_space_;
}

ActionPlan Planner::parallel_jaw(int goal_id) const {
    const MaskEntry& entry = masks_.at(goal_id);
    if (entry.modal_count == 0) throw Error(ErrorCode::EmptyMask, "object " + std::to_string(goal_id) + " is not visible");
    const ObjectState& goal = scene_.at(goal_id);
    const double vis = visibility_ratio(masks_, goal_id);
    const MaskImage& modal = entry.modal;
    const GripperGeometry& g = params_.gripper;

    const double base = goal_elevation(goal_id);
    std::vector<double> tops(scene_.objects.size());
    for (std::size_t i = 0; i < scene_.objects.size(); ++i) tops[i] = elevation_[i] + scene_.objects[i].shape.height();
    auto top_of = [&](int id) {
        for (std::size_t i = 0; i < scene_.objects.size(); ++i) {
            if (scene_.objects[i].id == id) return tops[i];
        }
        return 0.0;
    };
    auto blocked = [&](Vec2 p) {
        const double fx = (p.x - modal.origin.x) * modal.resolution;
        const double fy = (p.y - modal.origin.y) * modal.resolution;
        if (fx < 0 || fy < 0) return true;
        const int c = static_cast<int>(fx);
        const int r = static_cast<int>(fy);
        if (!modal.in_grid(r, c) || masks_.walls.at(r, c)) return true;
        const int owner = masks_.owner_at(r, c);
        if (owner < 0 || owner == goal_id) return false;
        return top_of(owner) > base + 1e-9;
    };

    const Deepest deep = deepest_pixel(modal);
    const Vec2 center = pixel_to_world(modal, deep.px);
    const double spacing = 0.5 * modal.pixel_size();
    const int n_depth = std::max(1, static_cast<int>(std::round(g.finger_depth / spacing)));
    const int n_width = std::max(1, static_cast<int>(std::round(g.finger_width / spacing)));

    auto finger_clearance = [&](Vec2 contact, Vec2 outward) {
        const Vec2 side = perp(outward);
        int free = 0;
        for (int i = 0; i < n_depth; ++i) {
            for (int j = 0; j < n_width; ++j) {
                const double a = (i + 0.5) * g.finger_depth / n_depth;
                const double b = (j + 0.5) * g.finger_width / n_width - 0.5 * g.finger_width;
                if (!blocked(contact + outward * a + side * b)) ++free;
            }
        }
        return static_cast<double>(free) / (n_depth * n_width);
    };

    struct Best {
        double quality = -1.0;
        double width = std::numeric_limits<double>::infinity();
        Vec2 point;
        double phi = 0.0;
    } best;
    const int k_max = std::max(1, params_.grasp_candidates);
    for (int k = 0; k < k_max; ++k) {
        const double phi = std::numbers::pi * k / k_max;
        const Vec2 dir = unit_from_angle(phi);
        const double t_plus = exit_distance(modal, center, dir);
        const double t_minus = exit_distance(modal, center, dir * -1.0);
        const Vec2 a = center + dir * t_plus;
        const Vec2 b = center - dir * t_minus;
        const double width = t_plus + t_minus;
        const double feasible = width <= g.jaw_max_opening ? 1.0 : 0.0;
        const double clearance = 0.5 * (finger_clearance(a, dir) + finger_clearance(b, dir * -1.0));
        const double q = vis * clearance * feasible;

        Vec2 mid = (a + b) * 0.5;
        const PixelIndex mp = world_to_pixel(modal, mid);
        if (!modal.at(mp.row, mp.col)) mid = center;

        if (q > best.quality + 1e-12 || (std::abs(q - best.quality) <= 1e-12 && width < best.width - 1e-12)) {
            best = {q, width, mid, phi};
        }
    }
    const double z = base + 0.5 * goal.shape.height();
    return ActionPlan{ParallelJawGrasp{{best.point.x, best.point.y, z}, best.phi}, std::clamp(best.quality, 0.0, 1.0), goal_id};
}

ActionPlan Planner::suction(int goal_id) const {
    const MaskEntry& entry = masks_.at(goal_id);
    if (entry.modal_count == 0) throw Error(ErrorCode::EmptyMask, "object " + std::to_string(goal_id) + " is not visible");
    const double vis = visibility_ratio(masks_, goal_id);
    const Deepest deep = deepest_pixel(entry.modal);
    const double inscribed = (deep.depth_px - 0.5) / entry.modal.resolution;
    const double q = vis * std::min(1.0, inscribed / params_.gripper.suction_cup_radius);
    const Vec2 p = pixel_to_world(entry.modal, deep.px);
    return ActionPlan{SuctionGrasp{{p.x, p.y, goal_top(goal_id)}, 0.0, 0.0}, std::clamp(q, 0.0, 1.0), goal_id};
}

ActionPlan Planner::push(int goal_id) const {
    const ObjectState& goal = scene_.at(goal_id);
    const double z = goal_elevation(goal_id) + 0.5 * goal.shape.height();
    if (!goal.active()) return degenerate_push(goal, z);
    const GripperGeometry& g = params_.gripper;

    Vec2 target;
    try {
        target = most_free_point(free_space(), g.push_half_width());
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NoFreeSpace) throw;
        return degenerate_push(goal, z);
    }

    const Vec2 com = goal.pose.position();
    const Vec2 to_free = target - com;
    const double to_free_len = norm(to_free);
    const Vec2 preferred = to_free_len > 1e-12 ? to_free * (1.0 / to_free_len) : Vec2{1.0, 0.0};
    const double standoff = goal.shape.bounding_radius() + g.push_half_width() + params_.push_standoff_margin;
    const Aabb interior = scene_.bin.interior();

    std::vector<std::vector<Polygon>> obstacles;
    for (const ObjectState& o : scene_.objects) {
        if (o.active()) obstacles.push_back(o.world_parts());
    }

    double best_dev = std::numeric_limits<double>::infinity();
    Vec2 best_start, best_end;
    const int n = std::max(1, params_.push_angles);
    for (int k = 0; k < n; ++k) {
        const Vec2 u = unit_from_angle(2.0 * std::numbers::pi * k / n);
        const Vec2 start = com - u * standoff;

        const Polygon fp = push_footprint(start, u, g);
        bool clear = std::all_of(fp.begin(), fp.end(), [&](Vec2 p) {
            return p.x >= interior.lo.x && p.x <= interior.hi.x && p.y >= interior.lo.y && p.y <= interior.hi.y;
        });
        for (std::size_t i = 0; clear && i < obstacles.size(); ++i) {
            for (const Polygon& part : obstacles[i]) {
                if (convex_intersects(fp, part)) {
                    clear = false;
                    break;
                }
            }
        }
        if (!clear) continue;

        const Vec2 v = perp(u);
        const double reach = dot(target - start, u);
        const double room = std::min(ray_exit_distance(start + v * g.push_half_width(), u, interior),
                                     ray_exit_distance(start - v * g.push_half_width(), u, interior));
        const double travel = std::min(reach, room);
        if (!(travel > 0.0)) continue;
        const Vec2 end = start + u * travel;
        if (point_segment_distance(com, start, end) > params_.com_tolerance) continue;

        const double dev = std::acos(std::clamp(dot(u, preferred), -1.0, 1.0));
        if (dev < best_dev - 1e-12) {
            best_dev = dev;
            best_start = start;
            best_end = end;
        }
    }
    if (!std::isfinite(best_dev)) return degenerate_push(goal, z);
    return ActionPlan{Push{{best_start.x, best_start.y, z}, {best_end.x, best_end.y, z}}, 1.0, goal_id};
}

ActionPlan plan_parallel_jaw(const SceneState& scene, const SegMasks& masks, int goal_id, const PlannerParams& params) {
    return Planner(scene, masks, params).parallel_jaw(goal_id);
}

ActionPlan plan_suction(const SceneState& scene, const SegMasks& masks, int goal_id, const PlannerParams& params) {
    return Planner(scene, masks, params).suction(goal_id);
}

ActionPlan plan_push(const SceneState& scene, const SegMasks& masks, int goal_id, const PlannerParams& params) {
    return Planner(scene, masks, params).push(goal_id);
}

}  // namespace mechsearch

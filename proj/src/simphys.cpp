#include "mechsearch/simphys.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mechsearch/errors.hpp"

namespace mechsearch {

std::string_view to_string(Outcome o) {
    switch (o) {
        case Outcome::GraspSucceeded: return "GraspSucceeded";
        case Outcome::GraspFailed: return "GraspFailed";
        case Outcome::LiftBlocked: return "LiftBlocked";
        case Outcome::PushExecuted: return "PushExecuted";
        case Outcome::PushRejected: return "PushRejected";
        case Outcome::ObjectEjected: return "ObjectEjected";
    }
    return "PushExecuted";
}

Outcome outcome_from_string(std::string_view s) {
    for (Outcome o : {Outcome::GraspSucceeded, Outcome::GraspFailed, Outcome::LiftBlocked, Outcome::PushExecuted,
                      Outcome::PushRejected, Outcome::ObjectEjected}) {
        if (to_string(o) == s) return o;
    }
    throw Error(ErrorCode::BadRecord, "unknown outcome '" + std::string(s) + "'");
}

bool is_liftable(const SceneState& scene, int id, const PhysicsParams& params) {
    const ObjectState& o = scene.at(id);
    double covered = 0.0;
    for (const ObjectState& s : scene.objects) {
        if (!s.active() || s.id == id || s.layer <= o.layer) continue;
        covered += overlap_area(o, s);
    }
    return covered <= params.lift_block_fraction * o.shape.area();
}

namespace {

std::vector<int> changed_ids(const SceneState& before, const SceneState& after) {
    std::vector<int> ids;
    for (std::size_t i = 0; i < before.objects.size(); ++i) {
        const ObjectState& a = before.objects[i];
        const ObjectState& b = after.objects[i];
        if (a.pose != b.pose || a.layer != b.layer || a.ejected != b.ejected || a.extracted != b.extracted) ids.push_back(a.id);
    }
    return ids;
}

TransitionResult unchanged(const SceneState& scene, Outcome outcome) {
    TransitionResult r{scene, outcome, {}, {}};
    r.next_scene.timestep = scene.timestep + 1;
    return r;
}

}  // namespace

TransitionResult simulate_grasp(const SceneState& scene, const ActionPlan& plan, Rng& rng, const PhysicsParams& params) {
    if (!plan.is_grasp()) throw Error(ErrorCode::InvalidPlan, "simulate_grasp needs a grasp plan");
    if (!(plan.quality >= 0.0 && plan.quality <= 1.0)) throw Error(ErrorCode::InvalidPlan, "quality outside [0, 1]");
    const ObjectState* goal = scene.find(plan.goal_id);
    if (!goal || !goal->active()) throw Error(ErrorCode::InvalidPlan, "goal object " + std::to_string(plan.goal_id) + " is not in the bin");

    if (!is_liftable(scene, plan.goal_id, params)) return unchanged(scene, Outcome::LiftBlocked);
    if (!rng.bernoulli(plan.quality)) return unchanged(scene, Outcome::GraspFailed);

    SceneState next = scene;
    next.find(plan.goal_id)->extracted = true;
    next = resettle(std::move(next));
    next.timestep = scene.timestep + 1;
    TransitionResult r{std::move(next), Outcome::GraspSucceeded, {}, {}};
    r.moved_ids = changed_ids(scene, r.next_scene);
    return r;
}

namespace {

struct Extent {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    bool empty() const { return lo > hi; }
};

// Extent along `u` of the part of `parts` lying inside the lateral band
// [v_lo, v_hi] (measured along `v` from `origin`).
Extent band_extent(const std::vector<Polygon>& parts, Vec2 origin, Vec2 u, Vec2 v, double v_lo, double v_hi) {
    constexpr double far = 10.0;
    const Polygon band = {origin + u * -far + v * v_lo, origin + u * far + v * v_lo, origin + u * far + v * v_hi,
                          origin + u * -far + v * v_hi};
    Extent e;
    for (const Polygon& part : parts) {
        const Polygon clipped = clip_convex(part, band);
        if (clipped.size() < 3 || area(clipped) < 1e-14) continue;
        for (const Vec2& p : clipped) {
            const double s = dot(p - origin, u);
            e.lo = std::min(e.lo, s);
            e.hi = std::max(e.hi, s);
        }
    }
    return e;
}

Extent lateral_extent(const std::vector<Polygon>& parts, Vec2 origin, Vec2 v) {
    Extent e;
    for (const Polygon& part : parts) {
        for (const Vec2& p : part) {
            const double s = dot(p - origin, v);
            e.lo = std::min(e.lo, s);
            e.hi = std::max(e.hi, s);
        }
    }
    return e;
}

bool parts_intersect(const std::vector<Polygon>& a, const std::vector<Polygon>& b) {
    for (const Polygon& x : a) {
        for (const Polygon& y : b) {
            if (convex_intersects(x, y)) return true;
        }
    }
    return false;
}

std::vector<Polygon> shifted(const std::vector<Polygon>& parts, Vec2 d) {
    std::vector<Polygon> out;
    out.reserve(parts.size());
    for (const Polygon& p : parts) out.push_back(translated(p, d));
    return out;
}

bool inside_box(std::span<const Vec2> poly, const Aabb& box, double tol = 1e-9) {
    return std::all_of(poly.begin(), poly.end(), [&](Vec2 p) {
        return p.x >= box.lo.x - tol && p.x <= box.hi.x + tol && p.y >= box.lo.y - tol && p.y <= box.hi.y + tol;
    });
}

struct Mover {
    std::size_t index = 0;
    std::vector<Polygon> parts;
    double travel = 0.0;      // accumulated translation along the push
    double wall_limit = 0.0;  // largest translation that keeps it inside the walls
    bool pinned = false;      // clamped against a wall
    bool ejected = false;
};

}  // namespace

TransitionResult simulate_push(const SceneState& scene, const ActionPlan& plan, const PhysicsParams& params) {
    const auto* push = std::get_if<Push>(&plan.action);
    if (!push) throw Error(ErrorCode::InvalidPlan, "simulate_push needs a push plan");
    if (!(plan.quality >= 0.0 && plan.quality <= 1.0)) throw Error(ErrorCode::InvalidPlan, "quality outside [0, 1]");
    if (plan.quality <= 0.0) return unchanged(scene, Outcome::PushRejected);

    const Vec2 start = push->p.xy();
    const Vec2 end = push->p_prime.xy();
    const double length = norm(end - start);
    if (length < 1e-12) return unchanged(scene, Outcome::PushExecuted);
    const Vec2 u = (end - start) * (1.0 / length);
    const Vec2 v = perp(u);
    const double hw = params.gripper.push_half_width();
    const Aabb interior = scene.bin.interior();

    const Polygon footprint = push_footprint(start, u, params.gripper);
    if (!inside_box(footprint, interior)) throw Error(ErrorCode::StartCollision, "gripper footprint at the push start crosses a wall");
    for (const ObjectState& o : scene.objects) {
        if (!o.active()) continue;
        for (const Polygon& part : o.world_parts()) {
            if (convex_intersects(footprint, part)) {
                throw Error(ErrorCode::StartCollision, "gripper footprint at the push start overlaps object " + std::to_string(o.id));
            }
        }
    }

    std::vector<Mover> movers;
    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
        const ObjectState& o = scene.objects[i];
        if (!o.active() || o.layer != 0) continue;
        Mover m{i, o.world_parts()};
        m.wall_limit = std::numeric_limits<double>::infinity();
        for (const Polygon& part : m.parts) {
            for (const Vec2& p : part) {
                const bool inside = p.x >= interior.lo.x - 1e-9 && p.x <= interior.hi.x + 1e-9 && p.y >= interior.lo.y - 1e-9 &&
                                    p.y <= interior.hi.y + 1e-9;
                m.wall_limit = std::min(m.wall_limit, inside ? ray_exit_distance(p, u, interior) : 0.0);
            }
        }
        movers.push_back(std::move(m));
    }

    auto advance = [&](Mover& m, double travel) {
        if (m.ejected || m.pinned || travel <= m.travel + 1e-12) return false;
        if (travel > m.wall_limit + params.ejection_margin) {
            m.travel = travel;
            m.ejected = true;
        } else if (travel >= m.wall_limit) {
            m.travel = m.wall_limit;
            m.pinned = true;
        } else {
            m.travel = travel;
        }
        return true;
    };

    // Direct contact with the gripper tip sweeping the corridor [0, length] x [-hw, hw].
    const Polygon corridor = oriented_rectangle(start, u, 0.0, length, hw);
    for (Mover& m : movers) {
        bool hit = false;
        for (const Polygon& part : m.parts) hit = hit || convex_intersects(corridor, part);
        if (!hit) continue;
        const Extent e = band_extent(m.parts, start, u, v, -hw, hw);
        if (e.empty()) continue;
        advance(m, length - e.lo);
    }

    // Propagate contacts forward: an object overlapped by a moved object ahead
    // of it is displaced until their common lateral band separates.
    const std::size_t max_rounds = 4 * movers.size() + 4;
    for (std::size_t round = 0; round < max_rounds; ++round) {
        bool changed = false;
        for (Mover& a : movers) {
            if (a.ejected || a.travel <= 0.0) continue;
            const auto pa = shifted(a.parts, u * a.travel);
            const Extent la = lateral_extent(pa, start, v);
            for (Mover& b : movers) {
                if (&a == &b || b.ejected || b.pinned) continue;
                const auto pb = shifted(b.parts, u * b.travel);
                if (!parts_intersect(pa, pb)) continue;
                const Extent lb = lateral_extent(pb, start, v);
                const double lo = std::max(la.lo, lb.lo);
                const double hi = std::min(la.hi, lb.hi);
                if (hi <= lo) continue;
                const Extent ea = band_extent(pa, start, u, v, lo, hi);
                const Extent eb = band_extent(pb, start, u, v, lo, hi);
                if (ea.empty() || eb.empty()) continue;
                // Only objects ahead of the pusher are displaced.
                if (eb.lo < ea.lo - 1e-9) continue;
                const double need = ea.hi - eb.lo;
                if (need > 1e-9 && advance(b, b.travel + need)) changed = true;
            }
        }
        if (!changed) break;
    }

    SceneState next = scene;
    std::vector<int> ejected;
    for (const Mover& m : movers) {
        if (m.travel <= 0.0) continue;
        ObjectState& o = next.objects[m.index];
        o.pose.x += u.x * m.travel;
        o.pose.y += u.y * m.travel;
        if (m.ejected) {
            o.ejected = true;
            ejected.push_back(o.id);
        }
    }
    next = resettle(std::move(next));
    next.timestep = scene.timestep + 1;
    std::sort(ejected.begin(), ejected.end());
    TransitionResult r{std::move(next), ejected.empty() ? Outcome::PushExecuted : Outcome::ObjectEjected, {}, ejected};
    r.moved_ids = changed_ids(scene, r.next_scene);
    return r;
}

SceneState resettle(SceneState scene) {
    std::vector<std::size_t> order(scene.objects.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    bool changed = true;
    while (changed) {
        changed = false;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return scene.objects[a].layer < scene.objects[b].layer; });
        for (std::size_t oi : order) {
            ObjectState& o = scene.objects[oi];
            if (!o.active() || o.layer == 0) continue;
            bool supported = false;
            int below = -1;
            for (const ObjectState& s : scene.objects) {
                if (!s.active() || s.id == o.id || s.layer >= o.layer) continue;
                if (!stacking_overlap(o, s)) continue;
                if (s.layer == o.layer - 1) {
                    supported = true;
                    break;
                }
                below = std::max(below, s.layer);
            }
            if (supported) continue;
            o.layer = below + 1;
            changed = true;
        }
    }
    return scene;
}

}  // namespace mechsearch

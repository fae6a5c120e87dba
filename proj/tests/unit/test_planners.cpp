#include <doctest.h>

#include <numbers>

#include "fixtures.hpp"
#include "mechsearch/errors.hpp"
#include "mechsearch/heapgen.hpp"
#include "mechsearch/planners.hpp"
#include "oracles.hpp"

using namespace mechsearch;
using fixtures::rect;
using fixtures::scene_of;

namespace {

MaskImage grid(int rows, int cols, std::vector<std::uint8_t> bits, double resolution = 200.0) {
    return MaskImage{rows, cols, resolution, {0.0, 0.0}, std::move(bits)};
}

double angle_mod_pi(double a) {
    a = std::fmod(a, std::numbers::pi);
    return a < 0 ? a + std::numbers::pi : a;
}

}  // namespace

TEST_SUITE("planners") {

TEST_CASE("fully occupied grid has zero distance everywhere") {
    const DistanceField f = distance_transform(grid(6, 9, std::vector<std::uint8_t>(54, 1)));
    for (double v : f.values) CHECK(v == 0.0);
}

TEST_CASE("border-only 8x8 grid peaks at the four central pixels") {
    std::vector<std::uint8_t> bits(64, 0);
    for (int i = 0; i < 8; ++i) bits[i] = bits[56 + i] = bits[i * 8] = bits[i * 8 + 7] = 1;
    const double res = 100.0;
    const DistanceField f = distance_transform(grid(8, 8, bits, res));
    const auto oracle = oracles::brute_force_sq_distance(bits, 8, 8);
    double peak = 0.0;
    for (std::size_t i = 0; i < 64; ++i) {
        CHECK(f.values[i] == std::sqrt(static_cast<double>(oracle[i])) / res);
        peak = std::max(peak, f.values[i]);
    }
    CHECK(peak == 3.0 / res);
    for (int r : {3, 4}) {
        for (int c : {3, 4}) CHECK(f.at(r, c) == peak);
    }
}

TEST_CASE("distance transform matches the brute-force oracle on random grids") {
    Rng rng(2024);
    for (int trial = 0; trial < 8; ++trial) {
        const int rows = 17 + static_cast<int>(rng.below(30));
        const int cols = 17 + static_cast<int>(rng.below(30));
        const double density = 0.02 + 0.3 * rng.uniform();
        std::vector<std::uint8_t> bits(static_cast<std::size_t>(rows) * cols);
        for (auto& b : bits) b = rng.bernoulli(density);
        bits[rng.below(bits.size())] = 1;
        const auto fast = squared_distance_transform(bits, rows, cols);
        const auto oracle = oracles::brute_force_sq_distance(bits, rows, cols);
        for (std::size_t i = 0; i < bits.size(); ++i) REQUIRE(fast[i] == oracle[i]);
    }
}

TEST_CASE("grid with nothing occupied is infinitely free") {
    const DistanceField f = distance_transform(grid(4, 4, std::vector<std::uint8_t>(16, 0)));
    for (double v : f.values) CHECK(std::isinf(v));
}

TEST_CASE("most free point") {
    SUBCASE("empty square bin gives the center") {
        const SceneState s = scene_of({}, -1, Bin{0.4, 0.4, 0.01});
        const SegMasks m = rasterize_scene(s);
        const Vec2 p = most_free_point(distance_transform(m.occupancy), 0.01);
        const double px = 1.0 / m.occupancy.resolution;
        CHECK(std::abs(p.x - s.bin.center().x) <= px);
        CHECK(std::abs(p.y - s.bin.center().y) <= px);
    }
    SUBCASE("objects packed on the left push it to the right") {
        std::vector<ObjectState> objs;
        int id = 0;
        for (double y = 0.05; y < 0.58; y += 0.06) objs.push_back(rect(id++, 0.1, y, 0.17, 0.05));
        const SceneState s = scene_of(objs, 0);
        const SegMasks m = rasterize_scene(s);
        const Vec2 p = most_free_point(distance_transform(m.occupancy), 0.01);
        CHECK(p.x > s.bin.width / 2);
        Vec2 oracle;
        REQUIRE(oracles::brute_force_most_free_point(m.occupancy, 0.01, oracle));
        CHECK(p == oracle);
    }
    SUBCASE("packed bin has no free space") {
        const SceneState s = scene_of({rect(0, 0.2, 0.3, 0.38, 0.58)}, 0);
        const SegMasks m = rasterize_scene(s);
        try {
            most_free_point(distance_transform(m.occupancy), 0.01);
            FAIL("expected NoFreeSpace");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NoFreeSpace);
        }
    }
}

TEST_CASE("parallel jaw on a lone small rectangle closes across its minor axis") {
    const SceneState s = scene_of({rect(0, 0.2, 0.3, 0.04, 0.02)}, 0);
    const SegMasks m = rasterize_scene(s);
    const ActionPlan p = plan_parallel_jaw(s, m, 0);
    CHECK(p.quality >= 0.9);
    const auto& g = std::get<ParallelJawGrasp>(p.action);
    const double minor_axis = std::numbers::pi / 2;
    CHECK(std::abs(angle_mod_pi(g.phi) - minor_axis) <= 15.0 * std::numbers::pi / 180.0);
}

TEST_CASE("parallel jaw cannot span an object wider than the opening") {
    const SceneState s = scene_of({rect(0, 0.2, 0.3, 0.10, 0.10)}, 0);
    CHECK(plan_parallel_jaw(s, rasterize_scene(s), 0).quality == 0.0);
}

TEST_CASE("neighbors in the finger path lower jaw quality") {
    // Two tall walls flank a thin bar along its minor axis.
    const SceneState s = scene_of({rect(0, 0.2, 0.3, 0.06, 0.02, 0, 0.02), rect(1, 0.2, 0.28, 0.08, 0.02, 0, 0.06),
                                   rect(2, 0.2, 0.32, 0.08, 0.02, 0, 0.06)},
                                  0);
    const SceneState lone = scene_of({rect(0, 0.2, 0.3, 0.06, 0.02, 0, 0.02)}, 0);
    const double crowded = plan_parallel_jaw(s, rasterize_scene(s), 0).quality;
    const double free = plan_parallel_jaw(lone, rasterize_scene(lone), 0).quality;
    CHECK(crowded < free);
}

TEST_CASE("grasp planners reject invisible objects") {
    const SceneState s = scene_of({rect(0, 0.2, 0.3, 0.03, 0.03), rect(1, 0.2, 0.3, 0.06, 0.06, 1)}, 0);
    const SegMasks m = rasterize_scene(s);
    for (auto plan : {plan_parallel_jaw, plan_suction}) {
        try {
            plan(s, m, 0, {});
            FAIL("expected EmptyMask");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::EmptyMask);
        }
    }
}

TEST_CASE("suction quality") {
    SUBCASE("large flat unoccluded object") {
        const SceneState s = scene_of({rect(0, 0.2, 0.3, 0.08, 0.06)}, 0);
        CHECK(plan_suction(s, rasterize_scene(s), 0).quality == 1.0);
    }
    SUBCASE("sliver narrower than the cup") {
        // One pixel wide at 200 px/m.
        const SceneState s = scene_of({rect(0, 0.2025, 0.3025, 0.004, 0.06)}, 0);
        const SegMasks m = rasterize_scene(s);
        const MaskImage& modal = m.at(0).modal;
        // Inscribed radius by brute force: deepest mask pixel's distance to
        // the nearest non-mask pixel, less half a pixel.
        std::vector<std::uint8_t> outside(modal.bits.size());
        for (std::size_t i = 0; i < outside.size(); ++i) outside[i] = !modal.bits[i];
        const auto d2 = oracles::brute_force_sq_distance(outside, modal.rows, modal.cols);
        long long deepest = 0;
        for (std::size_t i = 0; i < d2.size(); ++i) {
            if (modal.bits[i]) deepest = std::max(deepest, d2[i]);
        }
        const double inscribed = (std::sqrt(static_cast<double>(deepest)) - 0.5) / modal.resolution;
        const double cup = GripperGeometry{}.suction_cup_radius;
        const double q = plan_suction(s, m, 0).quality;
        CHECK(q < 0.5);
        CHECK(q == doctest::Approx(inscribed / cup));
    }
    SUBCASE("seventy percent occluded with ample flat area") {
        const SceneState s = scene_of({rect(0, 0.2, 0.3, 0.10, 0.06), rect(1, 0.235, 0.3, 0.11, 0.08, 1)}, 0);
        const SegMasks m = rasterize_scene(s);
        const double vis = static_cast<double>(m.at(0).modal.count()) / static_cast<double>(m.at(0).amodal.count());
        CHECK(vis == doctest::Approx(0.3).epsilon(0.05));
        CHECK(plan_suction(s, m, 0).quality == doctest::Approx(0.3).epsilon(0.05));
    }
}

TEST_CASE("push on a lone object follows the free-space direction") {
    const SceneState s = scene_of({rect(0, 0.12, 0.2, 0.04, 0.03)}, 0);
    const SegMasks m = rasterize_scene(s);
    const PlannerParams params;
    const ActionPlan p = plan_push(s, m, 0, params);
    REQUIRE(p.quality == 1.0);
    const auto& push = std::get<Push>(p.action);
    const Vec2 com = s.at(0).pose.position();
    CHECK(point_segment_distance(com, push.p.xy(), push.p_prime.xy()) <= params.com_tolerance + 1e-12);

    Vec2 free_pt;
    REQUIRE(oracles::brute_force_most_free_point(m.occupancy, 0.01, free_pt));
    const Vec2 dir = push.p_prime.xy() - push.p.xy();
    const Vec2 pref = free_pt - com;
    const double dev = std::acos(std::clamp(dot(dir, pref) / (norm(dir) * norm(pref)), -1.0, 1.0));
    CHECK(dev <= 2.0 * std::numbers::pi / params.push_angles + 1e-9);

    const auto candidates = oracles::feasible_pushes(s, 0, free_pt, params);
    REQUIRE_FALSE(candidates.empty());
    double best = 10.0;
    for (const auto& c : candidates) best = std::min(best, c.deviation);
    CHECK(dev == doctest::Approx(best));
}

TEST_CASE("push on an object wedged in a corner is infeasible") {
    // A slab filling the corner of a small bin: the closed gripper behind any
    // start on the standoff circle reaches past the walls.
    const Bin bin{0.2, 0.2, 0.01};
    const SceneState s = scene_of({rect(0, bin.wall + 0.06, bin.wall + 0.06, 0.12, 0.12)}, 0, bin);
    const SegMasks m = rasterize_scene(s);
    CHECK(plan_push(s, m, 0).quality == 0.0);
    Vec2 free_pt;
    REQUIRE(oracles::brute_force_most_free_point(m.occupancy, 0.01, free_pt));
    CHECK(oracles::feasible_pushes(s, 0, free_pt, {}).empty());
}

TEST_CASE("push quality is binary") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        HeapSpec spec;
        spec.seed = seed;
        const SceneState s = generate_heap(spec);
        const SegMasks m = rasterize_scene(s);
        const Planner planner(s, m);
        for (int id : m.visible_ids()) {
            const double q = planner.push(id).quality;
            CHECK((q == 0.0 || q == 1.0));
        }
    }
}

}

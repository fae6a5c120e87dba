#include <doctest.h>

#include <numbers>

#include "mechsearch/geometry.hpp"
#include "mechsearch/rng.hpp"

using namespace mechsearch;

TEST_SUITE("geometry") {

TEST_CASE("shoelace area and centroid of a rectangle") {
    const Polygon r = rectangle({1, 2}, {4, 4});
    CHECK(area(r) == doctest::Approx(6.0));
    CHECK(signed_area(r) > 0.0);
    const Vec2 c = centroid(r);
    CHECK(c.x == doctest::Approx(2.5));
    CHECK(c.y == doctest::Approx(3.0));
}

TEST_CASE("containment of an L footprint") {
    const Polygon l = {{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}};
    CHECK(contains(l, {0.5, 0.5}));
    CHECK(contains(l, {0.5, 1.5}));
    CHECK_FALSE(contains(l, {1.5, 1.5}));
    CHECK(is_simple(l));
    CHECK_FALSE(is_convex(l));
}

TEST_CASE("convex decomposition preserves area and convexity") {
    const Polygon t = {{-0.5, 0}, {0.5, 0}, {0.5, 2}, {2, 2}, {2, 3}, {-2, 3}, {-2, 2}, {-0.5, 2}};
    const auto parts = convex_decomposition(make_ccw(t));
    double total = 0.0;
    for (const Polygon& p : parts) {
        CHECK(is_convex(p));
        total += area(p);
    }
    CHECK(total == doctest::Approx(area(t)));
}

TEST_CASE("convex intersection area matches the overlap box") {
    const Polygon a = rectangle({0, 0}, {2, 2});
    const Polygon b = rectangle({1, 1.5}, {3, 4});
    CHECK(convex_intersection_area(a, b) == doctest::Approx(0.5));
    CHECK(convex_intersects(a, b));
    // Touching along an edge is not an intersection.
    CHECK_FALSE(convex_intersects(a, rectangle({2, 0}, {3, 1})));
}

TEST_CASE("transformed rotates about the origin then translates") {
    const Polygon p = transformed(std::vector<Vec2>{{1, 0}}, {2, 3}, std::numbers::pi / 2);
    CHECK(p[0].x == doctest::Approx(2.0));
    CHECK(p[0].y == doctest::Approx(4.0));
}

TEST_CASE("segment distance and ray exit") {
    CHECK(point_segment_distance({0, 1}, {-1, 0}, {1, 0}) == doctest::Approx(1.0));
    CHECK(point_segment_distance({3, 0}, {-1, 0}, {1, 0}) == doctest::Approx(2.0));
    const Aabb box{{0, 0}, {4, 2}};
    CHECK(ray_exit_distance({1, 1}, {1, 0}, box) == doctest::Approx(3.0));
    CHECK(ray_exit_distance({1, 1}, unit_from_angle(std::numbers::pi / 4), box) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("rng streams are reproducible and seeds are mixed") {
    Rng a(7), b(7);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    CHECK(derive_seed(1, 2) != derive_seed(2, 1));
    Rng c(3);
    for (int i = 0; i < 1000; ++i) {
        const auto k = c.below(7);
        CHECK(k < 7);
        const double u = c.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

}

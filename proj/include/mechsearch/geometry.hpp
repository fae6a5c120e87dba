#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace mechsearch {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
    friend Vec2 operator*(double s, Vec2 a) { return {a.x * s, a.y * s}; }
    friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline Vec2 perp(Vec2 a) { return {-a.y, a.x}; }
inline Vec2 unit_from_angle(double a) { return {std::cos(a), std::sin(a)}; }

using Polygon = std::vector<Vec2>;

struct Aabb {
    Vec2 lo;
    Vec2 hi;

    bool overlaps(const Aabb& o) const {
        return lo.x < o.hi.x && o.lo.x < hi.x && lo.y < o.hi.y && o.lo.y < hi.y;
    }
};

/// Signed shoelace area; positive for counter-clockwise winding.
double signed_area(std::span<const Vec2> poly);
double area(std::span<const Vec2> poly);
Vec2 centroid(std::span<const Vec2> poly);
Aabb bounds(std::span<const Vec2> poly);

bool is_convex(std::span<const Vec2> poly);
bool is_simple(std::span<const Vec2> poly);
Polygon make_ccw(Polygon poly);

/// Crossing-number test. Points exactly on an edge are classified consistently
/// but arbitrarily, which is all rasterization needs.
bool contains(std::span<const Vec2> poly, Vec2 p);

Polygon transformed(std::span<const Vec2> poly, Vec2 translation, double theta);
Polygon translated(std::span<const Vec2> poly, Vec2 offset);

/// Splits a simple polygon into convex pieces with disjoint interiors
/// (ear clipping followed by greedy merging of adjacent triangles).
std::vector<Polygon> convex_decomposition(const Polygon& poly);

/// Sutherland-Hodgman clip of `subject` against a convex CCW `clip` polygon.
Polygon clip_convex(std::span<const Vec2> subject, std::span<const Vec2> clip);

/// Area of the intersection of two convex CCW polygons.
double convex_intersection_area(std::span<const Vec2> a, std::span<const Vec2> b);

/// Separating-axis test; shapes that only touch do not intersect.
bool convex_intersects(std::span<const Vec2> a, std::span<const Vec2> b, double tol = 1e-9);

/// Axis-aligned rectangle as a CCW polygon.
Polygon rectangle(Vec2 lo, Vec2 hi);

/// Oriented rectangle spanning [back, front] along `dir` and [-half_width, half_width]
/// across it, measured from `origin`.
Polygon oriented_rectangle(Vec2 origin, Vec2 dir, double back, double front, double half_width);

/// Distance from p to the segment [a, b].
double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);

/// Largest t >= 0 such that p + t * dir stays inside the box. Assumes p inside.
double ray_exit_distance(Vec2 p, Vec2 dir, const Aabb& box);

}  // namespace mechsearch

#include "mechsearch/geometry.hpp"

#include <algorithm>
#include <limits>

namespace mechsearch {

double signed_area(std::span<const Vec2> poly) {
    double s = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        s += cross(poly[i], poly[(i + 1) % n]);
    }
    return 0.5 * s;
}

double area(std::span<const Vec2> poly) { return std::abs(signed_area(poly)); }

Vec2 centroid(std::span<const Vec2> poly) {
    const std::size_t n = poly.size();
    double a = 0.0;
    Vec2 c{};
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 p = poly[i];
        const Vec2 q = poly[(i + 1) % n];
        const double w = cross(p, q);
        a += w;
        c.x += (p.x + q.x) * w;
        c.y += (p.y + q.y) * w;
    }
    if (std::abs(a) < 1e-300) {
        Vec2 m{};
        for (const Vec2& p : poly) m = m + p;
        return n ? m * (1.0 / static_cast<double>(n)) : m;
    }
    return c * (1.0 / (3.0 * a));
}

Aabb bounds(std::span<const Vec2> poly) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    Aabb b{{inf, inf}, {-inf, -inf}};
    for (const Vec2& p : poly) {
        b.lo.x = std::min(b.lo.x, p.x);
        b.lo.y = std::min(b.lo.y, p.y);
        b.hi.x = std::max(b.hi.x, p.x);
        b.hi.y = std::max(b.hi.y, p.y);
    }
    return b;
}

bool is_convex(std::span<const Vec2> poly) {
    const std::size_t n = poly.size();
    if (n < 3) return false;
    int sign = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = poly[i];
        const Vec2 b = poly[(i + 1) % n];
        const Vec2 c = poly[(i + 2) % n];
        const double z = cross(b - a, c - b);
        if (std::abs(z) < 1e-15) continue;
        const int s = z > 0 ? 1 : -1;
        if (sign == 0) {
            sign = s;
        } else if (s != sign) {
            return false;
        }
    }
    return sign != 0;
}

namespace {

bool segments_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const double d1 = cross(b - a, c - a);
    const double d2 = cross(b - a, d - a);
    const double d3 = cross(d - c, a - c);
    const double d4 = cross(d - c, b - c);
    return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

}  // namespace

bool is_simple(std::span<const Vec2> poly) {
    const std::size_t n = poly.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (j == i + 1 || (i == 0 && j == n - 1)) continue;
            if (segments_cross(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n])) return false;
        }
    }
    return area(poly) > 0.0;
}

Polygon make_ccw(Polygon poly) {
    if (signed_area(poly) < 0) std::reverse(poly.begin(), poly.end());
    return poly;
}

bool contains(std::span<const Vec2> poly, Vec2 p) {
    bool inside = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 a = poly[i];
        const Vec2 b = poly[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
            if (p.x < x) inside = !inside;
        }
    }
    return inside;
}

Polygon transformed(std::span<const Vec2> poly, Vec2 translation, double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    Polygon out;
    out.reserve(poly.size());
    for (const Vec2& p : poly) {
        out.push_back({c * p.x - s * p.y + translation.x, s * p.x + c * p.y + translation.y});
    }
    return out;
}

Polygon translated(std::span<const Vec2> poly, Vec2 offset) {
    Polygon out(poly.begin(), poly.end());
    for (Vec2& p : out) p = p + offset;
    return out;
}

namespace {

bool point_in_triangle(Vec2 p, Vec2 a, Vec2 b, Vec2 c) {
    return cross(b - a, p - a) >= 0 && cross(c - b, p - b) >= 0 && cross(a - c, p - c) >= 0;
}

std::vector<Polygon> ear_clip(const Polygon& ccw) {
    std::vector<Polygon> tris;
    std::vector<std::size_t> idx(ccw.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::size_t guard = 0;
    while (idx.size() > 3 && guard++ < 10000) {
        bool clipped = false;
        const std::size_t m = idx.size();
        for (std::size_t i = 0; i < m; ++i) {
            const Vec2 a = ccw[idx[(i + m - 1) % m]];
            const Vec2 b = ccw[idx[i]];
            const Vec2 c = ccw[idx[(i + 1) % m]];
            if (cross(b - a, c - b) <= 1e-15) continue;
            bool empty = true;
            for (std::size_t j = 0; j < m && empty; ++j) {
                if (j == i || j == (i + 1) % m || j == (i + m - 1) % m) continue;
                const Vec2 p = ccw[idx[j]];
                if (p == a || p == b || p == c) continue;
                if (point_in_triangle(p, a, b, c)) empty = false;
            }
            if (!empty) continue;
            tris.push_back({a, b, c});
            idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(i));
            clipped = true;
            break;
        }
        if (!clipped) break;
    }
    if (idx.size() == 3) tris.push_back({ccw[idx[0]], ccw[idx[1]], ccw[idx[2]]});
    return tris;
}

// Merges b into a across a shared edge (a[i], a[i+1]) == (b[j+1], b[j]).
bool try_merge(const Polygon& a, const Polygon& b, Polygon& out) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        const Vec2 p = a[i];
        const Vec2 q = a[(i + 1) % a.size()];
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (!(b[j] == q && b[(j + 1) % b.size()] == p)) continue;
            Polygon merged;
            for (std::size_t k = 0; k <= i; ++k) merged.push_back(a[k]);
            for (std::size_t k = 2; k < b.size(); ++k) merged.push_back(b[(j + k) % b.size()]);
            for (std::size_t k = i + 1; k < a.size(); ++k) merged.push_back(a[k]);
            if (!is_convex(merged)) return false;
            out = std::move(merged);
            return true;
        }
    }
    return false;
}

}  // namespace

std::vector<Polygon> convex_decomposition(const Polygon& poly) {
    Polygon ccw = make_ccw(poly);
    if (is_convex(ccw)) return {ccw};
    std::vector<Polygon> pieces = ear_clip(ccw);
    bool merged_any = true;
    while (merged_any) {
        merged_any = false;
        for (std::size_t i = 0; i < pieces.size() && !merged_any; ++i) {
            for (std::size_t j = i + 1; j < pieces.size() && !merged_any; ++j) {
                Polygon m;
                if (try_merge(pieces[i], pieces[j], m) || try_merge(pieces[j], pieces[i], m)) {
                    pieces[i] = std::move(m);
                    pieces.erase(pieces.begin() + static_cast<std::ptrdiff_t>(j));
                    merged_any = true;
                }
            }
        }
    }
    return pieces;
}

Polygon clip_convex(std::span<const Vec2> subject, std::span<const Vec2> clip) {
    Polygon out(subject.begin(), subject.end());
    const std::size_t n = clip.size();
    for (std::size_t e = 0; e < n && !out.empty(); ++e) {
        const Vec2 a = clip[e];
        const Vec2 b = clip[(e + 1) % n];
        const Vec2 d = b - a;
        Polygon in = std::move(out);
        out.clear();
        for (std::size_t i = 0; i < in.size(); ++i) {
            const Vec2 p = in[i];
            const Vec2 q = in[(i + 1) % in.size()];
            const double sp = cross(d, p - a);
            const double sq = cross(d, q - a);
            if (sp >= 0) out.push_back(p);
            if ((sp >= 0) != (sq >= 0)) {
                const double t = sp / (sp - sq);
                out.push_back(p + (q - p) * t);
            }
        }
    }
    return out;
}

double convex_intersection_area(std::span<const Vec2> a, std::span<const Vec2> b) {
    const Polygon c = clip_convex(a, b);
    return c.size() < 3 ? 0.0 : area(c);
}

namespace {

bool separated_on_axes(std::span<const Vec2> a, std::span<const Vec2> b, std::span<const Vec2> axes_src, double tol) {
    const std::size_t n = axes_src.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 axis = perp(axes_src[(i + 1) % n] - axes_src[i]);
        const double len = norm(axis);
        if (len < 1e-15) continue;
        const Vec2 u = axis * (1.0 / len);
        double amin = std::numeric_limits<double>::infinity(), amax = -amin;
        double bmin = amin, bmax = -amin;
        for (const Vec2& p : a) {
            amin = std::min(amin, dot(p, u));
            amax = std::max(amax, dot(p, u));
        }
        for (const Vec2& p : b) {
            bmin = std::min(bmin, dot(p, u));
            bmax = std::max(bmax, dot(p, u));
        }
        if (std::min(amax, bmax) - std::max(amin, bmin) <= tol) return true;
    }
    return false;
}

}  // namespace

bool convex_intersects(std::span<const Vec2> a, std::span<const Vec2> b, double tol) {
    return !separated_on_axes(a, b, a, tol) && !separated_on_axes(a, b, b, tol);
}

Polygon rectangle(Vec2 lo, Vec2 hi) { return {{lo.x, lo.y}, {hi.x, lo.y}, {hi.x, hi.y}, {lo.x, hi.y}}; }

Polygon oriented_rectangle(Vec2 origin, Vec2 dir, double back, double front, double half_width) {
    const Vec2 v = perp(dir);
    return {origin + dir * back - v * half_width, origin + dir * front - v * half_width,
            origin + dir * front + v * half_width, origin + dir * back + v * half_width};
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 d = b - a;
    const double len2 = dot(d, d);
    if (len2 <= 0.0) return norm(p - a);
    const double t = std::clamp(dot(p - a, d) / len2, 0.0, 1.0);
    return norm(p - (a + d * t));
}

double ray_exit_distance(Vec2 p, Vec2 dir, const Aabb& box) {
    double t = std::numeric_limits<double>::infinity();
    if (dir.x > 1e-15) t = std::min(t, (box.hi.x - p.x) / dir.x);
    if (dir.x < -1e-15) t = std::min(t, (box.lo.x - p.x) / dir.x);
    if (dir.y > 1e-15) t = std::min(t, (box.hi.y - p.y) / dir.y);
    if (dir.y < -1e-15) t = std::min(t, (box.lo.y - p.y) / dir.y);
    return std::max(0.0, t);
}

}  // namespace mechsearch

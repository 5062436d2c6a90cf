#pragma once

// Planar geometric primitives shared by the mesh layer: vectors, robust-ish
// orientation/incircle predicates (long double), segment and polygon tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace fbfem {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm2(Vec2 a) { return dot(a, a); }
inline double norm(Vec2 a) { return std::sqrt(norm2(a)); }

inline Vec2 normalized(Vec2 a) {
  double n = norm(a);
  if (n == 0.0) throw std::runtime_error("normalized: zero vector");
  return {a.x / n, a.y / n};
}

// Perpendicular rotated +90 degrees.
inline Vec2 perp(Vec2 a) { return {-a.y, a.x}; }

// Twice the signed area of triangle (a,b,c); > 0 for counterclockwise.
inline long double orient2d(Vec2 a, Vec2 b, Vec2 c) {
  long double acx = (long double)a.x - (long double)c.x;
  long double acy = (long double)a.y - (long double)c.y;
  long double bcx = (long double)b.x - (long double)c.x;
  long double bcy = (long double)b.y - (long double)c.y;
  return acx * bcy - acy * bcx;
}

inline double signed_area(Vec2 a, Vec2 b, Vec2 c) {
  return 0.5 * (double)orient2d(a, b, c);
}

// > 0 when p lies strictly inside the circumcircle of the CCW triangle (a,b,c).
inline long double incircle(Vec2 a, Vec2 b, Vec2 c, Vec2 p) {
  long double adx = (long double)a.x - p.x, ady = (long double)a.y - p.y;
  long double bdx = (long double)b.x - p.x, bdy = (long double)b.y - p.y;
  long double cdx = (long double)c.x - p.x, cdy = (long double)c.y - p.y;
  long double ad = adx * adx + ady * ady;
  long double bd = bdx * bdx + bdy * bdy;
  long double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) +
         ad * (bdx * cdy - bdy * cdx);
}

inline double dist2_point_segment(Vec2 p, Vec2 a, Vec2 b) {
  Vec2 ab = b - a;
  double len2 = norm2(ab);
  if (len2 == 0.0) return norm2(p - a);
  double t = dot(p - a, ab) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return norm2(p - (a + t * ab));
}

// Proper or improper intersection of open segments (a,b) and (c,d), excluding
// the case of a shared endpoint.
inline bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  auto same = [](Vec2 u, Vec2 v) { return u.x == v.x && u.y == v.y; };
  if (same(a, c) || same(a, d) || same(b, c) || same(b, d)) return false;
  long double d1 = orient2d(c, d, a);
  long double d2 = orient2d(c, d, b);
  long double d3 = orient2d(a, b, c);
  long double d4 = orient2d(a, b, d);
  if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 &&
      d3 != 0 && d4 != 0)
    return true;
  auto on = [&](Vec2 p, Vec2 u, Vec2 v) {
    return orient2d(u, v, p) == 0 && std::min(u.x, v.x) <= p.x &&
           p.x <= std::max(u.x, v.x) && std::min(u.y, v.y) <= p.y &&
           p.y <= std::max(u.y, v.y);
  };
  return on(a, c, d) || on(b, c, d) || on(c, a, b) || on(d, a, b);
}

// Crossing-number test; boundary points are reported as inside.
inline bool point_in_polygon(Vec2 p, const std::vector<Vec2>& poly) {
  bool in = false;
  size_t n = poly.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    Vec2 a = poly[j], b = poly[i];
    if (dist2_point_segment(p, a, b) < 1e-28) return true;
    if ((b.y > p.y) != (a.y > p.y)) {
      double t = (p.y - b.y) / (a.y - b.y);
      if (p.x < b.x + t * (a.x - b.x)) in = !in;
    }
  }
  return in;
}

inline double polygon_area(const std::vector<Vec2>& poly) {
  double s = 0.0;
  size_t n = poly.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) s += cross(poly[j], poly[i]);
  return 0.5 * s;
}

// Smallest interior angle of a non-degenerate triangle, in degrees.
inline double triangle_min_angle_deg(Vec2 a, Vec2 b, Vec2 c) {
  double la = norm(b - c), lb = norm(c - a), lc = norm(a - b);
  if (la == 0 || lb == 0 || lc == 0) return 0.0;
  auto ang = [](double opp, double s1, double s2) {
    double v = (s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2);
    return std::acos(std::clamp(v, -1.0, 1.0));
  };
  double m = std::min({ang(la, lb, lc), ang(lb, lc, la), ang(lc, la, lb)});
  return m * 180.0 / M_PI;
}

// Deterministic hash, used for reproducible lattice jitter.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform value in [-1, 1] derived from two integer lattice indices.
inline double hash_unit(std::int64_t i, std::int64_t j, std::uint64_t salt) {
  std::uint64_t h = splitmix64((std::uint64_t)i * 0x100000001b3ULL ^
                               splitmix64((std::uint64_t)j ^ salt));
  return ((double)(h >> 11) / (double)(1ULL << 53)) * 2.0 - 1.0;
}

}  // namespace fbfem

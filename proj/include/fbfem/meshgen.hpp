#pragma once

// Unstructured mesh generation for the solver's domains: a rectangle strip or
// a disk (optionally with half-plane / disk cutouts), conforming to a given
// interface polyline. The polyline is subdivided to the target edge length,
// constrained into a Bowyer-Watson Delaunay triangulation of boundary,
// interface and interior lattice points, and the interior is relaxed by a few
// smart-Laplacian passes. Everything is deterministic: lattice jitter comes
// from an integer hash.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>

#include "fbfem/mesh.hpp"

namespace fbfem {

struct MeshWithInterface {
  Mesh mesh;
  InterfaceCurve interface;
};

using MarkerPredicate = std::function<Marker(Vec2)>;

namespace meshgen {

inline int next_pow2_at_least(double x) {
  int p = 1;
  while ((double)p < x) p *= 2;
  return p;
}

// Splits each input segment into a power-of-two number of equal pieces with
// spacing <= h. One middle segment of an open chain gets 2p-1 pieces so that
// halving h exactly doubles the chain's vertex count (the open chain carries
// one endpoint more than it has pieces); the middle is chosen so the denser
// run sits away from the domain boundary.
inline std::vector<Vec2> subdivide_polyline(const std::vector<Vec2>& pts, double h,
                                            bool closed) {
  if (pts.size() < 2) throw std::runtime_error("subdivide_polyline: need >= 2 points");
  std::vector<Vec2> out;
  int nseg = (int)pts.size() - (closed ? 0 : 1);
  for (int s = 0; s < nseg; ++s) {
    Vec2 a = pts[s], b = pts[(s + 1) % pts.size()];
    double len = norm(b - a);
    if (len == 0.0) throw std::runtime_error("subdivide_polyline: zero-length segment");
    int pieces = next_pow2_at_least(len / h);
    if (!closed && s == nseg / 2) pieces = 2 * pieces - 1;
    for (int k = 0; k < pieces; ++k)
      out.push_back(a + (double(k) / pieces) * (b - a));
  }
  if (!closed) out.push_back(pts.back());
  return out;
}

struct DTri {
  std::array<int, 3> v;
  Vec2 cc;      // circumcenter (double precision cache)
  double cr2;   // squared circumradius
  bool alive = true;
};

class Delaunay {
 public:
  explicit Delaunay(const std::vector<Vec2>& pts) : p_(pts), n_((int)pts.size()) {
    if (n_ < 3) throw std::runtime_error("Delaunay: need >= 3 points");
    Vec2 lo = pts[0], hi = pts[0];
    for (const Vec2& q : pts) {
      lo = {std::min(lo.x, q.x), std::min(lo.y, q.y)};
      hi = {std::max(hi.x, q.x), std::max(hi.y, q.y)};
    }
    Vec2 c = 0.5 * (lo + hi);
    double r = 20.0 * std::max({hi.x - lo.x, hi.y - lo.y, 1e-9});
    p_.push_back(c + Vec2{0.0, 2.0 * r});
    p_.push_back(c + Vec2{-1.8 * r, -r});
    p_.push_back(c + Vec2{1.8 * r, -r});
    add_tri(n_, n_ + 1, n_ + 2);
    for (int i = 0; i < n_; ++i) insert(i);
  }

  const std::vector<Vec2>& points() const { return p_; }

  // Undirected edge -> alive triangle ids.
  std::map<std::pair<int, int>, std::vector<int>> edge_map() const {
    std::map<std::pair<int, int>, std::vector<int>> em;
    for (int t = 0; t < (int)tris_.size(); ++t) {
      if (!tris_[t].alive) continue;
      for (int e = 0; e < 3; ++e)
        em[key(tris_[t].v[e], tris_[t].v[(e + 1) % 3])].push_back(t);
    }
    return em;
  }

  // Forces segment (a,b) into the triangulation by flipping crossing edges.
  void recover_edge(int a, int b) {
    for (int attempt = 0; attempt < 200; ++attempt) {
      auto em = edge_map();
      if (em.count(key(a, b))) return;
      bool flipped = false;
      for (const auto& [e, ts] : em) {
        if (ts.size() != 2) continue;
        int c = e.first, d = e.second;
        if (c == a || c == b || d == a || d == b) continue;
        if (!segments_intersect(p_[a], p_[b], p_[c], p_[d])) continue;
        int x = opposite(ts[0], c, d), y = opposite(ts[1], c, d);
        if (x < 0 || y < 0) continue;
        // flip (c,d) -> (x,y) only if the quad is strictly convex
        if (orient2d(p_[x], p_[c], p_[y]) <= 0 || orient2d(p_[y], p_[d], p_[x]) <= 0)
          continue;
        tris_[ts[0]].alive = false;
        tris_[ts[1]].alive = false;
        add_tri_ccw(x, c, y);
        add_tri_ccw(y, d, x);
        flipped = true;
        break;
      }
      if (!flipped)
        throw std::runtime_error("mesh generation: failed to recover a constrained edge");
    }
    throw std::runtime_error("mesh generation: edge recovery did not terminate");
  }

  // Alive triangles without super vertices whose centroid passes `keep`.
  std::vector<std::array<int, 3>> kept_triangles(
      const std::function<bool(Vec2)>& keep) const {
    std::vector<std::array<int, 3>> out;
    for (const DTri& t : tris_) {
      if (!t.alive) continue;
      if (t.v[0] >= n_ || t.v[1] >= n_ || t.v[2] >= n_) continue;
      Vec2 c = (1.0 / 3.0) * (p_[t.v[0]] + p_[t.v[1]] + p_[t.v[2]]);
      if (!keep(c)) continue;
      std::array<int, 3> tv = t.v;
      if (orient2d(p_[tv[0]], p_[tv[1]], p_[tv[2]]) < 0) std::swap(tv[1], tv[2]);
      out.push_back(tv);
    }
    return out;
  }

 private:
  static std::pair<int, int> key(int a, int b) {
    return a < b ? std::pair{a, b} : std::pair{b, a};
  }

  int opposite(int t, int c, int d) const {
    for (int v : tris_[t].v)
      if (v != c && v != d) return v;
    return -1;
  }

  void circumdata(DTri& t) const {
    Vec2 a = p_[t.v[0]], b = p_[t.v[1]], c = p_[t.v[2]];
    double d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    if (d == 0.0) {
      t.cc = a;
      t.cr2 = std::numeric_limits<double>::max();
      return;
    }
    double a2 = norm2(a), b2 = norm2(b), c2 = norm2(c);
    t.cc.x = (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d;
    t.cc.y = (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d;
    t.cr2 = norm2(a - t.cc);
  }

  void add_tri(int a, int b, int c) {
    DTri t;
    t.v = {a, b, c};
    circumdata(t);
    tris_.push_back(t);
  }

  void add_tri_ccw(int a, int b, int c) {
    if (orient2d(p_[a], p_[b], p_[c]) < 0) std::swap(b, c);
    add_tri(a, b, c);
  }

  bool in_circle(const DTri& t, Vec2 q) const {
    double d2 = norm2(q - t.cc);
    if (d2 > t.cr2 * (1.0 + 1e-9)) return false;
    if (d2 < t.cr2 * (1.0 - 1e-9)) return true;
    return incircle(p_[t.v[0]], p_[t.v[1]], p_[t.v[2]], q) > 0;
  }

  bool contains_point(const DTri& t, Vec2 q) const {
    long double eps = -1e-18L;
    return orient2d(p_[t.v[0]], p_[t.v[1]], q) >= eps &&
           orient2d(p_[t.v[1]], p_[t.v[2]], q) >= eps &&
           orient2d(p_[t.v[2]], p_[t.v[0]], q) >= eps;
  }

  bool build_fan(const std::vector<int>& cavity, int pi) {
    // Boundary edges of the cavity appear exactly once, directed as stored.
    std::map<std::pair<int, int>, int> count;
    for (int t : cavity)
      for (int e = 0; e < 3; ++e)
        count[key(tris_[t].v[e], tris_[t].v[(e + 1) % 3])]++;
    std::vector<std::array<int, 2>> boundary;
    for (int t : cavity)
      for (int e = 0; e < 3; ++e) {
        int a = tris_[t].v[e], b = tris_[t].v[(e + 1) % 3];
        if (count[key(a, b)] == 1) boundary.push_back({a, b});
      }
    for (auto [a, b] : boundary)
      if (orient2d(p_[a], p_[b], p_[pi]) <= 0) return false;
    for (int t : cavity) tris_[t].alive = false;
    for (auto [a, b] : boundary) add_tri(a, b, pi);
    return true;
  }

  void insert(int pi) {
    Vec2 q = p_[pi];
    std::vector<int> cavity, containing;
    for (int t = 0; t < (int)tris_.size(); ++t) {
      if (!tris_[t].alive) continue;
      if (in_circle(tris_[t], q)) cavity.push_back(t);
      else if (contains_point(tris_[t], q)) containing.push_back(t);
    }
    for (int t : containing) cavity.push_back(t);
    if (cavity.empty())
      throw std::runtime_error("Delaunay: point outside triangulation");
    if (!build_fan(cavity, pi)) {
      if (containing.empty() || !build_fan(containing, pi))
        throw std::runtime_error("Delaunay: degenerate insertion");
    }
  }

  std::vector<Vec2> p_;
  int n_;
  std::vector<DTri> tris_;
};

struct Chain {
  std::vector<int> ids;
  bool closed = false;
};

struct TriangulationResult {
  Mesh mesh;           // labels not yet assigned
  std::vector<int> chain_ids;
};

// Shared pipeline: register boundary loop + interface chain, scatter interior
// lattice points, triangulate with constraints, smooth, carve, and mark.
inline TriangulationResult triangulate_domain(const std::vector<Vec2>& loop,
                                              std::vector<Vec2> chain_pts,
                                              bool chain_closed, double h,
                                              const MarkerPredicate& marker_pred,
                                              int smooth_passes = 5) {
  std::vector<Vec2> pts;
  std::map<std::pair<double, double>, int> registry;
  auto reg = [&](Vec2 q) {
    auto it = registry.find({q.x, q.y});
    if (it != registry.end()) return it->second;
    int id = (int)pts.size();
    pts.push_back(q);
    registry[{q.x, q.y}] = id;
    return id;
  };

  std::vector<int> loop_ids;
  for (const Vec2& q : loop) loop_ids.push_back(reg(q));
  std::vector<int> chain_ids;
  for (const Vec2& q : chain_pts) chain_ids.push_back(reg(q));

  std::vector<std::pair<int, int>> constrained;
  int nl = (int)loop_ids.size();
  for (int i = 0; i < nl; ++i)
    constrained.push_back({loop_ids[i], loop_ids[(i + 1) % nl]});
  int nc = (int)chain_ids.size();
  for (int i = 0; i + 1 < nc; ++i)
    constrained.push_back({chain_ids[i], chain_ids[i + 1]});
  if (chain_closed && nc >= 3) constrained.push_back({chain_ids[nc - 1], chain_ids[0]});

  int n_fixed = (int)pts.size();

  // Hexagonal interior lattice with deterministic jitter, kept clear of the
  // constrained points and segments.
  Vec2 lo = loop[0], hi = loop[0];
  for (const Vec2& q : loop) {
    lo = {std::min(lo.x, q.x), std::min(lo.y, q.y)};
    hi = {std::max(hi.x, q.x), std::max(hi.y, q.y)};
  }
  double dy = h * std::sqrt(3.0) / 2.0;
  // Clearance adapts to local constrained spacing: lattice points may sit
  // proportionally closer to densely subdivided chain runs.
  std::vector<double> seg_clear2(constrained.size());
  for (size_t e = 0; e < constrained.size(); ++e) {
    double len = norm(pts[constrained[e].second] - pts[constrained[e].first]);
    double c = std::min(0.5 * h, 0.85 * len);
    seg_clear2[e] = c * c;
  }
  std::vector<double> pt_clear2(n_fixed, 0.42 * h * h);  // ~0.65 h
  for (size_t e = 0; e < constrained.size(); ++e) {
    double len = norm(pts[constrained[e].second] - pts[constrained[e].first]);
    double c = std::min(0.65 * h, 0.9 * len);
    for (int v : {constrained[e].first, constrained[e].second})
      pt_clear2[v] = std::min(pt_clear2[v], c * c);
  }
  std::int64_t j0 = (std::int64_t)std::floor(lo.y / dy) - 1;
  std::int64_t j1 = (std::int64_t)std::ceil(hi.y / dy) + 1;
  for (std::int64_t j = j0; j <= j1; ++j) {
    double y = j * dy;
    double xoff = (j % 2 == 0) ? 0.0 : 0.5 * h;
    std::int64_t i0 = (std::int64_t)std::floor((lo.x - xoff) / h) - 1;
    std::int64_t i1 = (std::int64_t)std::ceil((hi.x - xoff) / h) + 1;
    for (std::int64_t i = i0; i <= i1; ++i) {
      Vec2 q{i * h + xoff + 0.06 * h * hash_unit(i, j, 17),
             y + 0.06 * h * hash_unit(i, j, 91)};
      if (!point_in_polygon(q, loop)) continue;
      bool ok = true;
      for (int k = 0; k < n_fixed && ok; ++k)
        if (norm2(q - pts[k]) < pt_clear2[k]) ok = false;
      for (size_t e = 0; e < constrained.size(); ++e) {
        if (!ok) break;
        if (dist2_point_segment(q, pts[constrained[e].first],
                                pts[constrained[e].second]) < seg_clear2[e])
          ok = false;
      }
      if (ok) pts.push_back(q);
    }
  }

  std::vector<bool> is_fixed(pts.size(), false);
  for (int k = 0; k < n_fixed; ++k) is_fixed[k] = true;

  auto keep = [&loop](Vec2 c) { return point_in_polygon(c, loop); };
  std::vector<std::array<int, 3>> tris;
  for (int pass = 0; pass <= smooth_passes; ++pass) {
    Delaunay dt(pts);
    for (auto [a, b] : constrained) dt.recover_edge(a, b);
    tris = dt.kept_triangles(keep);
    if (pass == smooth_passes) break;

    // Smart Laplacian smoothing of free points: accept a move only if the
    // local min angle does not get worse and no incident triangle inverts.
    std::vector<std::vector<int>> nbr(pts.size()), inc(pts.size());
    for (int t = 0; t < (int)tris.size(); ++t)
      for (int e = 0; e < 3; ++e) {
        int a = tris[t][e], b = tris[t][(e + 1) % 3];
        nbr[a].push_back(b);
        nbr[b].push_back(a);
        inc[a].push_back(t);
      }
    for (int v = 0; v < (int)pts.size(); ++v) {
      if (is_fixed[v] || nbr[v].empty()) continue;
      Vec2 avg{0, 0};
      for (int u : nbr[v]) avg = avg + pts[u];
      avg = (1.0 / (double)nbr[v].size()) * avg;
      double before = 180.0, after = 180.0;
      bool valid = true;
      Vec2 old = pts[v];
      for (int t : inc[v]) {
        auto [a, b, c] = tris[t];
        before = std::min(before, triangle_min_angle_deg(pts[a], pts[b], pts[c]));
      }
      pts[v] = avg;
      for (int t : inc[v]) {
        auto [a, b, c] = tris[t];
        if (signed_area(pts[a], pts[b], pts[c]) <= 0) valid = false;
        after = std::min(after, triangle_min_angle_deg(pts[a], pts[b], pts[c]));
      }
      // accept moves that help locally, or that keep comfortable quality
      if (!valid || (after < before && after < 30.0)) pts[v] = old;
    }

    // Repair pass: pull the free apex of each thin triangle toward the
    // equilateral position over its longest fixed edge.
    for (int t = 0; t < (int)tris.size(); ++t) {
      auto [a, b, c] = tris[t];
      double ma = triangle_min_angle_deg(pts[a], pts[b], pts[c]);
      if (ma >= 25.0) continue;
      for (int pivot = 0; pivot < 3; ++pivot) {
        int v = tris[t][pivot], e0 = tris[t][(pivot + 1) % 3], e1 = tris[t][(pivot + 2) % 3];
        if (is_fixed[v]) continue;
        Vec2 mid = 0.5 * (pts[e0] + pts[e1]);
        Vec2 n = perp(pts[e1] - pts[e0]);
        if (dot(n, pts[v] - mid) < 0) n = -n;
        Vec2 ideal = mid + (std::sqrt(3.0) / 2.0) * n;
        for (double w : {1.0, 0.5, 0.25}) {
          Vec2 cand = pts[v] + w * (ideal - pts[v]);
          double before = 180.0, after = 180.0;
          bool valid = true;
          Vec2 old = pts[v];
          for (int u : inc[v]) {
            auto [x, y, z] = tris[u];
            before = std::min(before, triangle_min_angle_deg(pts[x], pts[y], pts[z]));
          }
          pts[v] = cand;
          for (int u : inc[v]) {
            auto [x, y, z] = tris[u];
            if (signed_area(pts[x], pts[y], pts[z]) <= 0) valid = false;
            after = std::min(after, triangle_min_angle_deg(pts[x], pts[y], pts[z]));
          }
          if (!valid || after <= before) pts[v] = old;
          else break;
        }
      }
    }
  }

  // Drop points that ended up unused (can happen only outside the kept part).
  std::vector<int> remap(pts.size(), -1);
  std::vector<bool> used(pts.size(), false);
  for (const auto& t : tris)
    for (int v : t) used[v] = true;
  TriangulationResult res;
  for (int v = 0; v < (int)pts.size(); ++v)
    if (used[v]) {
      remap[v] = res.mesh.num_vertices();
      res.mesh.vertices.push_back(pts[v]);
    }
  for (auto t : tris)
    res.mesh.triangles.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});

  res.mesh.boundary_markers.assign(res.mesh.num_vertices(), Marker::Interior);
  for (int id : loop_ids) {
    if (remap[id] < 0)
      throw std::runtime_error("mesh generation: boundary point lost");
    res.mesh.boundary_markers[remap[id]] = marker_pred(res.mesh.vertices[remap[id]]);
  }
  for (int id : chain_ids) {
    if (remap[id] < 0)
      throw std::runtime_error("mesh generation: interface point lost");
    res.mesh.boundary_markers[remap[id]] = Marker::Gamma;
    res.chain_ids.push_back(remap[id]);
  }
  return res;
}

// Partition + normals + quality gate shared by the public builders.
inline MeshWithInterface finalize_mesh(TriangulationResult res, bool closed,
                                       double min_angle_deg = 20.0) {
  MeshWithInterface out;
  out.mesh = std::move(res.mesh);
  out.interface.vertex_ids = std::move(res.chain_ids);
  out.interface.closed = closed;
  out.mesh.region_labels = partition_subdomains(out.mesh, out.interface);
  out.interface.normals = interface_vertex_normals(out.mesh, out.interface);
  MeshQuality q = mesh_quality(out.mesh);
  if (q.inverted || q.min_angle_deg < min_angle_deg)
    throw std::runtime_error("mesh generation: quality gate failed (min angle " +
                             std::to_string(q.min_angle_deg) + " deg)");
  validate_mesh(out.mesh, &out.interface);
  return out;
}

inline void check_no_self_intersection(const std::vector<Vec2>& poly, bool closed) {
  int nseg = (int)poly.size() - (closed ? 0 : 1);
  for (int i = 0; i < nseg; ++i)
    for (int j = i + 1; j < nseg; ++j)
      if (segments_intersect(poly[i], poly[(i + 1) % poly.size()], poly[j],
                             poly[(j + 1) % poly.size()]))
        throw std::runtime_error("interface polyline is self-intersecting");
}

}  // namespace meshgen

// ---------------------------------------------------------------------------
// Strip domain [x0,x1] x [y0,y1] with an open interface polyline whose
// endpoints lie on the rectangle boundary.
// ---------------------------------------------------------------------------

inline MeshWithInterface build_strip_mesh(double x0, double x1, double y0, double y1,
                                          double h, std::vector<Vec2> polyline,
                                          const MarkerPredicate& marker_pred) {
  if (!(h > 0.0)) throw std::runtime_error("build_strip_mesh: target edge length must be > 0");
  if (!(x1 > x0 && y1 > y0)) throw std::runtime_error("build_strip_mesh: empty rectangle");
  if (polyline.size() < 2) throw std::runtime_error("build_strip_mesh: polyline too short");
  meshgen::check_no_self_intersection(polyline, false);

  double tol = 1e-9 * std::max({x1 - x0, y1 - y0, 1.0});
  auto snap = [&](Vec2& q) {
    bool on = false;
    if (std::abs(q.x - x0) < tol) { q.x = x0; on = true; }
    if (std::abs(q.x - x1) < tol) { q.x = x1; on = true; }
    if (std::abs(q.y - y0) < tol) { q.y = y0; on = true; }
    if (std::abs(q.y - y1) < tol) { q.y = y1; on = true; }
    return on;
  };
  if (!snap(polyline.front()) || !snap(polyline.back()))
    throw std::runtime_error("build_strip_mesh: polyline endpoint not on the rectangle boundary");

  std::vector<Vec2> chain = meshgen::subdivide_polyline(polyline, h, false);

  // Boundary loop, CCW from (x0,y0); interface endpoints are mandatory
  // samples, and the boundary spacing next to them matches the chain's local
  // spacing so the junction fan stays well shaped.
  std::vector<Vec2> mandatory{chain.front(), chain.back()};
  std::vector<double> hint{norm(chain[1] - chain[0]),
                           norm(chain[chain.size() - 1] - chain[chain.size() - 2])};
  auto local_h = [&](Vec2 q) {
    double s = h;
    for (size_t i = 0; i < mandatory.size(); ++i)
      if (norm2(q - mandatory[i]) == 0.0) s = std::min(s, 1.4 * hint[i]);
    return s;
  };
  auto side = [&](Vec2 a, Vec2 b, std::vector<Vec2>& loop) {
    std::vector<Vec2> brk{a};
    for (const Vec2& mq : mandatory) {
      if (norm2(mq - a) == 0.0 || norm2(mq - b) == 0.0) continue;
      if (dist2_point_segment(mq, a, b) < tol * tol) brk.push_back(mq);
    }
    std::sort(brk.begin(), brk.end(), [&](Vec2 u, Vec2 v) {
      return dot(u - a, b - a) < dot(v - a, b - a);
    });
    brk.push_back(b);
    for (size_t s = 0; s + 1 < brk.size(); ++s) {
      double spacing = std::min(local_h(brk[s]), local_h(brk[s + 1]));
      int pieces = std::max(1, (int)std::ceil(norm(brk[s + 1] - brk[s]) / spacing));
      for (int k = 0; k < pieces; ++k)
        loop.push_back(brk[s] + (double(k) / pieces) * (brk[s + 1] - brk[s]));
    }
  };
  std::vector<Vec2> loop;
  side({x0, y0}, {x1, y0}, loop);
  side({x1, y0}, {x1, y1}, loop);
  side({x1, y1}, {x0, y1}, loop);
  side({x0, y1}, {x0, y0}, loop);

  auto res = meshgen::triangulate_domain(loop, chain, false, h, marker_pred);
  return meshgen::finalize_mesh(std::move(res), false);
}

// ---------------------------------------------------------------------------
// Disk domain, optionally with cutouts (used by the plasma configurations).
// ---------------------------------------------------------------------------

struct DiskCutouts {
  std::optional<double> keep_above_y;                 // remove { y < value }
  std::vector<std::pair<Vec2, double>> remove_disks;  // (center, radius)
};

namespace meshgen {

// Boundary loop of (disk minus cutouts) as a CCW polygon sampled at <= h.
// Cut features must not overlap each other inside the disk.
inline std::vector<Vec2> cut_disk_loop(Vec2 c, double r, const DiskCutouts& cuts,
                                       double h,
                                       const std::vector<Vec2>& mandatory,
                                       const std::vector<double>& mandatory_hint = {}) {
  struct Removed {
    double t_in, t_out;            // removed angular interval (t_in -> t_out CCW)
    std::vector<Vec2> connector;   // replacement path from angle(t_in) to angle(t_out)
  };
  auto at = [&](double t) { return c + Vec2{r * std::cos(t), r * std::sin(t)}; };
  auto wrap = [](double t) {
    while (t < 0) t += 2 * M_PI;
    while (t >= 2 * M_PI) t -= 2 * M_PI;
    return t;
  };

  std::vector<Removed> removed;
  if (cuts.keep_above_y.has_value()) {
    double yc = *cuts.keep_above_y;
    double s2 = r * r - (yc - c.y) * (yc - c.y);
    if (s2 > 0) {
      double s = std::sqrt(s2);
      double t1 = wrap(std::atan2(yc - c.y, -s));  // left intersection
      double t2 = wrap(std::atan2(yc - c.y, s));   // right intersection
      // removed arc goes CCW from left point through the bottom to the right
      Removed rm;
      rm.t_in = t1;
      rm.t_out = t2;
      Vec2 a = {c.x - s, yc}, b = {c.x + s, yc};
      int pieces = std::max(1, (int)std::ceil(norm(b - a) / h));
      for (int k = 1; k < pieces; ++k)
        rm.connector.push_back(a + (double(k) / pieces) * (b - a));
      removed.push_back(rm);
    }
  }
  for (auto [q, rho] : cuts.remove_disks) {
    double d = norm(q - c);
    if (d >= r + rho || d + rho <= r) continue;  // disjoint or fully inside
    double a = (d * d + r * r - rho * rho) / (2.0 * d);
    double h2 = r * r - a * a;
    if (h2 <= 0) continue;
    Vec2 dir = normalized(q - c);
    Vec2 base = c + a * dir;
    Vec2 off = std::sqrt(h2) * perp(dir);
    Vec2 p1 = base + off, p2 = base - off;  // p1 CCW-later than p2 w.r.t. q-direction
    double t1 = wrap(std::atan2(p2.y - c.y, p2.x - c.x));
    double t2 = wrap(std::atan2(p1.y - c.y, p1.x - c.x));
    // removed main-circle arc from t1 CCW to t2 passes closest to q; verify.
    double tm = t1 + wrap(t2 - t1) / 2.0;
    if (norm(at(tm) - q) > rho) std::swap(t1, t2);
    Removed rm;
    rm.t_in = t1;
    rm.t_out = t2;
    // connector: arc of the removed circle inside the main disk
    Vec2 pa = at(t1), pb = at(t2);
    double u1 = std::atan2(pa.y - q.y, pa.x - q.x);
    double u2 = std::atan2(pb.y - q.y, pb.x - q.x);
    // choose sweep direction whose midpoint lies inside the main disk
    double sweep = u2 - u1;
    while (sweep > 2 * M_PI) sweep -= 2 * M_PI;
    while (sweep < -2 * M_PI) sweep += 2 * M_PI;
    auto mid_of = [&](double sw) {
      double um = u1 + 0.5 * sw;
      return q + Vec2{rho * std::cos(um), rho * std::sin(um)};
    };
    double alt = sweep > 0 ? sweep - 2 * M_PI : sweep + 2 * M_PI;
    if (norm(mid_of(sweep) - c) > r && norm(mid_of(alt) - c) <= r) sweep = alt;
    int pieces = std::max(1, (int)std::ceil(std::abs(sweep) * rho / h));
    for (int k = 1; k < pieces; ++k) {
      double u = u1 + sweep * (double(k) / pieces);
      rm.connector.push_back(q + Vec2{rho * std::cos(u), rho * std::sin(u)});
    }
    removed.push_back(rm);
  }

  std::sort(removed.begin(), removed.end(),
            [](const Removed& a, const Removed& b) { return a.t_in < b.t_in; });

  std::vector<double> mand_t;
  for (const Vec2& mq : mandatory) mand_t.push_back(wrap(std::atan2(mq.y - c.y, mq.x - c.x)));

  std::vector<Vec2> loop;
  // CCW from ta to tb, excluding the endpoint tb; with exact_start the first
  // sample is placed exactly on the circle (cut junctions must be exact).
  auto arc = [&](double ta, double tb, bool exact_start) {
    double span = wrap(tb - ta);
    if (span == 0.0) span = 2 * M_PI;
    std::vector<double> brk{0.0};
    for (size_t i = 0; i < mand_t.size(); ++i) {
      double rel = wrap(mand_t[i] - ta);
      if (rel > 1e-12 && rel < span - 1e-12) brk.push_back(rel);
    }
    brk.push_back(span);
    std::sort(brk.begin(), brk.end());
    auto local_h = [&](double rel) {
      double s = h;
      for (size_t i = 0; i < mand_t.size() && i < mandatory_hint.size(); ++i)
        if (std::abs(wrap(mand_t[i] - ta) - rel) < 1e-12 ||
            (rel == 0.0 && std::abs(wrap(mand_t[i] - ta)) < 1e-12))
          s = std::min(s, 1.4 * mandatory_hint[i]);
      return s;
    };
    for (size_t s = 0; s + 1 < brk.size(); ++s) {
      double len = (brk[s + 1] - brk[s]) * r;
      double spacing = std::min(local_h(brk[s]), local_h(brk[s + 1]));
      int pieces = std::max(1, (int)std::ceil(len / spacing));
      for (int k = 0; k < pieces; ++k) {
        double rel = brk[s] + (brk[s + 1] - brk[s]) * (double(k) / pieces);
        bool is_exact = exact_start && s == 0 && k == 0;
        Vec2 pt = at(ta + rel);
        for (size_t i = 0; i < mand_t.size(); ++i)
          if (std::abs(wrap(mand_t[i] - ta) - rel) < 1e-12) {
            pt = mandatory[i];
            is_exact = true;
          }
        if (!is_exact) {
          // deterministic radial jitter breaks exact co-circularity
          double jr = 1e-6 * h * hash_unit((std::int64_t)(1e7 * (ta + rel)), 3, 7);
          pt = c + (1.0 + jr / r) * (pt - c);
        }
        loop.push_back(pt);
      }
    }
  };

  if (removed.empty()) {
    arc(0.0, 2 * M_PI, false);
    return loop;
  }
  for (size_t i = 0; i < removed.size(); ++i) {
    const Removed& cur = removed[i];
    const Removed& nxt = removed[(i + 1) % removed.size()];
    loop.push_back(at(cur.t_in));
    for (const Vec2& q : cur.connector) loop.push_back(q);
    arc(cur.t_out, nxt.t_in, true);
  }
  // remove consecutive duplicates introduced at junctions
  std::vector<Vec2> clean;
  for (const Vec2& q : loop)
    if (clean.empty() || norm2(q - clean.back()) > 1e-24) clean.push_back(q);
  if (clean.size() >= 2 && norm2(clean.front() - clean.back()) <= 1e-24)
    clean.pop_back();
  return clean;
}

}  // namespace meshgen

// Closed interface (plasma) or open chord interface (endpoints snapped to the
// circle). All outer boundary vertices default to SigmaPlus.
inline MeshWithInterface build_disk_mesh(
    Vec2 center, double radius, double h, std::vector<Vec2> polyline, bool closed,
    const DiskCutouts& cuts = {},
    const MarkerPredicate& marker_pred = [](Vec2) { return Marker::SigmaPlus; }) {
  if (!(h > 0.0)) throw std::runtime_error("build_disk_mesh: target edge length must be > 0");
  if (polyline.size() < (closed ? 3u : 2u))
    throw std::runtime_error("build_disk_mesh: polyline too short");
  meshgen::check_no_self_intersection(polyline, closed);

  std::vector<Vec2> mandatory;
  if (closed) {
    for (const Vec2& q : polyline)
      if (norm(q - center) >= radius - 0.45 * h)
        throw std::runtime_error("build_disk_mesh: interface touches the domain boundary");
  } else {
    auto snap = [&](Vec2& q) {
      double d = norm(q - center);
      if (std::abs(d - radius) > 1e-6 * radius)
        throw std::runtime_error("build_disk_mesh: open polyline endpoint not on the circle");
      q = center + (radius / d) * (q - center);
    };
    snap(polyline.front());
    snap(polyline.back());
    mandatory = {polyline.front(), polyline.back()};
    for (size_t i = 1; i + 1 < polyline.size(); ++i)
      if (norm(polyline[i] - center) >= radius - 0.45 * h)
        throw std::runtime_error("build_disk_mesh: interior polyline point touches the boundary");
  }

  std::vector<Vec2> chain = meshgen::subdivide_polyline(polyline, h, closed);
  std::vector<double> hints;
  if (!closed)
    hints = {norm(chain[1] - chain[0]),
             norm(chain[chain.size() - 1] - chain[chain.size() - 2])};
  std::vector<Vec2> loop =
      meshgen::cut_disk_loop(center, radius, cuts, h, mandatory, hints);
  if (closed) {
    size_t n = loop.size();
    for (const Vec2& q : chain) {
      double d2min = std::numeric_limits<double>::max();
      for (size_t i = 0, j = n - 1; i < n; j = i++)
        d2min = std::min(d2min, dist2_point_segment(q, loop[j], loop[i]));
      if (!point_in_polygon(q, loop) || d2min < 0.2 * h * h)
        throw std::runtime_error(
            "build_disk_mesh: interface touches or leaves the domain boundary");
    }
  }

  auto res = meshgen::triangulate_domain(loop, chain, closed, h, marker_pred);
  return meshgen::finalize_mesh(std::move(res), closed);
}

}  // namespace fbfem

#pragma once

// Triangulation data model: vertex/triangle tables with boundary markers and
// subdomain labels, the interface curve with per-vertex normals, quality
// metrics, and the subdomain partition by flood fill across interface walls.
//
// Conventions:
//  - triangles are counterclockwise;
//  - interface normals point outward from the plus subdomain (for a closed
//    plasma-style curve this is into the enclosed minus region);
//  - boundary vertices where only a natural (Neumann) condition applies keep
//    the Interior marker.

#include <array>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbfem/geometry.hpp"

namespace fbfem {

enum class Marker : int { Interior = 0, SigmaPlus = 1, SigmaMinus = 2, Gamma = 3 };
enum class Region : int { Plus = 0, Minus = 1 };

struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Marker> boundary_markers;  // per vertex
  std::vector<Region> region_labels;     // per triangle

  int num_vertices() const { return (int)vertices.size(); }
  int num_triangles() const { return (int)triangles.size(); }
};

struct InterfaceCurve {
  std::vector<int> vertex_ids;  // ordered chain of mesh vertex ids
  bool closed = false;
  std::vector<Vec2> normals;  // unit, outward from the plus region

  int size() const { return (int)vertex_ids.size(); }
  int num_edges() const { return closed ? size() : size() - 1; }
  std::pair<int, int> edge(int e) const {
    return {vertex_ids[e], vertex_ids[(e + 1) % size()]};
  }
};

struct MeshQuality {
  double min_angle_deg = 0.0;
  double min_area = 0.0;
  bool inverted = false;
};

inline double triangle_area(const Mesh& m, int t) {
  const auto& tr = m.triangles[t];
  return signed_area(m.vertices[tr[0]], m.vertices[tr[1]], m.vertices[tr[2]]);
}

inline Vec2 triangle_centroid(const Mesh& m, int t) {
  const auto& tr = m.triangles[t];
  return (1.0 / 3.0) *
         (m.vertices[tr[0]] + m.vertices[tr[1]] + m.vertices[tr[2]]);
}

inline MeshQuality mesh_quality(const Mesh& m) {
  MeshQuality q;
  q.min_angle_deg = 180.0;
  q.min_area = std::numeric_limits<double>::max();
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tr = m.triangles[t];
    double a = triangle_area(m, t);
    q.min_area = std::min(q.min_area, a);
    if (a <= 0.0) q.inverted = true;
    q.min_angle_deg = std::min(
        q.min_angle_deg, triangle_min_angle_deg(m.vertices[tr[0]],
                                                m.vertices[tr[1]],
                                                m.vertices[tr[2]]));
  }
  if (m.num_triangles() == 0) {
    q.min_angle_deg = 0.0;
    q.min_area = 0.0;
  }
  return q;
}

namespace detail {
inline std::pair<int, int> edge_key(int a, int b) {
  return a < b ? std::pair{a, b} : std::pair{b, a};
}
}  // namespace detail

// edge -> incident triangle ids (deterministic order).
inline std::map<std::pair<int, int>, std::vector<int>> build_edge_map(const Mesh& m) {
  std::map<std::pair<int, int>, std::vector<int>> em;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tr = m.triangles[t];
    for (int e = 0; e < 3; ++e)
      em[detail::edge_key(tr[e], tr[(e + 1) % 3])].push_back(t);
  }
  return em;
}

// Vertices on the topological boundary (incident to an edge with one triangle).
inline std::vector<bool> boundary_vertex_flags(const Mesh& m) {
  std::vector<bool> onb(m.num_vertices(), false);
  for (const auto& [e, ts] : build_edge_map(m))
    if (ts.size() == 1) {
      onb[e.first] = true;
      onb[e.second] = true;
    }
  return onb;
}

// Edges acting as subdomain walls: exactly the consecutive interface chain
// edges. A separating chain that extends past the moving interface (a jet
// nozzle) is expressed by partitioning with the full chain.
inline std::set<std::pair<int, int>> wall_edges(const Mesh&,
                                                const InterfaceCurve& ic) {
  std::set<std::pair<int, int>> walls;
  for (int e = 0; e < ic.num_edges(); ++e) {
    auto [a, b] = ic.edge(e);
    walls.insert(detail::edge_key(a, b));
  }
  return walls;
}

// Flood-fills the triangle adjacency graph without crossing interface walls
// and labels the component touching SigmaPlus vertices as Plus. Throws if the
// interface fails to split the mesh into exactly two parts.
inline std::vector<Region> partition_subdomains(const Mesh& m,
                                                const InterfaceCurve& ic) {
  int nt = m.num_triangles();
  if (nt == 0) throw std::runtime_error("partition_subdomains: empty mesh");
  auto em = build_edge_map(m);
  auto walls = wall_edges(m, ic);

  std::vector<int> comp(nt, -1);
  int ncomp = 0;
  for (int seed = 0; seed < nt; ++seed) {
    if (comp[seed] >= 0) continue;
    std::vector<int> stack{seed};
    comp[seed] = ncomp;
    while (!stack.empty()) {
      int t = stack.back();
      stack.pop_back();
      const auto& tr = m.triangles[t];
      for (int e = 0; e < 3; ++e) {
        auto key = detail::edge_key(tr[e], tr[(e + 1) % 3]);
        if (walls.count(key)) continue;
        for (int u : em[key])
          if (comp[u] < 0) {
            comp[u] = ncomp;
            stack.push_back(u);
          }
      }
    }
    ++ncomp;
  }
  if (ncomp != 2)
    throw std::runtime_error(
        "partition_subdomains: interface does not separate the domain into "
        "two components (got " + std::to_string(ncomp) + ")");

  // The component seeing SigmaPlus boundary data is the plus region.
  std::array<bool, 2> touches_plus{false, false};
  for (int t = 0; t < nt; ++t)
    for (int v : m.triangles[t])
      if (m.boundary_markers[v] == Marker::SigmaPlus) touches_plus[comp[t]] = true;
  if (touches_plus[0] == touches_plus[1])
    throw std::runtime_error(
        "partition_subdomains: cannot identify the plus component from "
        "SigmaPlus markers");
  int plus_comp = touches_plus[0] ? 0 : 1;

  std::vector<Region> labels(nt);
  for (int t = 0; t < nt; ++t)
    labels[t] = comp[t] == plus_comp ? Region::Plus : Region::Minus;
  return labels;
}

// Per-vertex unit normals: each interface segment gets the normal pointing
// from its plus-side triangle into the minus side; a vertex normal is the
// renormalized mean of its adjacent segment normals.
inline std::vector<Vec2> interface_vertex_normals(const Mesh& m,
                                                  const InterfaceCurve& ic) {
  int n = ic.size();
  if (n < 2) throw std::runtime_error("interface_vertex_normals: degenerate curve");
  auto em = build_edge_map(m);

  std::vector<Vec2> seg_normal(ic.num_edges());
  for (int e = 0; e < ic.num_edges(); ++e) {
    auto [a, b] = ic.edge(e);
    Vec2 pa = m.vertices[a], pb = m.vertices[b];
    if (norm2(pb - pa) == 0.0)
      throw std::runtime_error("interface_vertex_normals: zero-length segment");
    auto it = em.find(detail::edge_key(a, b));
    if (it == em.end() || it->second.size() != 2)
      throw std::runtime_error(
          "interface_vertex_normals: interface edge not shared by two triangles");
    int t_minus = -1;
    for (int t : it->second)
      if (m.region_labels[t] == Region::Minus) t_minus = t;
    if (t_minus < 0)
      throw std::runtime_error(
          "interface_vertex_normals: interface edge lacks a minus-side triangle");
    Vec2 nrm = normalized(perp(pb - pa));
    Vec2 mid = 0.5 * (pa + pb);
    if (dot(nrm, triangle_centroid(m, t_minus) - mid) < 0.0) nrm = -1.0 * nrm;
    seg_normal[e] = nrm;
  }

  std::vector<Vec2> normals(n);
  for (int i = 0; i < n; ++i) {
    Vec2 sum{0, 0};
    if (ic.closed) {
      sum = seg_normal[(i - 1 + n) % n] + seg_normal[i % n];
    } else {
      if (i > 0) sum = sum + seg_normal[i - 1];
      if (i < n - 1) sum = sum + seg_normal[i];
    }
    if (norm(sum) < 1e-8)
      throw std::runtime_error(
          "interface_vertex_normals: adjacent segment normals are antiparallel "
          "(interface self-folding)");
    normals[i] = normalized(sum);
  }
  return normals;
}

// Structural invariants of the data model; throws with a description on the
// first violation.
inline void validate_mesh(const Mesh& m, const InterfaceCurve* ic = nullptr) {
  int nv = m.num_vertices();
  if ((int)m.boundary_markers.size() != nv)
    throw std::runtime_error("validate_mesh: marker table size mismatch");
  if (m.region_labels.size() != m.triangles.size())
    throw std::runtime_error("validate_mesh: region table size mismatch");
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tr = m.triangles[t];
    if (tr[0] == tr[1] || tr[1] == tr[2] || tr[0] == tr[2])
      throw std::runtime_error("validate_mesh: repeated vertex in triangle");
    for (int v : tr)
      if (v < 0 || v >= nv)
        throw std::runtime_error("validate_mesh: vertex index out of range");
    if (triangle_area(m, t) <= 0.0)
      throw std::runtime_error("validate_mesh: non-positive triangle area");
  }
  auto em = build_edge_map(m);
  for (const auto& [e, ts] : em)
    if (ts.size() > 2)
      throw std::runtime_error("validate_mesh: edge shared by more than two triangles");

  std::set<std::pair<int, int>> walls;
  if (ic != nullptr) walls = wall_edges(m, *ic);
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tr = m.triangles[t];
    bool sp = false, sm = false, g = false;
    for (int v : tr) {
      sp |= m.boundary_markers[v] == Marker::SigmaPlus;
      sm |= m.boundary_markers[v] == Marker::SigmaMinus;
      g |= m.boundary_markers[v] == Marker::Gamma;
    }
    if (sp && sm && !g)
      throw std::runtime_error(
          "validate_mesh: triangle touches both SigmaPlus and SigmaMinus "
          "without touching Gamma");
    for (int e = 0; e < 3; ++e) {
      auto key = detail::edge_key(tr[e], tr[(e + 1) % 3]);
      if (walls.count(key) || ic == nullptr) continue;
      for (int u : em[key])
        if (m.region_labels[u] != m.region_labels[t])
          throw std::runtime_error(
              "validate_mesh: label change across a non-interface edge");
    }
  }

  if (ic != nullptr) {
    auto onb = boundary_vertex_flags(m);
    for (int e = 0; e < ic->num_edges(); ++e) {
      auto [a, b] = ic->edge(e);
      if (!em.count(detail::edge_key(a, b)))
        throw std::runtime_error("validate_mesh: interface chain edge missing from mesh");
    }
    for (size_t i = 0; i < ic->normals.size(); ++i)
      if (std::abs(norm(ic->normals[i]) - 1.0) > 1e-12)
        throw std::runtime_error("validate_mesh: interface normal not unit length");
    if (!ic->closed && ic->size() >= 2) {
      for (int end : {ic->vertex_ids.front(), ic->vertex_ids.back()})
        if (m.boundary_markers[end] == Marker::Interior)
          throw std::runtime_error(
              "validate_mesh: open interface endpoint carries Interior marker");
    }
  }
}

}  // namespace fbfem

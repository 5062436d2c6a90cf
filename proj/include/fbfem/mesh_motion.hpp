#pragma once

// Harmonic extension of the interface displacement to the whole mesh and the
// node update. Each displacement component solves the coefficient-weighted
// discrete Laplace problem per subdomain: zero on marked outer vertices,
// the prescribed displacement on the moving interface, fixed zero on other
// Gamma-marked vertices (static zero-level chains), and the natural condition
// on unmarked boundary vertices, whose motion is then projected onto their
// slide line. Connectivity, markers and labels never change.

#include "fbfem/interface_tracking.hpp"

namespace fbfem {

// Vertices allowed to move only along a line direction (jet Neumann top edge).
struct SlideConstraint {
  int vertex = -1;
  Vec2 dir{1.0, 0.0};
};

inline std::vector<Vec2> harmonic_displacement(
    const Mesh& m, const CoefficientFn& a_plus, const CoefficientFn& a_minus,
    const InterfaceCurve& ic, const std::vector<Vec2>& interface_displacement,
    const std::vector<SlideConstraint>& slides = {}, double rel_tol = 1e-10) {
  if ((int)interface_displacement.size() != ic.size())
    throw std::runtime_error("harmonic_displacement: displacement length mismatch");

  std::vector<int> on_interface(m.num_vertices(), -1);
  for (int i = 0; i < ic.size(); ++i) on_interface[ic.vertex_ids[i]] = i;

  std::vector<Vec2> omega(m.num_vertices(), Vec2{0.0, 0.0});
  for (Region region : {Region::Plus, Region::Minus}) {
    const CoefficientFn& a = region == Region::Plus ? a_plus : a_minus;
    SparseOperator A = assemble_stiffness(m, region, a);
    for (int comp = 0; comp < 2; ++comp) {
      std::vector<std::optional<double>> d(m.num_vertices());
      for (int v = 0; v < m.num_vertices(); ++v) {
        if (on_interface[v] >= 0) {
          Vec2 dv = interface_displacement[on_interface[v]];
          d[v] = comp == 0 ? dv.x : dv.y;
        } else if (m.boundary_markers[v] != Marker::Interior) {
          d[v] = 0.0;
        }
      }
      ScalarField w = solve_dirichlet(m, region, A, d, rel_tol);
      for (int v : region_vertices(m, region)) {
        if (comp == 0) omega[v].x = w[v];
        else omega[v].y = w[v];
      }
    }
  }
  for (const SlideConstraint& sc : slides) {
    if (on_interface[sc.vertex] >= 0) continue;  // Dirichlet data wins
    omega[sc.vertex] = dot(omega[sc.vertex], sc.dir) * sc.dir;
  }
  return omega;
}

// New mesh with moved vertices; triangles, markers and labels are inherited.
inline Mesh apply_displacement(const Mesh& m, const std::vector<Vec2>& omega) {
  if ((int)omega.size() != m.num_vertices())
    throw std::runtime_error("apply_displacement: displacement length mismatch");
  Mesh out = m;
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (!std::isfinite(omega[v].x) || !std::isfinite(omega[v].y))
      throw std::runtime_error("apply_displacement: non-finite displacement");
    out.vertices[v] = m.vertices[v] + omega[v];
  }
  return out;
}

struct MotionCheck {
  bool ok = false;
  bool inverted = false;
  double min_angle_deg = 0.0;
  int worst_triangle = -1;
};

// Smart-Laplacian relaxation of unmarked interior vertices plus a targeted
// repair of thin triangles (free apex pulled toward the equilateral position
// over the opposite edge). Connectivity, markers, labels and every marked or
// topological-boundary vertex stay fixed, so interface geometry and boundary
// data are untouched. A move is kept only when the local min angle improves.
inline Mesh relax_interior(const Mesh& m, int passes = 2) {
  Mesh out = m;
  auto onb = boundary_vertex_flags(m);
  std::vector<std::vector<int>> nbr(m.num_vertices()), inc(m.num_vertices());
  for (int t = 0; t < m.num_triangles(); ++t)
    for (int e = 0; e < 3; ++e) {
      int a = m.triangles[t][e], b = m.triangles[t][(e + 1) % 3];
      nbr[a].push_back(b);
      nbr[b].push_back(a);
      inc[a].push_back(t);
    }
  auto local_min_angle = [&](int v) {
    double q = 180.0;
    for (int t : inc[v]) {
      const auto& tr = out.triangles[t];
      if (triangle_area(out, t) <= 0) return -1.0;
      q = std::min(q, triangle_min_angle_deg(out.vertices[tr[0]],
                                             out.vertices[tr[1]],
                                             out.vertices[tr[2]]));
    }
    return q;
  };
  auto try_move = [&](int v, Vec2 cand) {
    double before = local_min_angle(v);
    Vec2 old = out.vertices[v];
    out.vertices[v] = cand;
    double after = local_min_angle(v);
    if (after <= before) {
      out.vertices[v] = old;
      return false;
    }
    return true;
  };
  for (int pass = 0; pass < passes; ++pass) {
    for (int v = 0; v < m.num_vertices(); ++v) {
      if (m.boundary_markers[v] != Marker::Interior || onb[v] || nbr[v].empty())
        continue;
      Vec2 avg{0, 0};
      for (int u : nbr[v]) avg = avg + out.vertices[u];
      try_move(v, (1.0 / (double)nbr[v].size()) * avg);
    }
    // targeted pass over thin triangles
    for (int t = 0; t < m.num_triangles(); ++t) {
      const auto& tr = out.triangles[t];
      double a = triangle_min_angle_deg(out.vertices[tr[0]], out.vertices[tr[1]],
                                        out.vertices[tr[2]]);
      if (a >= 25.0) continue;
      for (int pivot = 0; pivot < 3; ++pivot) {
        int v = tr[pivot];
        if (m.boundary_markers[v] != Marker::Interior || onb[v]) continue;
        Vec2 e0 = out.vertices[tr[(pivot + 1) % 3]];
        Vec2 e1 = out.vertices[tr[(pivot + 2) % 3]];
        Vec2 mid = 0.5 * (e0 + e1);
        Vec2 n = perp(e1 - e0);
        if (dot(n, out.vertices[v] - mid) < 0) n = -n;
        for (double w : {1.0, 0.5, 0.25})
          if (try_move(v, out.vertices[v] +
                              w * (mid + (std::sqrt(3.0) / 2.0) * n -
                                   out.vertices[v])))
            break;
      }
    }
  }
  return out;
}

// Moves the interface chain to prescribed new positions and carries the
// interior along by a harmonic solve assembled on the current (valid) mesh;
// every other marked or topological-boundary vertex stays fixed.
inline Mesh shift_interface(const Mesh& m, const InterfaceCurve& ic,
                            const std::vector<Vec2>& new_positions,
                            double rel_tol = 1e-10) {
  if ((int)new_positions.size() != ic.size())
    throw std::runtime_error("shift_interface: position count mismatch");
  Mesh out = m;
  auto onb = boundary_vertex_flags(m);
  std::vector<int> on_interface(m.num_vertices(), -1);
  for (int i = 0; i < ic.size(); ++i) on_interface[ic.vertex_ids[i]] = i;
  for (Region region : {Region::Plus, Region::Minus}) {
    SparseOperator A = assemble_stiffness(m, region, constant_coefficient(1.0));
    for (int comp = 0; comp < 2; ++comp) {
      std::vector<std::optional<double>> d(m.num_vertices());
      for (int v = 0; v < m.num_vertices(); ++v) {
        if (on_interface[v] >= 0) {
          Vec2 q = new_positions[on_interface[v]] - m.vertices[v];
          d[v] = comp == 0 ? q.x : q.y;
        } else if (m.boundary_markers[v] != Marker::Interior || onb[v]) {
          d[v] = 0.0;
        }
      }
      ScalarField w = solve_dirichlet(m, region, A, d, rel_tol);
      for (int v : region_vertices(m, region)) {
        if (comp == 0) out.vertices[v].x = m.vertices[v].x + w[v];
        else out.vertices[v].y = m.vertices[v].y + w[v];
      }
    }
  }
  return out;
}

// Global rebalancing: every unmarked interior vertex is repositioned by a
// per-subdomain harmonic solve for the coordinate fields, with marked and
// topological-boundary vertices pinned at their current positions.
// Connectivity is untouched. Complements relax_interior when accumulated
// interface travel leaves a strongly uneven vertex density.
inline Mesh harmonic_reposition(const Mesh& m, double rel_tol = 1e-10) {
  Mesh out = m;
  auto onb = boundary_vertex_flags(m);
  for (Region region : {Region::Plus, Region::Minus}) {
    SparseOperator A = assemble_stiffness(m, region, constant_coefficient(1.0));
    for (int comp = 0; comp < 2; ++comp) {
      std::vector<std::optional<double>> d(m.num_vertices());
      for (int v = 0; v < m.num_vertices(); ++v)
        if (m.boundary_markers[v] != Marker::Interior || onb[v])
          d[v] = comp == 0 ? m.vertices[v].x : m.vertices[v].y;
      ScalarField w = solve_dirichlet(m, region, A, d, rel_tol);
      for (int v : region_vertices(m, region)) {
        if (m.boundary_markers[v] != Marker::Interior || onb[v]) continue;
        if (comp == 0) out.vertices[v].x = w[v];
        else out.vertices[v].y = w[v];
      }
    }
  }
  return out;
}

// Equal-arc-length positions along the current interface polyline (endpoints
// and, for closed curves, the first vertex stay anchored). The discrete curve
// as a point set is preserved; only its parametrization by mesh vertices
// changes. Used as a repair when normal-direction motion has bunched the
// interface vertices tangentially.
inline std::vector<Vec2> redistribute_interface(const Mesh& m,
                                                const InterfaceCurve& ic) {
  int n = ic.size();
  std::vector<Vec2> p(n);
  for (int i = 0; i < n; ++i) p[i] = m.vertices[ic.vertex_ids[i]];
  if (n < 3) return p;
  int ne = ic.num_edges();
  std::vector<double> cum(ne + 1, 0.0);
  for (int e = 0; e < ne; ++e) cum[e + 1] = cum[e] + norm(p[(e + 1) % n] - p[e]);
  double total = cum[ne];
  if (total <= 0.0) return p;
  auto at_arc = [&](double s) {
    int e = 0;
    while (e + 1 < ne && cum[e + 1] < s) ++e;
    double seg = cum[e + 1] - cum[e];
    double t = seg > 0.0 ? (s - cum[e]) / seg : 0.0;
    return p[e] + t * (p[(e + 1) % n] - p[e]);
  };
  std::vector<Vec2> out = p;
  if (ic.closed) {
    for (int k = 1; k < n; ++k) out[k] = at_arc(total * k / n);
  } else {
    for (int k = 1; k + 1 < n; ++k) out[k] = at_arc(total * k / (n - 1));
  }
  return out;
}

inline MotionCheck validate_motion(const Mesh& old_mesh, const Mesh& new_mesh,
                                   double min_angle_floor_deg = 5.0) {
  if (old_mesh.triangles != new_mesh.triangles)
    throw std::runtime_error("validate_motion: connectivity changed");
  MotionCheck r;
  r.min_angle_deg = 180.0;
  for (int t = 0; t < new_mesh.num_triangles(); ++t) {
    double area = triangle_area(new_mesh, t);
    const auto& tr = new_mesh.triangles[t];
    double ang = triangle_min_angle_deg(new_mesh.vertices[tr[0]],
                                        new_mesh.vertices[tr[1]],
                                        new_mesh.vertices[tr[2]]);
    if (area <= 0.0) {
      r.inverted = true;
      r.worst_triangle = t;
    }
    if (ang < r.min_angle_deg) {
      r.min_angle_deg = ang;
      if (ang < min_angle_floor_deg && r.worst_triangle < 0) r.worst_triangle = t;
    }
  }
  r.ok = !r.inverted && r.min_angle_deg >= min_angle_floor_deg;
  return r;
}

}  // namespace fbfem

#pragma once

// P1 finite element core on triangle meshes: stiffness with spatially varying
// coefficient, consistent mass, Dirichlet subdomain solves against the full
// Neumann operator, and the smallest generalized eigenpair by inverse power
// iteration with CG inner solves.
//
// Operators are indexed by global vertex ids; rows of vertices outside the
// assembled region are empty, which keeps subdomain fields and interface-row
// residuals trivially composable.

#include <functional>
#include <optional>

#include "fbfem/mesh.hpp"
#include "fbfem/sparse.hpp"

namespace fbfem {

using CoefficientFn = std::function<double(Vec2)>;
using ScalarField = std::vector<double>;  // one value per mesh vertex

inline CoefficientFn constant_coefficient(double c) {
  return [c](Vec2) { return c; };
}

namespace detail {
// Constant gradients of the three hat functions on a triangle.
inline std::array<Vec2, 3> p1_gradients(Vec2 a, Vec2 b, Vec2 c, double area) {
  double f = 1.0 / (2.0 * area);
  return {Vec2{f * (b.y - c.y), f * (c.x - b.x)},
          Vec2{f * (c.y - a.y), f * (a.x - c.x)},
          Vec2{f * (a.y - b.y), f * (b.x - a.x)}};
}
}  // namespace detail

// Neumann stiffness over one region: a_ij = sum_T a(centroid_T) grad_i.grad_j |T|.
// The coefficient is sampled at triangle centroids, which is exact for
// coefficients that are constant per subdomain.
inline SparseOperator assemble_stiffness(const Mesh& m, Region region,
                                         const CoefficientFn& a) {
  std::vector<Triplet> ts;
  bool any = false;
  for (int t = 0; t < m.num_triangles(); ++t) {
    if (m.region_labels[t] != region) continue;
    any = true;
    const auto& tr = m.triangles[t];
    Vec2 pa = m.vertices[tr[0]], pb = m.vertices[tr[1]], pc = m.vertices[tr[2]];
    double area = signed_area(pa, pb, pc);
    double coef = a(triangle_centroid(m, t));
    if (coef <= 0.0)
      throw std::runtime_error("assemble_stiffness: non-positive coefficient at centroid");
    auto g = detail::p1_gradients(pa, pb, pc, area);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        ts.push_back({tr[i], tr[j], coef * dot(g[i], g[j]) * area});
  }
  if (!any) throw std::runtime_error("assemble_stiffness: region has no triangles");
  return SparseOperator::from_triplets(m.num_vertices(), std::move(ts));
}

// Consistent P1 mass over one region: element block (|T|/12) [[2,1,1],[1,2,1],[1,1,2]].
inline SparseOperator assemble_mass(const Mesh& m, Region region) {
  std::vector<Triplet> ts;
  bool any = false;
  for (int t = 0; t < m.num_triangles(); ++t) {
    if (m.region_labels[t] != region) continue;
    any = true;
    const auto& tr = m.triangles[t];
    double area = triangle_area(m, t);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        ts.push_back({tr[i], tr[j], area / 12.0 * (i == j ? 2.0 : 1.0)});
  }
  if (!any) throw std::runtime_error("assemble_mass: region has no triangles");
  return SparseOperator::from_triplets(m.num_vertices(), std::move(ts));
}

// Vertices incident to at least one triangle of the region, ascending.
inline std::vector<int> region_vertices(const Mesh& m, Region region) {
  std::vector<bool> in(m.num_vertices(), false);
  for (int t = 0; t < m.num_triangles(); ++t)
    if (m.region_labels[t] == region)
      for (int v : m.triangles[t]) in[v] = true;
  std::vector<int> ids;
  for (int v = 0; v < m.num_vertices(); ++v)
    if (in[v]) ids.push_back(v);
  return ids;
}

// Solves A u = 0 on the region with the given nodal Dirichlet values imposed
// exactly; `neumann_op` must be the Neumann stiffness of the same region.
// Vertices of the region without a Dirichlet entry are free unknowns.
inline ScalarField solve_dirichlet(const Mesh& m, Region region,
                                   const SparseOperator& neumann_op,
                                   const std::vector<std::optional<double>>& dirichlet,
                                   double rel_tol = 1e-10) {
  auto verts = region_vertices(m, region);
  std::vector<int> free_ids;
  ScalarField u(m.num_vertices(), 0.0);
  bool any_fixed = false;
  for (int v : verts) {
    if (dirichlet[v].has_value()) {
      u[v] = *dirichlet[v];
      any_fixed = true;
    } else {
      free_ids.push_back(v);
    }
  }
  if (!any_fixed)
    throw std::runtime_error("solve_dirichlet: singular system (no Dirichlet vertex)");
  if (free_ids.empty()) return u;

  // rhs_f = -(A u_c)|_free with u zero on the free set.
  std::vector<double> au = neumann_op.matvec(u);
  std::vector<double> rhs(free_ids.size());
  for (size_t k = 0; k < free_ids.size(); ++k) rhs[k] = -au[free_ids[k]];

  SparseOperator aff = neumann_op.submatrix(free_ids);
  CgResult cg = cg_solve(aff, rhs, rel_tol);
  if (!cg.converged)
    throw std::runtime_error("solve_dirichlet: CG did not converge (residual " +
                             std::to_string(cg.rel_residual) + ")");
  for (size_t k = 0; k < free_ids.size(); ++k) u[free_ids[k]] = cg.x[k];
  return u;
}

inline ScalarField solve_dirichlet(const Mesh& m, Region region,
                                   const CoefficientFn& a,
                                   const std::vector<std::optional<double>>& dirichlet,
                                   double rel_tol = 1e-10) {
  return solve_dirichlet(m, region, assemble_stiffness(m, region, a), dirichlet,
                         rel_tol);
}

struct EigResult {
  double beta = 0.0;
  std::vector<double> vec;  // M-normalized, nonpositive orientation
  int iterations = 0;
  double residual = 0.0;        // ||K v - beta M v|| / ||K v||
  bool degenerate_gap = false;  // smallest eigenvalue nearly multiple
};

struct EigOptions {
  double rel_tol = 1e-10;
  int max_iterations = 500;
  bool check_gap = false;
  const std::vector<double>* warm_start = nullptr;
};

// Smallest eigenpair of K v = beta M v for SPD K, M (already Dirichlet
// eliminated). Inverse power iteration; every K-solve is CG. The returned
// vector satisfies v'Mv = 1 and sum(v) <= 0.
inline EigResult smallest_generalized_eig(const SparseOperator& K,
                                          const SparseOperator& M,
                                          EigOptions opt = {}) {
  int n = K.dim;
  if (M.dim != n) throw std::runtime_error("smallest_generalized_eig: dim mismatch");
  std::vector<double> v(n, 1.0);
  if (opt.warm_start && (int)opt.warm_start->size() == n) v = *opt.warm_start;

  auto m_norm = [&](const std::vector<double>& x) {
    auto mx = M.matvec(x);
    double s = std::inner_product(x.begin(), x.end(), mx.begin(), 0.0);
    return std::sqrt(std::max(s, 0.0));
  };
  double nv = m_norm(v);
  if (nv == 0.0) {
    v.assign(n, 1.0);
    nv = m_norm(v);
  }
  for (double& x : v) x /= nv;

  EigResult res;
  double beta_prev = 0.0;
  bool converged = false;
  for (int it = 0; it < opt.max_iterations; ++it) {
    std::vector<double> mv = M.matvec(v);
    CgResult sol = cg_solve(K, mv, 1e-12, -1, &v);
    if (!sol.converged)
      throw std::runtime_error("smallest_generalized_eig: inner CG failed");
    double nn = m_norm(sol.x);
    if (nn == 0.0) throw std::runtime_error("smallest_generalized_eig: breakdown");
    for (double& x : sol.x) x /= nn;
    v = sol.x;

    std::vector<double> kv = K.matvec(v);
    mv = M.matvec(v);
    double vkv = std::inner_product(v.begin(), v.end(), kv.begin(), 0.0);
    double vmv = std::inner_product(v.begin(), v.end(), mv.begin(), 0.0);
    double beta = vkv / vmv;

    double rnum = 0.0, rden = 0.0;
    for (int i = 0; i < n; ++i) {
      double r = kv[i] - beta * mv[i];
      rnum += r * r;
      rden += kv[i] * kv[i];
    }
    res.residual = std::sqrt(rnum / std::max(rden, 1e-300));
    res.iterations = it + 1;
    res.beta = beta;
    if (it > 0 && std::abs(beta - beta_prev) <= opt.rel_tol * std::abs(beta) &&
        res.residual <= 1e-8) {
      converged = true;
      break;
    }
    beta_prev = beta;
  }
  if (!converged)
    throw std::runtime_error(
        "smallest_generalized_eig: no convergence in " +
        std::to_string(opt.max_iterations) + " iterations (residual " +
        std::to_string(res.residual) + ")");

  double sum = std::accumulate(v.begin(), v.end(), 0.0);
  if (sum > 0.0)
    for (double& x : v) x = -x;
  res.vec = v;

  if (opt.check_gap && n >= 2) {
    // Rough second eigenvalue from a few deflated inverse iterations.
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = (i % 2 == 0) ? 1.0 : -1.0;
    auto deflate = [&](std::vector<double>& x) {
      auto mx = M.matvec(res.vec);
      double c = std::inner_product(x.begin(), x.end(), mx.begin(), 0.0);
      for (int i = 0; i < n; ++i) x[i] -= c * res.vec[i];
    };
    deflate(w);
    double nw = m_norm(w);
    if (nw > 0) {
      for (double& x : w) x /= nw;
      double beta2 = res.beta;
      for (int it = 0; it < 8; ++it) {
        auto mw = M.matvec(w);
        CgResult sol = cg_solve(K, mw, 1e-12, -1, &w);
        deflate(sol.x);
        double s = m_norm(sol.x);
        if (s == 0) break;
        for (double& x : sol.x) x /= s;
        w = sol.x;
        auto kw = K.matvec(w);
        auto mw2 = M.matvec(w);
        beta2 = std::inner_product(w.begin(), w.end(), kw.begin(), 0.0) /
                std::inner_product(w.begin(), w.end(), mw2.begin(), 0.0);
      }
      res.degenerate_gap = (beta2 - res.beta) < 1e-8 * std::abs(res.beta);
    }
  }
  return res;
}

}  // namespace fbfem

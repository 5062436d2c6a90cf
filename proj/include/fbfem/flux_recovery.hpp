#pragma once

// Variational recovery of the interface normal flux. The weak residual of the
// region's Neumann operator at the interface rows,
//   mu_i = (A u)_i = int_region a grad(u) . grad(phi_i) dx,
// equals the boundary flux integral of the hat function phi_i, so the
// piecewise linear flux trace alpha solves (Q + eps D) alpha = mu with Q the
// coefficient-weighted interface mass matrix and D the 1D curve stiffness.
// All interface rows are taken from the operator, including contributions of
// blocks adjacent to the outer boundary.

#include "fbfem/fem.hpp"

namespace fbfem {

using InterfaceTrace = std::vector<double>;  // one value per interface vertex

// (A u) restricted to the interface rows; A is the region's Neumann operator
// and u the solved field of that region.
inline InterfaceTrace interface_residual(const SparseOperator& neumann_op,
                                         const ScalarField& field,
                                         const InterfaceCurve& ic) {
  if ((int)field.size() != neumann_op.dim)
    throw std::runtime_error("interface_residual: field/operator dimension mismatch");
  InterfaceTrace mu(ic.size());
  for (int i = 0; i < ic.size(); ++i)
    mu[i] = neumann_op.row_dot(ic.vertex_ids[i], field);
  return mu;
}

// Interface mass matrix q_ij = int_Gamma (eta' a eta) phi_i phi_j ds with the
// coefficient taken one-sided: for each interface edge, a is evaluated at the
// centroid of its adjacent triangle on the recovery side. For isotropic
// scalar a the normal factors drop out. Indexed by interface vertex position.
inline SparseOperator assemble_interface_mass(const Mesh& m, const InterfaceCurve& ic,
                                              const CoefficientFn& a, Region side) {
  auto em = build_edge_map(m);
  std::vector<Triplet> ts;
  int n = ic.size();
  for (int e = 0; e < ic.num_edges(); ++e) {
    auto [va, vb] = ic.edge(e);
    double len = norm(m.vertices[vb] - m.vertices[va]);
    if (len == 0.0) throw std::runtime_error("assemble_interface_mass: zero-length edge");
    auto it = em.find(detail::edge_key(va, vb));
    if (it == em.end())
      throw std::runtime_error("assemble_interface_mass: edge missing from mesh");
    int side_tri = -1;
    for (int t : it->second)
      if (m.region_labels[t] == side) side_tri = t;
    if (side_tri < 0)
      throw std::runtime_error("assemble_interface_mass: no adjacent triangle on the recovery side");
    double coef = a(triangle_centroid(m, side_tri));
    int i = e, j = (e + 1) % n;
    double w = coef * len / 6.0;
    ts.push_back({i, i, 2.0 * w});
    ts.push_back({i, j, w});
    ts.push_back({j, i, w});
    ts.push_back({j, j, 2.0 * w});
  }
  return SparseOperator::from_triplets(n, std::move(ts));
}

// 1D P1 stiffness along the curve (graph Laplacian weighted by 1/edge length).
inline SparseOperator assemble_interface_diffusion(const Mesh& m,
                                                   const InterfaceCurve& ic) {
  if (ic.size() < 2)
    throw std::runtime_error("assemble_interface_diffusion: need >= 2 vertices");
  std::vector<Triplet> ts;
  int n = ic.size();
  for (int e = 0; e < ic.num_edges(); ++e) {
    auto [va, vb] = ic.edge(e);
    double len = norm(m.vertices[vb] - m.vertices[va]);
    if (len == 0.0)
      throw std::runtime_error("assemble_interface_diffusion: zero-length edge");
    double w = 1.0 / len;
    int i = e, j = (e + 1) % n;
    ts.push_back({i, i, w});
    ts.push_back({i, j, -w});
    ts.push_back({j, i, -w});
    ts.push_back({j, j, w});
  }
  return SparseOperator::from_triplets(n, std::move(ts));
}

// Solves (Q + eps D) alpha = mu. The result is the outward normal derivative
// with respect to the recovery side's region.
inline InterfaceTrace recover_flux(const SparseOperator& Q, const InterfaceTrace& mu,
                                   double epsilon = 0.0,
                                   const SparseOperator* D = nullptr) {
  const SparseOperator* sys = &Q;
  SparseOperator combined;
  if (epsilon != 0.0) {
    if (D == nullptr)
      throw std::runtime_error("recover_flux: regularization requested without D");
    std::vector<Triplet> ts;
    for (int i = 0; i < Q.dim; ++i) {
      for (int k = Q.row_ptr[i]; k < Q.row_ptr[i + 1]; ++k)
        ts.push_back({i, Q.col[k], Q.val[k]});
      for (int k = D->row_ptr[i]; k < D->row_ptr[i + 1]; ++k)
        ts.push_back({i, D->col[k], epsilon * D->val[k]});
    }
    combined = SparseOperator::from_triplets(Q.dim, std::move(ts));
    sys = &combined;
  }
  CgResult cg = cg_solve(*sys, mu, 1e-12, 20 * Q.dim + 200);
  if (!cg.converged)
    throw std::runtime_error("recover_flux: solver failed (residual " +
                             std::to_string(cg.rel_residual) + ")");
  return cg.x;
}

}  // namespace fbfem

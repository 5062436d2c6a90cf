#pragma once

// Shared test fixtures: small hand-built meshes independent of the mesh
// generator, so FEM-layer oracles do not depend on the generation path.

#include <cmath>

#include "fbfem/mesh.hpp"

namespace fbfem::testutil {

// Single unit right triangle (0,0),(1,0),(0,1), labeled Plus.
inline Mesh unit_right_triangle() {
  Mesh m;
  m.vertices = {{0, 0}, {1, 0}, {0, 1}};
  m.triangles = {{0, 1, 2}};
  m.boundary_markers = {Marker::SigmaPlus, Marker::SigmaPlus, Marker::SigmaPlus};
  m.region_labels = {Region::Plus};
  return m;
}

// Two-triangle unit square (0,0),(1,0),(1,1),(0,1), both triangles Plus.
inline Mesh unit_square_two_triangles() {
  Mesh m;
  m.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  m.boundary_markers.assign(4, Marker::SigmaPlus);
  m.region_labels = {Region::Plus, Region::Plus};
  return m;
}

// Structured n x n unit-square grid split into 2n^2 triangles. Boundary
// vertices are marked SigmaPlus, all triangles labeled Plus.
inline Mesh structured_square(int n) {
  Mesh m;
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      m.vertices.push_back({(double)i / n, (double)j / n});
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  m.boundary_markers.assign(m.num_vertices(), Marker::Interior);
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      if (i == 0 || j == 0 || i == n || j == n)
        m.boundary_markers[id(i, j)] = Marker::SigmaPlus;
  m.region_labels.assign(m.num_triangles(), Region::Plus);
  return m;
}

struct MeshAndInterface {
  Mesh mesh;
  InterfaceCurve interface;
};

// Structured strip on [0,1]^2 with a vertical interface on grid line k.
// Left region Minus, right Plus; normals outward from Plus (=-x).

inline MeshAndInterface structured_split_square(int n, int k) {
  Mesh m = structured_square(n);
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  double xs = (double)k / n;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      if (m.boundary_markers[id(i, j)] == Marker::Interior) continue;
      m.boundary_markers[id(i, j)] =
          m.vertices[id(i, j)].x > xs ? Marker::SigmaPlus : Marker::SigmaMinus;
    }
  for (int j = 0; j <= n; ++j) m.boundary_markers[id(k, j)] = Marker::Gamma;
  for (int t = 0; t < m.num_triangles(); ++t)
    m.region_labels[t] =
        triangle_centroid(m, t).x > xs ? Region::Plus : Region::Minus;

  InterfaceCurve ic;
  for (int j = 0; j <= n; ++j) ic.vertex_ids.push_back(id(k, j));
  ic.closed = false;
  ic.normals.assign(n + 1, Vec2{-1.0, 0.0});
  return {m, ic};
}

}  // namespace fbfem::testutil

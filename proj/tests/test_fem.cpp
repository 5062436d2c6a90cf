#include <catch2/catch_amalgamated.hpp>

#include "fbfem/fem.hpp"
#include "fbfem/meshgen.hpp"
#include "helpers.hpp"

using namespace fbfem;
using Catch::Approx;

namespace {
std::vector<std::optional<double>> dirichlet_from(
    const Mesh& m, const std::function<double(Vec2)>& g) {
  std::vector<std::optional<double>> d(m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v)
    if (m.boundary_markers[v] != Marker::Interior) d[v] = g(m.vertices[v]);
  return d;
}
}  // namespace

TEST_CASE("element stiffness of the unit right triangle", "[fem]") {
  // hand integration of P1 gradients: K = 1/2 [[2,-1,-1],[-1,1,0],[-1,0,1]]
  Mesh m = testutil::unit_right_triangle();
  auto K = assemble_stiffness(m, Region::Plus, constant_coefficient(1.0));
  double expect[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(K.entry(i, j) == Approx(expect[i][j]).margin(1e-14));
  CHECK(K.is_symmetric());
}

TEST_CASE("stiffness scales linearly in the coefficient", "[fem]") {
  Mesh m = testutil::unit_right_triangle();
  auto K1 = assemble_stiffness(m, Region::Plus, constant_coefficient(1.0));
  auto K100 = assemble_stiffness(m, Region::Plus, constant_coefficient(100.0));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(K100.entry(i, j) == Approx(100.0 * K1.entry(i, j)).margin(1e-12));
}

TEST_CASE("two-triangle square stiffness assembled by hand", "[fem]") {
  Mesh m = testutil::unit_square_two_triangles();
  auto K = assemble_stiffness(m, Region::Plus, constant_coefficient(1.0));
  double expect[4][4] = {{1.0, -0.5, 0.0, -0.5},
                         {-0.5, 1.0, -0.5, 0.0},
                         {0.0, -0.5, 1.0, -0.5},
                         {-0.5, 0.0, -0.5, 1.0}};
  for (int i = 0; i < 4; ++i) {
    double rowsum = 0.0;
    for (int j = 0; j < 4; ++j) {
      CHECK(K.entry(i, j) == Approx(expect[i][j]).margin(1e-14));
      rowsum += K.entry(i, j);
    }
    CHECK(rowsum == Approx(0.0).margin(1e-12));  // constants in the kernel
  }
}

TEST_CASE("stiffness row sums vanish on unstructured meshes", "[fem]") {
  Mesh m = testutil::structured_square(5);
  auto K = assemble_stiffness(m, Region::Plus, constant_coefficient(3.0));
  for (int i = 0; i < K.dim; ++i) {
    double s = 0.0;
    for (int k = K.row_ptr[i]; k < K.row_ptr[i + 1]; ++k) s += K.val[k];
    CHECK(s == Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("non-positive coefficient rejected", "[fem]") {
  Mesh m = testutil::unit_right_triangle();
  CHECK_THROWS(assemble_stiffness(m, Region::Plus, constant_coefficient(-1.0)));
}

TEST_CASE("element mass of the unit right triangle", "[fem]") {
  Mesh m = testutil::unit_right_triangle();
  auto M = assemble_mass(m, Region::Plus);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(M.entry(i, j) == Approx((i == j ? 2.0 : 1.0) / 24.0).margin(1e-15));
}

TEST_CASE("mass entries sum to the region area", "[fem]") {
  Mesh m = testutil::structured_square(4);
  auto M = assemble_mass(m, Region::Plus);
  double total = 0.0;
  for (double v : M.val) total += v;
  CHECK(total == Approx(1.0).epsilon(1e-12));

  // constant field: u' M u = c^2 * area
  std::vector<double> u(M.dim, 3.0);
  auto mu = M.matvec(u);
  CHECK(std::inner_product(u.begin(), u.end(), mu.begin(), 0.0) ==
        Approx(9.0).epsilon(1e-12));
}

TEST_CASE("Dirichlet solve reproduces linear data exactly", "[fem]") {
  Mesh m = testutil::structured_square(6);
  auto g = [](Vec2 p) { return p.x; };
  auto u = solve_dirichlet(m, Region::Plus, constant_coefficient(1.0),
                           dirichlet_from(m, g));
  for (int v = 0; v < m.num_vertices(); ++v)
    CHECK(u[v] == Approx(m.vertices[v].x).margin(1e-10));
}

TEST_CASE("zero boundary data gives the zero field", "[fem]") {
  Mesh m = testutil::structured_square(5);
  auto u = solve_dirichlet(m, Region::Plus, constant_coefficient(1.0),
                           dirichlet_from(m, [](Vec2) { return 0.0; }));
  for (double x : u) CHECK(x == Approx(0.0).margin(1e-12));
}

TEST_CASE("minus-side 1D harmonic profile", "[fem]") {
  // left half strip, g=-1 at x=0, 0 on the interface at x=0.5 -> u = 2(x-0.5)
  auto [m, ic] = testutil::structured_split_square(8, 4);
  std::vector<std::optional<double>> d(m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (m.boundary_markers[v] == Marker::Gamma) d[v] = 0.0;
    else if (m.boundary_markers[v] == Marker::SigmaMinus)
      d[v] = 2.0 * (m.vertices[v].x - 0.5);
  }
  auto u = solve_dirichlet(m, Region::Minus, constant_coefficient(1.0), d);
  for (int v : region_vertices(m, Region::Minus))
    CHECK(u[v] == Approx(2.0 * (m.vertices[v].x - 0.5)).margin(1e-10));
}

TEST_CASE("no Dirichlet vertex at all is singular", "[fem]") {
  Mesh m = testutil::structured_square(3);
  std::vector<std::optional<double>> d(m.num_vertices());  // all free
  CHECK_THROWS(solve_dirichlet(m, Region::Plus, constant_coefficient(1.0), d));
}

TEST_CASE("Galerkin orthogonality of the solved field", "[fem]") {
  Mesh m = testutil::structured_square(6);
  auto g = [](Vec2 p) { return std::sin(p.x) + p.y * p.x; };
  auto K = assemble_stiffness(m, Region::Plus, constant_coefficient(2.0));
  auto u = solve_dirichlet(m, Region::Plus, K, dirichlet_from(m, g));
  auto ku = K.matvec(u);
  for (int v = 0; v < m.num_vertices(); ++v)
    if (m.boundary_markers[v] == Marker::Interior)
      CHECK(std::abs(ku[v]) < 1e-9);
}

TEST_CASE("smallest eigenvalue of the unit square approaches 2 pi^2", "[fem][eig]") {
  double exact = 2.0 * M_PI * M_PI;
  std::vector<double> errs;
  for (int n : {8, 16, 32}) {
    Mesh m = testutil::structured_square(n);
    std::vector<int> free_ids;
    for (int v = 0; v < m.num_vertices(); ++v)
      if (m.boundary_markers[v] == Marker::Interior) free_ids.push_back(v);
    auto K = assemble_stiffness(m, Region::Plus, constant_coefficient(1.0))
                 .submatrix(free_ids);
    auto M = assemble_mass(m, Region::Plus).submatrix(free_ids);
    auto eig = smallest_generalized_eig(K, M);
    errs.push_back(eig.beta - exact);
    CHECK(eig.beta > exact);  // Rayleigh quotient bounds from above
    // normalization and sign convention
    auto mv = M.matvec(eig.vec);
    CHECK(std::inner_product(eig.vec.begin(), eig.vec.end(), mv.begin(), 0.0) ==
          Approx(1.0).margin(1e-10));
    CHECK(*std::max_element(eig.vec.begin(), eig.vec.end()) <= 1e-12);
    CHECK(eig.residual <= 1e-8);
  }
  double order = std::log2(errs[0] / errs[1]);
  double order2 = std::log2(errs[1] / errs[2]);
  CHECK(order >= 1.8);
  CHECK(order2 >= 1.8);
}

TEST_CASE("smallest eigenvalue of the unit disk approaches j01^2", "[fem][eig]") {
  double j01 = 2.404825557695773;
  std::vector<Vec2> dummy;  // closed interface far inside; not used for eigen
  int n = 24;
  for (int i = 0; i < n; ++i) {
    double t = 2 * M_PI * i / n;
    dummy.push_back({0.3 * std::cos(t), 0.3 * std::sin(t)});
  }
  auto mi = build_disk_mesh({0, 0}, 1.0, 0.07, dummy, true);
  // eigenproblem on the whole disk: treat both regions as one by collecting
  // all interior vertices
  const Mesh& m = mi.mesh;
  auto Kp = assemble_stiffness(m, Region::Plus, constant_coefficient(1.0));
  auto Km = assemble_stiffness(m, Region::Minus, constant_coefficient(1.0));
  auto Mp = assemble_mass(m, Region::Plus);
  auto Mm = assemble_mass(m, Region::Minus);
  std::vector<Triplet> kts, mts;
  for (int i = 0; i < m.num_vertices(); ++i) {
    for (int k = Kp.row_ptr[i]; k < Kp.row_ptr[i + 1]; ++k)
      kts.push_back({i, Kp.col[k], Kp.val[k]});
    for (int k = Km.row_ptr[i]; k < Km.row_ptr[i + 1]; ++k)
      kts.push_back({i, Km.col[k], Km.val[k]});
    for (int k = Mp.row_ptr[i]; k < Mp.row_ptr[i + 1]; ++k)
      mts.push_back({i, Mp.col[k], Mp.val[k]});
    for (int k = Mm.row_ptr[i]; k < Mm.row_ptr[i + 1]; ++k)
      mts.push_back({i, Mm.col[k], Mm.val[k]});
  }
  auto onb = boundary_vertex_flags(m);
  std::vector<int> free_ids;
  for (int v = 0; v < m.num_vertices(); ++v)
    if (!onb[v]) free_ids.push_back(v);
  auto K = SparseOperator::from_triplets(m.num_vertices(), kts).submatrix(free_ids);
  auto M = SparseOperator::from_triplets(m.num_vertices(), mts).submatrix(free_ids);
  auto eig = smallest_generalized_eig(K, M);
  CHECK(eig.beta == Approx(j01 * j01).epsilon(0.02));
}

TEST_CASE("degenerate smallest eigenvalue sets the warning flag", "[fem][eig]") {
  // identity pencil: every eigenvalue equals 1
  auto I2 = SparseOperator::from_triplets(4, {{0, 0, 1.0}, {1, 1, 1.0},
                                              {2, 2, 1.0}, {3, 3, 1.0}});
  EigOptions opt;
  opt.check_gap = true;
  auto eig = smallest_generalized_eig(I2, I2, opt);
  CHECK(eig.beta == Approx(1.0));
  CHECK(eig.degenerate_gap);

  // well-separated spectrum: no flag
  auto D = SparseOperator::from_triplets(3, {{0, 0, 1.0}, {1, 1, 5.0}, {2, 2, 9.0}});
  auto I3 = SparseOperator::from_triplets(3, {{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}});
  auto eig2 = smallest_generalized_eig(D, I3, opt);
  CHECK(eig2.beta == Approx(1.0));
  CHECK_FALSE(eig2.degenerate_gap);
}

#include <catch2/catch_amalgamated.hpp>

#include "fbfem/sparse.hpp"

using namespace fbfem;
using Catch::Approx;

TEST_CASE("triplet assembly sums duplicates in canonical order", "[sparse]") {
  auto op = SparseOperator::from_triplets(
      2, {{0, 0, 1.0}, {0, 1, 2.0}, {0, 0, 3.0}, {1, 1, 5.0}, {1, 0, 2.0}});
  CHECK(op.entry(0, 0) == 4.0);
  CHECK(op.entry(0, 1) == 2.0);
  CHECK(op.entry(1, 0) == 2.0);
  CHECK(op.entry(1, 1) == 5.0);
  CHECK(op.is_symmetric());
  // canonical order: rows ascending, columns ascending inside a row
  REQUIRE(op.col.size() == 4);
  CHECK(op.col == std::vector<int>{0, 1, 0, 1});
}

TEST_CASE("matvec and submatrix", "[sparse]") {
  auto op = SparseOperator::from_triplets(
      3, {{0, 0, 2.0}, {1, 1, 3.0}, {2, 2, 4.0}, {0, 2, 1.0}, {2, 0, 1.0}});
  auto y = op.matvec({1.0, 1.0, 1.0});
  CHECK(y[0] == 3.0);
  CHECK(y[1] == 3.0);
  CHECK(y[2] == 5.0);
  auto sub = op.submatrix({0, 2});
  CHECK(sub.dim == 2);
  CHECK(sub.entry(0, 1) == 1.0);
  CHECK(sub.entry(1, 1) == 4.0);
}

TEST_CASE("cg identity converges in one iteration", "[sparse][cg]") {
  auto id = SparseOperator::from_triplets(3, {{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}});
  auto r = cg_solve(id, {3.0, -1.0, 2.0});
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  CHECK(r.x[0] == Approx(3.0));
  CHECK(r.x[1] == Approx(-1.0));
  CHECK(r.x[2] == Approx(2.0));
}

TEST_CASE("cg solves diagonal system exactly", "[sparse][cg]") {
  auto d = SparseOperator::from_triplets(2, {{0, 0, 1.0}, {1, 1, 4.0}});
  auto r = cg_solve(d, {1.0, 4.0});
  CHECK(r.converged);
  CHECK(r.x[0] == Approx(1.0).epsilon(1e-12));
  CHECK(r.x[1] == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cg signals indefinite operators", "[sparse][cg]") {
  auto ind = SparseOperator::from_triplets(2, {{0, 0, 1.0}, {1, 1, -1.0}});
  CHECK_THROWS_AS(cg_solve(ind, {0.0, 1.0}), std::runtime_error);
}

TEST_CASE("cg is deterministic", "[sparse][cg]") {
  // mildly ill-conditioned SPD tridiagonal
  std::vector<Triplet> ts;
  int n = 50;
  for (int i = 0; i < n; ++i) {
    ts.push_back({i, i, 2.0 + 0.01 * i});
    if (i + 1 < n) {
      ts.push_back({i, i + 1, -1.0});
      ts.push_back({i + 1, i, -1.0});
    }
  }
  auto op = SparseOperator::from_triplets(n, ts);
  std::vector<double> b(n, 1.0);
  auto r1 = cg_solve(op, b);
  auto r2 = cg_solve(op, b);
  REQUIRE(r1.converged);
  CHECK(r1.iterations == r2.iterations);
  for (int i = 0; i < n; ++i) CHECK(r1.x[i] == r2.x[i]);  // bitwise
}

TEST_CASE("cg zero rhs returns zero immediately", "[sparse][cg]") {
  auto d = SparseOperator::from_triplets(2, {{0, 0, 1.0}, {1, 1, 4.0}});
  auto r = cg_solve(d, {0.0, 0.0});
  CHECK(r.converged);
  CHECK(r.iterations == 0);
  CHECK(r.x == std::vector<double>{0.0, 0.0});
}

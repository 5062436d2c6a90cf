#include <catch2/catch_amalgamated.hpp>

#include "fbfem/geometry.hpp"

using namespace fbfem;
using Catch::Approx;

TEST_CASE("orientation predicate", "[geometry]") {
  CHECK(orient2d({0, 0}, {1, 0}, {0, 1}) > 0);
  CHECK(orient2d({0, 0}, {0, 1}, {1, 0}) < 0);
  CHECK(orient2d({0, 0}, {1, 1}, {2, 2}) == 0);
}

TEST_CASE("incircle predicate", "[geometry]") {
  Vec2 a{0, 0}, b{1, 0}, c{0, 1};
  CHECK(incircle(a, b, c, {0.3, 0.3}) > 0);
  CHECK(incircle(a, b, c, {2.0, 2.0}) < 0);
  // (1,1) lies exactly on the circumcircle of the unit right triangle.
  CHECK(std::abs((double)incircle(a, b, c, {1.0, 1.0})) < 1e-14);
}

TEST_CASE("point in polygon", "[geometry]") {
  std::vector<Vec2> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  CHECK(point_in_polygon({0.5, 0.5}, sq));
  CHECK_FALSE(point_in_polygon({1.5, 0.5}, sq));
  CHECK(point_in_polygon({0.5, 0.0}, sq));  // boundary counts as inside
  CHECK(polygon_area(sq) == Approx(1.0));
}

TEST_CASE("segment intersection", "[geometry]") {
  CHECK(segments_intersect({0, 0}, {1, 1}, {0, 1}, {1, 0}));
  CHECK_FALSE(segments_intersect({0, 0}, {1, 0}, {0, 1}, {1, 1}));
  // shared endpoint is not an intersection
  CHECK_FALSE(segments_intersect({0, 0}, {1, 0}, {1, 0}, {1, 1}));
}

TEST_CASE("triangle angles", "[geometry]") {
  CHECK(triangle_min_angle_deg({0, 0}, {1, 0}, {0, 1}) == Approx(45.0));
  CHECK(triangle_min_angle_deg({0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}) ==
        Approx(60.0).margin(1e-9));
}

TEST_CASE("jitter hash is deterministic and bounded", "[geometry]") {
  double a = hash_unit(3, 7, 42), b = hash_unit(3, 7, 42);
  CHECK(a == b);
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 50; ++j) {
      double v = hash_unit(i, j, 1);
      CHECK(v >= -1.0);
      CHECK(v <= 1.0);
    }
}

TEST_CASE("point-segment distance", "[geometry]") {
  CHECK(dist2_point_segment({0, 1}, {-1, 0}, {1, 0}) == Approx(1.0));
  CHECK(dist2_point_segment({3, 0}, {-1, 0}, {1, 0}) == Approx(4.0));
}

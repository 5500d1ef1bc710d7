#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "riskmon/geometry.hpp"
#include "riskmon/random.hpp"

using namespace riskmon;

TEST_CASE("iou of identical, disjoint and half-offset boxes") {
  const Object25D a{0.5, 0.5, 1, 1, 10};
  CHECK(iou(a, a) == doctest::Approx(1.0));
  CHECK(iou(a, Object25D{5.5, 0.5, 1, 1, 10}) == 0.0);
  CHECK(iou(a, Object25D{1.0, 0.5, 1, 1, 10}) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("iog measures coverage of the reference") {
  const Object25D g{10, 10, 4, 4, 5};
  CHECK(iog(g, g) == doctest::Approx(1.0));
  CHECK(iog(Object25D{9, 10, 2, 4, 5}, g) == doctest::Approx(0.5));
  CHECK(iog(Object25D{30, 30, 2, 2, 5}, g) == 0.0);
}

TEST_CASE("rdd and dr closed forms") {
  CHECK(rdd(10, 10) == 0.0);
  CHECK(rdd(20, 10) == 1.0);
  CHECK(rdd(5, 10) == doctest::Approx(-0.5));
  CHECK(rdd(40, 10) == 1.0);
  CHECK(dr(10, 10) == 1.0);
  CHECK(dr(5, 10) == 1.0);
  CHECK(dr(20, 10) == doctest::Approx(0.5));
}

TEST_CASE("overlap measures agree with the corner oracle on random boxes") {
  Rng rng(7);
  for (int i = 0; i < 500; ++i) {
    const Object25D a{rng.uniform(0, 50), rng.uniform(0, 50), rng.uniform(1, 30), rng.uniform(1, 30), 1};
    const Object25D b{rng.uniform(0, 50), rng.uniform(0, 50), rng.uniform(1, 30), rng.uniform(1, 30), 1};
    CHECK(std::abs(iou(a, b) - oracle::iou(a, b)) < 1e-12);
    CHECK(std::abs(iou(a, b) - iou(b, a)) < 1e-12);
    CHECK(std::abs(iog(a, b) - oracle::iog(a, b)) < 1e-12);
  }
}

TEST_CASE("cube in front of the camera projects onto its front face") {
  const CameraModel cam{100, 100, 320, 240, 640, 480};
  Box3D box;
  box.center = {0, 0, 10};
  box.size = {2, 2, 2};
  CHECK(closest_distance(box) == doctest::Approx(9.0));
  const auto o = project_box3d(box, cam);
  REQUIRE(o.has_value());
  // Extremes come from the near face corners at z = 9.
  double x0 = 1e9, x1 = -1e9, y0 = 1e9, y1 = -1e9;
  for (const auto& c : box.corners()) {
    const double u = 320 + 100 * c[0] / c[2], v = 240 + 100 * c[1] / c[2];
    x0 = std::min(x0, u), x1 = std::max(x1, u), y0 = std::min(y0, v), y1 = std::max(y1, v);
  }
  CHECK(o->left() == doctest::Approx(x0));
  CHECK(o->right() == doctest::Approx(x1));
  CHECK(o->top() == doctest::Approx(y0));
  CHECK(o->bottom() == doctest::Approx(y1));
  CHECK(o->left() == doctest::Approx(308.89).epsilon(1e-4));
  CHECK(o->right() == doctest::Approx(331.11).epsilon(1e-4));
  CHECK(o->d == doctest::Approx(9.0));
}

TEST_CASE("boxes behind the camera or outside the image are rejected") {
  const CameraModel cam{100, 100, 320, 240, 640, 480};
  Box3D behind;
  behind.center = {0, 0, -5};
  CHECK_FALSE(project_box3d(behind, cam).has_value());
  Box3D aside;
  aside.center = {500, 0, 10};
  CHECK_FALSE(project_box3d(aside, cam).has_value());
}

TEST_CASE("yawed box keeps its closest distance") {
  Box3D box;
  box.center = {0, 0, 10};
  box.size = {4, 2, 2};
  // Length lies along x until a quarter turn swings it onto the optical axis.
  CHECK(closest_distance(box) == doctest::Approx(9.0));
  box.yaw = std::numbers::pi / 2;
  CHECK(closest_distance(box) == doctest::Approx(8.0));
  box.center = {0, 0, 0};
  CHECK(closest_distance(box) == 0.0);
}

TEST_CASE("camera validation") {
  CHECK_THROWS(CameraModel{0, 100, 0, 0, 10, 10}.validate());
  CHECK_THROWS(CameraModel{100, 100, 0, 0, 0, 10}.validate());
  CHECK_NOTHROW(CameraModel{100, 100, 5, 5, 10, 10}.validate());
}

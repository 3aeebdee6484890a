#include "graspref/camera.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace graspref;
using namespace graspref::test;

namespace {

Camera simple_camera(int w = 5, int h = 5) {
  Camera c;
  c.fx = c.fy = 2.0;
  c.cx = 2.0;
  c.cy = 2.0;
  c.width = w;
  c.height = h;
  return c;
}

}  // namespace

TEST_CASE("optical axis pixel backprojects onto the axis") {
  const Camera cam = simple_camera();
  DepthImage depth(5, 5, 0.0f);
  Mask mask(5, 5, 0);
  depth.at(2, 2) = 1.0f;
  mask.at(2, 2) = 1;
  const PointCloud c = backproject_depth(depth, cam, mask);
  REQUIRE(c.size() == 1);
  CHECK((c.points[0] - Vec3(0, 0, 1)).norm() < 1e-15);
}

TEST_CASE("pinhole equation") {
  Camera cam = simple_camera();
  cam.fx = 1.0;
  cam.cx = 1.0;
  CHECK((cam.unproject(cam.cx + cam.fx, cam.cy, 1.0) - Vec3(1, 0, 1)).norm() < 1e-15);
}

TEST_CASE("project and unproject round trip") {
  Rng rng(51);
  Camera cam = simple_camera(160, 120);
  cam.fx = cam.fy = 160;
  cam.cx = 79.5;
  cam.cy = 59.5;
  for (int i = 0; i < 100; ++i) {
    cam.camera_from_world = random_pose(rng, 0.5, kPi);
    const Vec3 x = cam.to_world(Vec3(uniform(rng, -0.1, 0.1), uniform(rng, -0.1, 0.1), uniform(rng, 0.2, 1.0)));
    const auto px = cam.project(x);
    REQUIRE(px.has_value());
    CHECK((cam.unproject(px->u, px->v, px->depth) - x).norm() < 1e-6);
    const Vec3 ray = cam.ray_direction(px->u, px->v);
    CHECK((cam.center_world() + px->depth * ray - x).norm() < 1e-9);
  }
  CHECK_FALSE(cam.project(cam.to_world({0, 0, -1})).has_value());
}

TEST_CASE("invalid pixels are skipped and empty observations rejected") {
  const Camera cam = simple_camera();
  DepthImage depth(5, 5, 1.0f);
  Mask mask(5, 5, 1);
  depth.at(0, 0) = 0.0f;
  depth.at(1, 0) = std::numeric_limits<float>::quiet_NaN();
  mask.at(2, 0) = 0;
  CHECK(backproject_depth(depth, cam, mask).size() == 22);
  try {
    backproject_depth(depth, cam, Mask(5, 5, 0));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("empty observation") != std::string::npos);
  }
  CHECK_THROWS_AS(backproject_depth(DepthImage(4, 5), cam, mask), Error);
}

TEST_CASE("downsampled camera covers the same rays") {
  Camera cam = simple_camera(160, 120);
  cam.fx = cam.fy = 160;
  cam.cx = 79.5;
  cam.cy = 59.5;
  const Camera low = cam.downsampled(4);
  CHECK(low.width == 40);
  CHECK(low.height == 30);
  // Low-res pixel centre is the mean of the 4x4 full-res centres it covers.
  const Vec3 a = low.ray_direction(3, 7);
  const Vec3 b = cam.ray_direction(4 * 3 + 1.5, 4 * 7 + 1.5);
  CHECK((a - b).norm() < 1e-12);
  CHECK_THROWS_AS(cam.downsampled(0), Error);
}

TEST_CASE("mask downsampling averages blocks") {
  Mask m(4, 2, 0);
  m.at(0, 0) = 1;
  m.at(1, 1) = 1;
  m.at(2, 0) = 1;
  const SoftMask s = downsample_mask(m, 2);
  CHECK(s.width == 2);
  CHECK(s.at(0, 0) == 0.5);
  CHECK(s.at(1, 0) == 0.25);
}

TEST_CASE("camera validation") {
  Camera c = simple_camera();
  CHECK_NOTHROW(c.validate());
  c.fx = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = simple_camera();
  c.cx = 9.0;
  CHECK_THROWS_AS(c.validate(), Error);
}

#include "graspref/render.hpp"

#include "graspref/datagen.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace graspref;
using namespace graspref::test;

namespace {

// Looks down +z from the origin.
Camera axis_camera(int w, int h, double f) {
  Camera c;
  c.fx = c.fy = f;
  c.width = w;
  c.height = h;
  c.cx = 0.5 * (w - 1);
  c.cy = 0.5 * (h - 1);
  return c;
}

double coverage(const SoftMask& m) {
  double s = 0.0;
  for (double v : m.data) s += v;
  return s;
}

Eigen::Vector2d centroid(const SoftMask& m) {
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  double w = 0.0;
  for (int v = 0; v < m.height; ++v) {
    for (int u = 0; u < m.width; ++u) {
      c += m.at(u, v) * Eigen::Vector2d(u, v);
      w += m.at(u, v);
    }
  }
  return c / w;
}

// Width of the silhouette along the row through the principal point.
double row_extent(const SoftMask& m, int row) {
  double s = 0.0;
  for (int u = 0; u < m.width; ++u) s += m.at(u, row);
  return s;
}

}  // namespace

TEST_CASE("centred object projects onto the principal point") {
  const Camera cam = axis_camera(64, 48, 60.0);
  const SilhouetteRenderer r(make_icosphere(0.05, 3));
  const SoftMask m = r.render(cam, Pose::from_translation({0, 0, 0.5}), 1.0);
  const Eigen::Vector2d c = centroid(m);
  CHECK(std::abs(c.x() - cam.cx) <= 1.0);
  CHECK(std::abs(c.y() - cam.cy) <= 1.0);
  for (double v : m.data) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("object behind the camera renders nothing") {
  const Camera cam = axis_camera(32, 24, 30.0);
  const SilhouetteRenderer r(make_box({0.1, 0.1, 0.1}));
  CHECK(coverage(r.render(cam, Pose::from_translation({0, 0, -0.5}), 1.0)) == 0.0);
}

TEST_CASE("doubling the distance halves the silhouette") {
  const Camera cam = axis_camera(200, 200, 200.0);
  const SilhouetteRenderer r(make_icosphere(0.05, 3));
  const SoftMask near = r.render(cam, Pose::from_translation({0, 0, 0.4}), 1.0);
  const SoftMask far = r.render(cam, Pose::from_translation({0, 0, 0.8}), 1.0);
  const int row = static_cast<int>(cam.cy);
  const double ratio = row_extent(far, row) / row_extent(near, row);
  CHECK(std::abs(ratio - 0.5) <= 0.025);
}

TEST_CASE("silhouette area matches the projected disc") {
  const Camera cam = axis_camera(200, 200, 200.0);
  const double radius = 0.05;
  const double z = 0.5;
  const SoftMask m = SilhouetteRenderer(make_icosphere(radius, 4)).render(cam, Pose::from_translation({0, 0, z}), 1.0);
  // Limb of a sphere seen from distance z: angular radius asin(r / z).
  const double rho = cam.fx * std::tan(std::asin(radius / z));
  CHECK(coverage(m) == doctest::Approx(kPi * rho * rho).epsilon(0.03));
}

TEST_CASE("self comparison sits at the softness floor") {
  Camera cam = axis_camera(160, 120, 160.0);
  const TriangleMesh obj = make_bottle(0.12, 0.06, 0.035, 20);
  const Pose gt({0.01, -0.005, 0.3}, exp_rotation({0.3, 1.2, -0.4}));
  const RenderedObservation obs = render_observation(nullptr, obj, gt, cam);
  const RenderComparator cmp(obj, cam, obs.mask, RenderConfig{});
  CHECK(cmp.loss(gt) <= 1e-3);
  CHECK(cmp.loss(apply_step(gt, {Vec3(0.01, 0, 0), Vec3::Zero()})) > 5.0 * cmp.loss(gt));
}

TEST_CASE("hypothesis out of frame costs the lit fraction") {
  const Camera cam = axis_camera(160, 120, 160.0);
  Mask observed(160, 120, 0);
  for (int v = 40; v < 80; ++v) {
    for (int u = 20; u < 100; ++u) observed.at(u, v) = 1;
  }
  const double f = 40.0 * 80.0 / (160.0 * 120.0);
  const RenderComparator cmp(make_box({0.05, 0.05, 0.05}), cam, observed, RenderConfig{});
  CHECK(cmp.loss(Pose::from_translation({5.0, 0, 0.3})) == doctest::Approx(f).epsilon(1e-12));
}

TEST_CASE("mask error is symmetric") {
  Rng rng(81);
  SoftMask a(7, 5), b(7, 5);
  for (double& v : a.data) v = uniform(rng, 0, 1);
  for (double& v : b.data) v = uniform(rng, 0, 1);
  CHECK(mask_mse(a, b) == mask_mse(b, a));
  CHECK(mask_mse(a, a) == 0.0);
  CHECK_THROWS_AS(mask_mse(a, SoftMask(5, 7)), Error);
}

TEST_CASE("finite-difference gradient descends") {
  Camera cam = axis_camera(160, 120, 160.0);
  const TriangleMesh obj = make_bottle(0.12, 0.06, 0.035, 20);
  const Pose gt({0.0, 0.0, 0.3}, exp_rotation({0.2, 1.0, 0.0}));
  const RenderedObservation obs = render_observation(nullptr, obj, gt, cam);
  const RenderComparator cmp(obj, cam, obs.mask, RenderConfig{});
  const Pose start = apply_step(gt, {Vec3(0.008, -0.004, 0.0), Vec3::Zero()});
  const Vec6 g = cmp.gradient(start);
  CHECK(g[0] > 0.0);
  CHECK(g[1] < 0.0);
  const Vec6 step = -1e-3 * g.normalized();
  CHECK(cmp.loss(apply_step(start, TangentStep::from_vector(step))) < cmp.loss(start));
}

TEST_CASE("hand in front hides the object") {
  const Camera cam = axis_camera(160, 120, 160.0);
  const TriangleMesh obj = make_box({0.06, 0.06, 0.06});
  const Pose pose = Pose::from_translation({0, 0, 0.4});
  // Plate covering the left half of the view, between camera and object.
  const auto hand = box_hand({0.2, 0.4, 0.01}, {-0.1, 0, 0.2}, 0.01, 0.02);
  const SilhouetteRenderer r(obj);
  const Camera low = cam.downsampled(4);
  const HandOcclusion occ(*hand, cam, 4);
  const SoftMask plain = r.render(low, pose, 1.0, 4);
  const SoftMask hidden = r.render(low, pose, 1.0, 4, &occ);
  for (int v = 0; v < low.height; ++v) {
    for (int u = 0; u < low.width; ++u) {
      if (u < 19) CHECK(hidden.at(u, v) == 0.0);
      if (u > 20) CHECK(hidden.at(u, v) == plain.at(u, v));
    }
  }
  // A plate behind the object hides nothing.
  const auto behind = box_hand({0.4, 0.4, 0.01}, {0, 0, 0.6}, 0.01, 0.02);
  const HandOcclusion occ_behind(*behind, cam, 4);
  CHECK(r.render(low, pose, 1.0, 4, &occ_behind).data == plain.data);
  CHECK_THROWS_AS(r.render(low, pose, 1.0, 2, &occ), Error);

  // Observation rendered with the same plate matches the occluded hypothesis.
  const RenderedObservation obs = render_observation(hand.get(), obj, pose, cam);
  CHECK(obs.occlusion_fraction == doctest::Approx(0.5).epsilon(0.05));
  const RenderComparator with(obj, cam, obs.mask, RenderConfig{}, hand.get());
  RenderConfig off;
  off.hand_occlusion = false;
  const RenderComparator without(obj, cam, obs.mask, off, hand.get());
  CHECK(with.loss(pose) <= 1e-3);
  CHECK(without.loss(pose) > 10.0 * with.loss(pose));
}

TEST_CASE("render config validation") {
  RenderConfig c;
  c.scale = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = RenderConfig{};
  c.edge_softness = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  const Camera cam = axis_camera(16, 12, 16.0);
  CHECK_THROWS_AS(RenderComparator(make_box({1, 1, 1}), cam, Mask(8, 8), RenderConfig{}), Error);
}

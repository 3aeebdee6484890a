#include "graspref/bvh.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace graspref;
using namespace graspref::test;

TEST_CASE("closest point matches brute force") {
  Rng rng(21);
  const TriangleMesh m = make_icosphere(0.5, 2).transformed(random_pose(rng, 0.2, 1.0));
  const TriangleBvh tree(m);
  for (int i = 0; i < 300; ++i) {
    const Vec3 p = random_vec(rng, 1.5);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < m.num_faces(); ++f) {
      best = std::min(best, point_triangle_distance(p, m.triangle(f)).distance);
    }
    const TriangleBvh::Hit h = tree.closest(p);
    CHECK(std::sqrt(h.dist2) == doctest::Approx(best).epsilon(1e-12));
    CHECK((h.point - p).squaredNorm() == doctest::Approx(h.dist2));
  }
}

TEST_CASE("nearest point matches brute force") {
  Rng rng(22);
  std::vector<Vec3> pts;
  for (int i = 0; i < 700; ++i) pts.push_back(random_vec(rng, 1.0));
  const PointBvh tree(pts);
  for (int i = 0; i < 300; ++i) {
    const Vec3 q = random_vec(rng, 1.2);
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& p : pts) best = std::min(best, (p - q).squaredNorm());
    CHECK(tree.nearest(q).dist2 == best);
  }
}

TEST_CASE("nearest point to triangle matches brute force") {
  Rng rng(23);
  std::vector<Vec3> pts;
  for (int i = 0; i < 400; ++i) pts.push_back(random_vec(rng, 1.0));
  const PointBvh tree(pts);
  for (int i = 0; i < 100; ++i) {
    const Triangle t{random_vec(rng, 1.0), random_vec(rng, 1.0), random_vec(rng, 1.0)};
    if ((t.b - t.a).cross(t.c - t.a).norm() < 1e-3) continue;
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& p : pts) best = std::min(best, std::pow(point_triangle_distance(p, t).distance, 2));
    const PointBvh::TriangleHit h = tree.nearest_to_triangle(t);
    CHECK(h.dist2 == doctest::Approx(best).epsilon(1e-12));
    CHECK((pts[h.index] - h.on_triangle).squaredNorm() == doctest::Approx(h.dist2));
  }
}

TEST_CASE("raycast hits the box faces") {
  const TriangleBvh tree(make_box({2.0, 2.0, 2.0}));
  const auto t = tree.raycast({0.2, -0.1, 5.0}, {0.0, 0.0, -1.0});
  REQUIRE(t.has_value());
  CHECK(*t == doctest::Approx(4.0));
  // Non-unit directions scale the parameter.
  CHECK(*tree.raycast({0.2, -0.1, 5.0}, {0.0, 0.0, -2.0}) == doctest::Approx(2.0));
  CHECK_FALSE(tree.raycast({0.2, -0.1, 5.0}, {0.0, 0.0, 1.0}).has_value());
  CHECK(tree.crossings({0.2, -0.1, 5.0}, {0.0, 0.0, -1.0}) == 2);
}

TEST_CASE("containment agrees with analytic shapes") {
  Rng rng(24);
  const TriangleMesh sphere = make_icosphere(1.0, 3);
  const TriangleBvh tree(sphere);
  // The inscribed sphere of the polyhedron is within 1% of the radius.
  for (int i = 0; i < 500; ++i) {
    const Vec3 p = random_vec(rng, 1.3);
    const double r = p.norm();
    if (std::abs(r - 1.0) < 0.02) continue;
    CHECK(tree.contains(p) == (r < 1.0));
  }
  const TriangleBvh box(make_box({1.0, 1.0, 1.0}));
  CHECK(box.contains({0.0, 0.0, 0.0}));
  CHECK(box.contains({0.49, 0.49, -0.49}));
  CHECK_FALSE(box.contains({0.51, 0.0, 0.0}));
}

#include "graspref/mesh.hpp"

#include "support.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace graspref;
using namespace graspref::test;

namespace {

TriangleMesh unit_square() {
  return TriangleMesh({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}}, {Face{0, 1, 2}, Face{0, 2, 3}});
}

Vec3 barycentric(const Triangle& t, const Vec3& p) {
  const Vec3 n = (t.b - t.a).cross(t.c - t.a);
  const double area = n.squaredNorm();
  const double l0 = (t.c - t.b).cross(p - t.b).dot(n) / area;
  const double l1 = (t.a - t.c).cross(p - t.c).dot(n) / area;
  return {l0, l1, 1.0 - l0 - l1};
}

// Dense sampling of the triangle as a distance oracle.
double dense_distance(const Vec3& p, const Triangle& t, int n) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; i + j <= n; ++j) {
      const double a = static_cast<double>(i) / n;
      const double b = static_cast<double>(j) / n;
      best = std::min(best, (t.a + a * (t.b - t.a) + b * (t.c - t.a) - p).norm());
    }
  }
  return best;
}

}  // namespace

TEST_CASE("construction validates faces") {
  CHECK_THROWS_AS(TriangleMesh({{0, 0, 0}, {1, 0, 0}}, {Face{0, 1, 2}}), Error);
  CHECK_THROWS_AS(TriangleMesh({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}, {Face{0, 1, 2}}), Error);
  CHECK_THROWS_AS(TriangleMesh({{0, 0, 0}, {1, 0, 0}, {0, NAN, 0}}, {Face{0, 1, 2}}), Error);
}

TEST_CASE("primitives are closed with outward winding") {
  const TriangleMesh box = make_box({1.0, 2.0, 3.0});
  CHECK(box.is_closed());
  CHECK(box.volume() == doctest::Approx(6.0));
  CHECK(box.total_area() == doctest::Approx(22.0));

  const TriangleMesh sphere = make_icosphere(0.05, 3);
  CHECK(sphere.is_closed());
  const double v = 4.0 / 3.0 * kPi * std::pow(0.05, 3);
  CHECK(sphere.volume() == doctest::Approx(v).epsilon(0.02));
  CHECK(sphere.volume() < v);

  const TriangleMesh cyl = make_cylinder(0.02, 0.1, 64);
  CHECK(cyl.is_closed());
  CHECK(cyl.volume() == doctest::Approx(kPi * 0.0004 * 0.1).epsilon(0.01));

  CHECK(make_capsule(0.01, 0.05, 24, 6).is_closed());
  const TriangleMesh bottle = make_bottle(0.12, 0.06, 0.035, 20);
  CHECK(bottle.is_closed());
  CHECK(bottle.volume() > 0.0);
  CHECK(bottle.bounds().sizes().z() == doctest::Approx(0.12));

  CHECK_FALSE(unit_square().is_closed());
}

TEST_CASE("transformed mesh keeps area and volume") {
  Rng rng(7);
  const TriangleMesh box = make_box({0.1, 0.2, 0.3});
  const Pose p = random_pose(rng, 1.0, kPi);
  const TriangleMesh moved = box.transformed(p);
  CHECK(moved.volume() == doctest::Approx(box.volume()));
  CHECK(moved.total_area() == doctest::Approx(box.total_area()));
  CHECK((moved.vertices()[3] - p.transform(box.vertices()[3])).norm() < 1e-15);
}

TEST_CASE("point-triangle distance") {
  const Triangle t{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  ClosestPoint c = point_triangle_distance({0, 0, 1}, t);
  CHECK(c.distance == doctest::Approx(1.0));
  CHECK(c.point.norm() < 1e-15);
  CHECK(point_triangle_distance(t.b, t).distance == 0.0);
  c = point_triangle_distance({2, 0, 0}, t);
  CHECK(c.distance == doctest::Approx(1.0));
  CHECK((c.point - Vec3(1, 0, 0)).norm() < 1e-15);
  CHECK_THROWS_AS(point_triangle_distance({0, 0, 0}, Triangle{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}), Error);
}

TEST_CASE("point-triangle distance agrees with dense sampling") {
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    const Triangle t{random_vec(rng, 1.0), random_vec(rng, 1.0), random_vec(rng, 1.0)};
    if ((t.b - t.a).cross(t.c - t.a).norm() < 1e-2) continue;
    const Vec3 p = random_vec(rng, 2.0);
    const ClosestPoint c = point_triangle_distance(p, t);
    const double dense = dense_distance(p, t, 200);
    // The lattice oracle overestimates by at most one lattice spacing.
    CHECK(c.distance <= dense + 1e-12);
    CHECK(c.distance >= dense - 4.0 / 200.0);
    CHECK((c.point - p).norm() == doctest::Approx(c.distance));
    const Vec3 l = barycentric(t, c.point);
    CHECK(l.minCoeff() >= -1e-9);
  }
}

TEST_CASE("surface sampling follows face areas") {
  const TriangleMesh sq = unit_square();
  const std::vector<std::size_t> faces = sample_surface_faces(sq, 10000, 11);
  const auto first = static_cast<double>(std::count(faces.begin(), faces.end(), 0u));
  // Binomial(10000, 0.5): sigma = 50.
  CHECK(std::abs(first - 5000.0) <= 150.0);

  // Unequal areas: a 1x1 and a 3x1 rectangle in the plane.
  const TriangleMesh two({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {10, 0, 0}, {13, 0, 0}, {10, 1, 0}},
                         {Face{0, 1, 2}, Face{3, 4, 5}});
  const std::vector<std::size_t> f2 = sample_surface_faces(two, 20000, 12);
  const auto small = static_cast<double>(std::count(f2.begin(), f2.end(), 0u));
  const double p = 0.25;
  CHECK(std::abs(small - 20000 * p) <= 3.0 * std::sqrt(20000 * p * (1 - p)));
}

TEST_CASE("surface samples lie on their triangles") {
  const TriangleMesh one({{0, 0, 0}, {2, 0, 0}, {0, 1, 1}}, {Face{0, 1, 2}});
  const PointCloud c = sample_surface_points(one, 1, 3);
  REQUIRE(c.size() == 1);
  const Vec3 l = barycentric(one.triangle(0), c.points[0]);
  CHECK(l.minCoeff() >= -1e-12);
  CHECK(l.maxCoeff() <= 1.0 + 1e-12);
  CHECK(l.sum() == doctest::Approx(1.0));

  Rng rng(9);
  const TriangleMesh sphere = make_icosphere(0.3, 2);
  const std::vector<std::size_t> faces = sample_surface_faces(sphere, 500, 4);
  const PointCloud pts = sample_surface_points(sphere, 500, 4);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(point_triangle_distance(pts.points[i], sphere.triangle(faces[i])).distance < 1e-12);
  }
}

TEST_CASE("surface sampling is deterministic") {
  const TriangleMesh m = make_icosphere(1.0, 2);
  const PointCloud a = sample_surface_points(m, 1000, 42);
  const PointCloud b = sample_surface_points(m, 1000, 42);
  CHECK(a.points == b.points);
  const PointCloud c = sample_surface_points(m, 1000, 43);
  CHECK_FALSE(a.points == c.points);
  CHECK_THROWS_AS(sample_surface_points(m, 0, 1), Error);
}

TEST_CASE("obj round trip and errors") {
  const auto dir = std::filesystem::temp_directory_path() / "graspref_test_mesh";
  std::filesystem::create_directories(dir);
  const TriangleMesh m = make_box({0.1, 0.2, 0.3});
  save_obj(m, dir / "box.obj");
  const TriangleMesh back = load_obj(dir / "box.obj");
  CHECK(back.vertices() == m.vertices());
  CHECK(back.faces() == m.faces());

  {
    std::ofstream quad(dir / "quad.obj");
    quad << "# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1 4//1\n";
  }
  const TriangleMesh q = load_obj(dir / "quad.obj");
  CHECK(q.num_faces() == 2);
  CHECK(q.total_area() == doctest::Approx(1.0));

  {
    std::ofstream bad(dir / "bad.obj");
    bad << "v 0 0 0\nv 1 0 0\nf 1 2 9\n";
  }
  CHECK_THROWS_AS(load_obj(dir / "bad.obj"), Error);
  try {
    load_obj(dir / "missing.obj");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("missing.obj") != std::string::npos);
  }
  std::filesystem::remove_all(dir);
}

#pragma once

#include "graspref/mesh.hpp"

#include <optional>
#include <span>
#include <vector>

namespace graspref {

// Median-split AABB tree over triangles. Queries are exact; traversal order
// is fixed so ties resolve identically on every run.
class TriangleBvh {
 public:
  struct Hit {
    std::size_t face = 0;
    double dist2 = 0.0;
    Vec3 point = Vec3::Zero();
  };

  TriangleBvh() = default;
  explicit TriangleBvh(const TriangleMesh& mesh);

  Hit closest(const Vec3& p) const;
  double distance(const Vec3& p) const { return std::sqrt(closest(p).dist2); }

  // Nearest positive ray parameter along `dir` (not required to be unit).
  std::optional<double> raycast(const Vec3& origin, const Vec3& dir) const;
  int crossings(const Vec3& origin, const Vec3& dir) const;
  // Majority vote of ray parities along three near-axis directions.
  bool contains(const Vec3& p) const;

  const Aabb& bounds() const { return nodes_.front().box; }
  bool empty() const { return tris_.empty(); }

 private:
  struct Node {
    Aabb box;
    int left = -1;
    int right = -1;
    int first = 0;
    int count = 0;
  };
  int build(int first, int count, const std::vector<Vec3>& centroids);

  std::vector<Node> nodes_;
  std::vector<Triangle> tris_;
  std::vector<std::size_t> face_of_;
};

// Median-split AABB tree over points.
class PointBvh {
 public:
  struct Hit {
    std::size_t index = 0;
    double dist2 = 0.0;
  };
  struct TriangleHit {
    std::size_t index = 0;
    double dist2 = 0.0;
    Vec3 on_triangle = Vec3::Zero();
  };

  PointBvh() = default;
  explicit PointBvh(std::span<const Vec3> points);

  Hit nearest(const Vec3& p) const;
  // Point minimizing the distance to the closed triangle, with the
  // corresponding closest location on the triangle.
  TriangleHit nearest_to_triangle(const Triangle& tri) const;

  bool empty() const { return points_.empty(); }
  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    Aabb box;
    int left = -1;
    int right = -1;
    int first = 0;
    int count = 0;
  };
  int build(int first, int count);

  std::vector<Node> nodes_;
  std::vector<Vec3> points_;
  std::vector<std::size_t> index_of_;
};

}  // namespace graspref

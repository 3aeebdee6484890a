#include "graspref/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace graspref {

namespace {

constexpr int kTriangleLeaf = 4;
constexpr int kPointLeaf = 8;
constexpr double kInf = std::numeric_limits<double>::infinity();

Aabb triangle_box(const Triangle& t) {
  Aabb box(t.a);
  box.extend(t.b);
  box.extend(t.c);
  return box;
}

// Largest-extent axis of a box.
int split_axis(const Aabb& box) {
  Vec3 extent = box.sizes();
  int axis = 0;
  if (extent.y() > extent[axis]) axis = 1;
  if (extent.z() > extent[axis]) axis = 2;
  return axis;
}

bool ray_box(const Aabb& box, const Vec3& origin, const Vec3& inv_dir, double t_max) {
  double t0 = 0.0;
  double t1 = t_max;
  for (int a = 0; a < 3; ++a) {
    double near = (box.min()[a] - origin[a]) * inv_dir[a];
    double far = (box.max()[a] - origin[a]) * inv_dir[a];
    if (near > far) std::swap(near, far);
    // NaN from 0 * inf means the ray lies in the slab plane; keep the interval.
    if (!std::isnan(near)) t0 = std::max(t0, near);
    if (!std::isnan(far)) t1 = std::min(t1, far);
    if (t0 > t1) return false;
  }
  return true;
}

// Moller-Trumbore; returns the ray parameter of a hit with t > 0.
std::optional<double> ray_triangle(const Vec3& origin, const Vec3& dir, const Triangle& tri) {
  const Vec3 e1 = tri.b - tri.a;
  const Vec3 e2 = tri.c - tri.a;
  const Vec3 pvec = dir.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < 1e-300) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 tvec = origin - tri.a;
  const double u = tvec.dot(pvec) * inv;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 qvec = tvec.cross(e1);
  const double v = dir.dot(qvec) * inv;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const double t = e2.dot(qvec) * inv;
  if (t <= 0.0) return std::nullopt;
  return t;
}

Vec3 inverse_direction(const Vec3& d) {
  return Vec3(1.0 / d.x(), 1.0 / d.y(), 1.0 / d.z());
}

}  // namespace

// ---------------------------------------------------------------------------

TriangleBvh::TriangleBvh(const TriangleMesh& mesh) {
  const std::size_t n = mesh.num_faces();
  if (n == 0) throw Error("TriangleBvh: empty mesh");
  tris_.reserve(n);
  face_of_.resize(n);
  std::iota(face_of_.begin(), face_of_.end(), std::size_t{0});
  std::vector<Vec3> centroids(n);
  for (std::size_t f = 0; f < n; ++f) {
    const Triangle t = mesh.triangle(f);
    tris_.push_back(t);
    centroids[f] = (t.a + t.b + t.c) / 3.0;
  }
  nodes_.reserve(2 * n / kTriangleLeaf + 2);
  build(0, static_cast<int>(n), centroids);
  std::vector<Triangle> ordered(n);
  for (std::size_t i = 0; i < n; ++i) ordered[i] = tris_[face_of_[i]];
  tris_ = std::move(ordered);
}

int TriangleBvh::build(int first, int count, const std::vector<Vec3>& centroids) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  Aabb box;
  Aabb cbox;
  for (int i = first; i < first + count; ++i) {
    box.extend(triangle_box(tris_[face_of_[i]]));
    cbox.extend(centroids[face_of_[i]]);
  }
  nodes_[id].box = box;
  if (count <= kTriangleLeaf) {
    nodes_[id].first = first;
    nodes_[id].count = count;
    return id;
  }
  const int axis = split_axis(cbox);
  const int half = count / 2;
  auto begin = face_of_.begin() + first;
  std::nth_element(begin, begin + half, begin + count, [&](std::size_t a, std::size_t b) {
    if (centroids[a][axis] != centroids[b][axis]) return centroids[a][axis] < centroids[b][axis];
    return a < b;
  });
  const int left = build(first, half, centroids);
  const int right = build(first + half, count - half, centroids);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

TriangleBvh::Hit TriangleBvh::closest(const Vec3& p) const {
  Hit best;
  best.dist2 = kInf;
  int stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (node.box.squaredExteriorDistance(p) >= best.dist2) continue;
    if (node.left < 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const Vec3 q = closest_point_on_triangle(p, tris_[i]);
        const double d2 = (p - q).squaredNorm();
        if (d2 < best.dist2 || (d2 == best.dist2 && face_of_[i] < best.face)) {
          best.dist2 = d2;
          best.point = q;
          best.face = face_of_[i];
        }
      }
      continue;
    }
    const double dl = nodes_[node.left].box.squaredExteriorDistance(p);
    const double dr = nodes_[node.right].box.squaredExteriorDistance(p);
    // Push the farther child first so the nearer one is explored next.
    if (dl <= dr) {
      stack[top++] = node.right;
      stack[top++] = node.left;
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  return best;
}

std::optional<double> TriangleBvh::raycast(const Vec3& origin, const Vec3& dir) const {
  const Vec3 inv = inverse_direction(dir);
  double best = kInf;
  int stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!ray_box(node.box, origin, inv, best)) continue;
    if (node.left < 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        if (auto t = ray_triangle(origin, dir, tris_[i]); t && *t < best) best = *t;
      }
      continue;
    }
    stack[top++] = node.right;
    stack[top++] = node.left;
  }
  if (best == kInf) return std::nullopt;
  return best;
}

int TriangleBvh::crossings(const Vec3& origin, const Vec3& dir) const {
  const Vec3 inv = inverse_direction(dir);
  int hits = 0;
  int stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!ray_box(node.box, origin, inv, kInf)) continue;
    if (node.left < 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        if (ray_triangle(origin, dir, tris_[i])) ++hits;
      }
      continue;
    }
    stack[top++] = node.right;
    stack[top++] = node.left;
  }
  return hits;
}

bool TriangleBvh::contains(const Vec3& p) const {
  // Slightly tilted axes keep rays off the edges of axis-aligned geometry.
  static const Vec3 kDirs[3] = {Vec3(1.0, 0.0123, 0.0071).normalized(),
                                Vec3(0.0093, 1.0, 0.0157).normalized(),
                                Vec3(0.0131, 0.0083, 1.0).normalized()};
  if (!bounds().contains(p)) return false;
  int inside_votes = 0;
  for (const Vec3& d : kDirs) inside_votes += crossings(p, d) % 2;
  return inside_votes >= 2;
}

// ---------------------------------------------------------------------------

PointBvh::PointBvh(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
  if (points_.empty()) return;
  index_of_.resize(points_.size());
  std::iota(index_of_.begin(), index_of_.end(), std::size_t{0});
  nodes_.reserve(2 * points_.size() / kPointLeaf + 2);
  build(0, static_cast<int>(points_.size()));
  std::vector<Vec3> ordered(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) ordered[i] = points_[index_of_[i]];
  points_ = std::move(ordered);
}

int PointBvh::build(int first, int count) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  Aabb box;
  for (int i = first; i < first + count; ++i) box.extend(points_[index_of_[i]]);
  nodes_[id].box = box;
  if (count <= kPointLeaf) {
    nodes_[id].first = first;
    nodes_[id].count = count;
    return id;
  }
  const int axis = split_axis(box);
  const int half = count / 2;
  auto begin = index_of_.begin() + first;
  std::nth_element(begin, begin + half, begin + count, [&](std::size_t a, std::size_t b) {
    if (points_[a][axis] != points_[b][axis]) return points_[a][axis] < points_[b][axis];
    return a < b;
  });
  const int left = build(first, half);
  const int right = build(first + half, count - half);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

PointBvh::Hit PointBvh::nearest(const Vec3& p) const {
  if (points_.empty()) throw Error("PointBvh: query on empty cloud");
  Hit best;
  best.dist2 = kInf;
  int stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (node.box.squaredExteriorDistance(p) >= best.dist2) continue;
    if (node.left < 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const double d2 = (points_[i] - p).squaredNorm();
        if (d2 < best.dist2 || (d2 == best.dist2 && index_of_[i] < best.index)) {
          best.dist2 = d2;
          best.index = index_of_[i];
        }
      }
      continue;
    }
    const double dl = nodes_[node.left].box.squaredExteriorDistance(p);
    const double dr = nodes_[node.right].box.squaredExteriorDistance(p);
    if (dl <= dr) {
      stack[top++] = node.right;
      stack[top++] = node.left;
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  return best;
}

PointBvh::TriangleHit PointBvh::nearest_to_triangle(const Triangle& tri) const {
  if (points_.empty()) throw Error("PointBvh: query on empty cloud");
  const Aabb tbox = triangle_box(tri);
  TriangleHit best;
  best.dist2 = kInf;
  int stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    // Box-to-box distance is a lower bound on any point-to-triangle distance.
    if (node.box.squaredExteriorDistance(tbox) >= best.dist2) continue;
    if (node.left < 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        if (tbox.squaredExteriorDistance(points_[i]) >= best.dist2) continue;
        const Vec3 q = closest_point_on_triangle(points_[i], tri);
        const double d2 = (points_[i] - q).squaredNorm();
        if (d2 < best.dist2 || (d2 == best.dist2 && index_of_[i] < best.index)) {
          best.dist2 = d2;
          best.index = index_of_[i];
          best.on_triangle = q;
        }
      }
      continue;
    }
    const double dl = nodes_[node.left].box.squaredExteriorDistance(tbox);
    const double dr = nodes_[node.right].box.squaredExteriorDistance(tbox);
    if (dl <= dr) {
      stack[top++] = node.right;
      stack[top++] = node.left;
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  return best;
}

}  // namespace graspref

#pragma once

#include "graspref/geometry.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace graspref {

using Face = std::array<int, 3>;

struct Triangle {
  Vec3 a, b, c;
};

/// Indexed triangle mesh with cached per-face areas.
///
/// Construction validates indices and rejects faces with area <= 1e-12 m^2.
/// Meshes are immutable; `transformed` returns a posed copy.
class TriangleMesh {
 public:
  TriangleMesh() = default;
  TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }
  const std::vector<double>& face_areas() const { return areas_; }
  std::size_t num_faces() const { return faces_.size(); }
  bool empty() const { return faces_.empty(); }

  double total_area() const { return total_area_; }
  Triangle triangle(std::size_t face) const;
  Vec3 face_normal(std::size_t face) const;
  Aabb bounds() const;

  // Every undirected edge is used exactly twice, once in each direction.
  bool is_closed() const;
  // Signed volume by the divergence theorem; positive for outward winding.
  double volume() const;

  TriangleMesh transformed(const Pose& pose) const;

 private:
  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
  std::vector<double> areas_;
  double total_area_ = 0.0;
};

struct PointCloud {
  std::vector<Vec3> points;
  std::vector<double> weights;  // empty or one per point

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

PointCloud transformed(const PointCloud& cloud, const Pose& pose);

struct ClosestPoint {
  double distance = 0.0;
  Vec3 point = Vec3::Zero();
};

// Exact closest point on the closed triangle. Throws on degenerate triangles.
ClosestPoint point_triangle_distance(const Vec3& p, const Triangle& tri);
// Same computation without the degeneracy check; used on validated meshes.
Vec3 closest_point_on_triangle(const Vec3& p, const Triangle& tri);

// Area-weighted uniform surface samples; deterministic for a fixed seed.
PointCloud sample_surface_points(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed);

// Face index drawn for each sample, exposed for statistical tests.
std::vector<std::size_t> sample_surface_faces(const TriangleMesh& mesh, std::size_t n,
                                              std::uint64_t seed);

// ---------------------------------------------------------------------------
// Built-in closed primitives, centred at the origin with outward winding.

TriangleMesh make_box(const Vec3& size);
TriangleMesh make_icosphere(double radius, int subdivisions);
TriangleMesh make_cylinder(double radius, double height, int segments);
TriangleMesh make_capsule(double radius, double length, int segments, int rings);
// Flattened bottle: elliptic cross-sections along z with a shoulder and cap.
TriangleMesh make_bottle(double height, double width, double depth, int segments);

// ---------------------------------------------------------------------------
// ASCII OBJ subset: `v` and `f` records, 1-based indices, polygons are
// fan-triangulated. Other records are ignored.

TriangleMesh load_obj(const std::filesystem::path& path);
void save_obj(const TriangleMesh& mesh, const std::filesystem::path& path);

}  // namespace graspref

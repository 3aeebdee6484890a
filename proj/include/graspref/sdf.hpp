#pragma once

#include "graspref/mesh.hpp"

#include <array>
#include <functional>
#include <vector>

namespace graspref {

/// Dense signed-distance samples on a regular grid (negative inside).
///
/// Node (i, j, k) sits at origin + cell * (i, j, k). Queries interpolate
/// trilinearly; the returned gradient is the exact derivative of that
/// interpolant. Points outside the node lattice are clamped onto it and the
/// `clamped` flag is raised; the returned value is then the boundary value,
/// and callers wanting a far-field estimate add `distance_outside`.
class SdfGrid {
 public:
  struct Sample {
    double value = 0.0;
    Vec3 gradient = Vec3::Zero();
    bool clamped = false;
    double distance_outside = 0.0;
  };

  SdfGrid() = default;
  SdfGrid(const Vec3& origin, double cell, const std::array<int, 3>& dims,
          std::vector<double> values);

  // Fills every node from `field(position)`.
  static SdfGrid sample(const Vec3& origin, double cell, const std::array<int, 3>& dims,
                        const std::function<double(const Vec3&)>& field);

  Sample query(const Vec3& p) const;
  double value(const Vec3& p) const { return query(p).value; }

  const Vec3& origin() const { return origin_; }
  double cell() const { return cell_; }
  const std::array<int, 3>& dims() const { return dims_; }
  const std::vector<double>& values() const { return values_; }
  Aabb bounds() const;
  Vec3 node_position(int i, int j, int k) const { return origin_ + cell_ * Vec3(i, j, k); }
  double node(int i, int j, int k) const {
    return values_[(static_cast<std::size_t>(k) * dims_[1] + j) * dims_[0] + i];
  }
  bool valid() const { return !values_.empty(); }

 private:
  Vec3 origin_ = Vec3::Zero();
  double cell_ = 0.0;
  std::array<int, 3> dims_{0, 0, 0};
  std::vector<double> values_;
};

// Grid over the mesh AABB grown by `padding`. |value| is the exact unsigned
// distance at each node; the sign comes from ray-parity voting. Throws
// "mesh not closed" for meshes whose sign is undefined.
SdfGrid build_sdf(const TriangleMesh& mesh, double cell, double padding);

inline SdfGrid::Sample sdf_query(const SdfGrid& grid, const Vec3& p) { return grid.query(p); }

}  // namespace graspref

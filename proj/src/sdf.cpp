#include "graspref/sdf.hpp"

#include "graspref/bvh.hpp"

#include <algorithm>
#include <cmath>

namespace graspref {

SdfGrid::SdfGrid(const Vec3& origin, double cell, const std::array<int, 3>& dims,
                 std::vector<double> values)
    : origin_(origin), cell_(cell), dims_(dims), values_(std::move(values)) {
  if (!(cell_ > 0.0)) throw Error("sdf: cell size must be positive");
  if (dims_[0] < 2 || dims_[1] < 2 || dims_[2] < 2) throw Error("sdf: grid needs >= 2 nodes per axis");
  const std::size_t expected =
      static_cast<std::size_t>(dims_[0]) * static_cast<std::size_t>(dims_[1]) * dims_[2];
  if (values_.size() != expected) throw Error("sdf: value count does not match dims");
}

SdfGrid SdfGrid::sample(const Vec3& origin, double cell, const std::array<int, 3>& dims,
                        const std::function<double(const Vec3&)>& field) {
  std::vector<double> values(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]);
  std::size_t n = 0;
  for (int k = 0; k < dims[2]; ++k) {
    for (int j = 0; j < dims[1]; ++j) {
      for (int i = 0; i < dims[0]; ++i) values[n++] = field(origin + cell * Vec3(i, j, k));
    }
  }
  return SdfGrid(origin, cell, dims, std::move(values));
}

Aabb SdfGrid::bounds() const {
  return Aabb(origin_, origin_ + cell_ * Vec3(dims_[0] - 1, dims_[1] - 1, dims_[2] - 1));
}

SdfGrid::Sample SdfGrid::query(const Vec3& p) const {
  Sample out;
  const Aabb box = bounds();
  Vec3 q = p;
  for (int a = 0; a < 3; ++a) q[a] = std::clamp(q[a], box.min()[a], box.max()[a]);
  if (q != p) {
    out.clamped = true;
    out.distance_outside = (q - p).norm();
  }
  const Vec3 local = (q - origin_) / cell_;
  int idx[3];
  double frac[3];
  for (int a = 0; a < 3; ++a) {
    idx[a] = std::clamp(static_cast<int>(std::floor(local[a])), 0, dims_[a] - 2);
    frac[a] = local[a] - idx[a];
  }
  const int i = idx[0], j = idx[1], k = idx[2];
  const double c000 = node(i, j, k), c100 = node(i + 1, j, k);
  const double c010 = node(i, j + 1, k), c110 = node(i + 1, j + 1, k);
  const double c001 = node(i, j, k + 1), c101 = node(i + 1, j, k + 1);
  const double c011 = node(i, j + 1, k + 1), c111 = node(i + 1, j + 1, k + 1);
  const double x = frac[0], y = frac[1], z = frac[2];

  const double c00 = c000 + x * (c100 - c000);
  const double c10 = c010 + x * (c110 - c010);
  const double c01 = c001 + x * (c101 - c001);
  const double c11 = c011 + x * (c111 - c011);
  const double c0 = c00 + y * (c10 - c00);
  const double c1 = c01 + y * (c11 - c01);
  out.value = c0 + z * (c1 - c0);

  const double dx = (1 - y) * (1 - z) * (c100 - c000) + y * (1 - z) * (c110 - c010) +
                    (1 - y) * z * (c101 - c001) + y * z * (c111 - c011);
  const double dy = (1 - z) * (c10 - c00) + z * (c11 - c01);
  const double dz = c1 - c0;
  out.gradient = Vec3(dx, dy, dz) / cell_;
  return out;
}

SdfGrid build_sdf(const TriangleMesh& mesh, double cell, double padding) {
  if (!(cell > 0.0)) throw Error("build_sdf: cell must be > 0");
  if (mesh.empty()) throw Error("build_sdf: empty mesh");
  if (!mesh.is_closed()) throw Error("build_sdf: mesh not closed");
  const TriangleBvh tree(mesh);
  Aabb box = mesh.bounds();
  box.min().array() -= padding;
  box.max().array() += padding;
  std::array<int, 3> dims{};
  for (int a = 0; a < 3; ++a) {
    dims[a] = std::max(2, static_cast<int>(std::ceil(box.sizes()[a] / cell)) + 1);
  }
  return SdfGrid::sample(box.min(), cell, dims, [&](const Vec3& p) {
    const double d = tree.distance(p);
    return tree.contains(p) ? -d : d;
  });
}

}  // namespace graspref

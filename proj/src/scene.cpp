#include "graspref/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace graspref {

namespace {

TriangleMesh concatenate_posed(const std::vector<HandLink>& links) {
  std::vector<Vec3> verts;
  std::vector<Face> faces;
  for (const HandLink& link : links) {
    const int base = static_cast<int>(verts.size());
    for (const Vec3& v : link.mesh.vertices()) verts.push_back(link.pose.transform(v));
    for (const Face& f : link.mesh.faces()) faces.push_back({f[0] + base, f[1] + base, f[2] + base});
  }
  return TriangleMesh(std::move(verts), std::move(faces));
}

}  // namespace

HandModel::HandModel(std::vector<HandLink> links, HandSdfOptions options)
    : links_(std::move(links)), options_(options) {
  if (links_.empty()) throw Error("hand: no links");
  if (!(options_.cell > 0.0) || options_.padding < 0.0) throw Error("hand: invalid SDF options");

  // Per-link grids in link frames, then a world grid of their minimum.
  std::vector<SdfGrid> local;
  local.reserve(links_.size());
  Aabb world_box;
  for (const HandLink& link : links_) {
    if (!link.mesh.is_closed()) throw Error("hand: link '" + link.name + "' mesh not closed");
    local.push_back(build_sdf(link.mesh, options_.cell, options_.padding));
    link_trees_.emplace_back(link.mesh);
    for (const Vec3& v : link.mesh.vertices()) world_box.extend(link.pose.transform(v));
  }
  world_box.min().array() -= options_.padding;
  world_box.max().array() += options_.padding;
  std::array<int, 3> dims{};
  for (int a = 0; a < 3; ++a) {
    dims[a] = std::max(2, static_cast<int>(std::ceil(world_box.sizes()[a] / options_.cell)) + 1);
  }
  sdf_ = SdfGrid::sample(world_box.min(), options_.cell, dims, [&](const Vec3& p) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < links_.size(); ++l) {
      const Vec3 q = links_[l].pose.inverse_transform(p);
      const SdfGrid::Sample s = local[l].query(q);
      // Beyond the padded link grid the point is outside the link.
      best = std::min(best, s.clamped ? link_trees_[l].distance(q) : s.value);
    }
    return best;
  });

  surface_ = concatenate_posed(links_);
  surface_tree_ = TriangleBvh(surface_);
}

double HandModel::link_signed_distance(std::size_t link, const Vec3& p) const {
  const Vec3 local = links_.at(link).pose.inverse_transform(p);
  const double d = link_trees_[link].distance(local);
  return link_trees_[link].contains(local) ? -d : d;
}

double HandModel::signed_distance(const Vec3& p) const {
  const SdfGrid::Sample s = sdf_.query(p);
  return s.value + s.distance_outside;
}

PointCloud tactile_contact_points(const Observation& obs, double gamma) {
  if (gamma < 0.0) throw Error("tactile_contact_points: gamma must be >= 0");
  PointCloud cloud;
  for (const TactileReading& r : obs.tactile) {
    if (r.force.norm() > gamma) cloud.points.push_back(r.position);
  }
  return cloud;
}

}  // namespace graspref

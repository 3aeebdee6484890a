#pragma once

#include "graspref/bvh.hpp"
#include "graspref/camera.hpp"
#include "graspref/sdf.hpp"

#include <memory>
#include <string>
#include <vector>

namespace graspref {

struct HandLink {
  std::string name;
  std::string mesh_file;  // reference used by the scene file, relative to it
  TriangleMesh mesh;      // link-local frame
  Pose pose;              // world from link
};

struct HandSdfOptions {
  double cell = 0.0025;
  double padding = 0.02;
};

/// Fixed, posed assembly of closed link meshes.
///
/// Holds a world-frame union SDF (min over per-link SDFs), the concatenated
/// posed surface, and a tree over that surface for exact distances.
/// Immutable after construction.
class HandModel {
 public:
  explicit HandModel(std::vector<HandLink> links, HandSdfOptions options = {});

  const std::vector<HandLink>& links() const { return links_; }
  const HandSdfOptions& sdf_options() const { return options_; }
  const SdfGrid& sdf() const { return sdf_; }
  const TriangleMesh& surface() const { return surface_; }

  // Exact unsigned distance to the union of posed link surfaces.
  double surface_distance(const Vec3& p) const { return surface_tree_.distance(p); }
  // Signed distance to one link, from its exact mesh distance and parity sign.
  double link_signed_distance(std::size_t link, const Vec3& p) const;
  // Union SDF value with the far-field distance added outside the grid.
  double signed_distance(const Vec3& p) const;

 private:
  std::vector<HandLink> links_;
  HandSdfOptions options_;
  std::vector<TriangleBvh> link_trees_;
  SdfGrid sdf_;
  TriangleMesh surface_;
  TriangleBvh surface_tree_;
};

struct TactileReading {
  Vec3 position = Vec3::Zero();  // world, meters
  Vec3 normal = Vec3::UnitZ();   // unit
  Vec3 force = Vec3::Zero();     // internal units

  bool operator==(const TactileReading&) const = default;
};

struct Observation {
  Camera camera;
  DepthImage depth;
  Mask mask;  // object pixels with hand occlusion already carved out
  std::vector<TactileReading> tactile;
};

struct SceneSample {
  std::string id;
  std::uint64_t seed = 0;
  std::shared_ptr<const HandModel> hand;
  TriangleMesh object;  // object-local frame
  std::string object_mesh_file = "object.obj";
  Observation observation;
  Pose gt_pose;
  Pose initial_pose;
  double occlusion_fraction = 0.0;  // object pixels hidden by the hand
};

// Positions of readings with |force| > gamma (strict); may be empty.
PointCloud tactile_contact_points(const Observation& obs, double gamma);

inline double hand_surface_distance(const HandModel& hand, const Vec3& p) {
  return hand.surface_distance(p);
}

}  // namespace graspref

#pragma once

#include "graspref/bvh.hpp"

namespace graspref {

struct ChamferResult {
  double loss = 0.0;
  double points_to_mesh = 0.0;  // mean over points of squared distance to nearest face
  double mesh_to_points = 0.0;  // mean over faces of squared distance to nearest point
  Vec6 gradient = Vec6::Zero();
};

/// Symmetric mean-squared chamfer between a world-frame cloud and an
/// object-local mesh placed by a pose.
///
/// Both acceleration trees are built once: the mesh tree lives in the object
/// frame (cloud points are pulled back by the inverse pose) and the cloud tree
/// lives in the world frame (faces are pushed forward). The gradient is taken
/// over the tangent coordinates of `apply_step` with nearest-element
/// assignments held fixed at the evaluation pose.
class ChamferEvaluator {
 public:
  ChamferEvaluator(const PointCloud& cloud, const TriangleMesh& mesh);

  double loss(const Pose& pose) const { return evaluate(pose, false).loss; }
  ChamferResult evaluate(const Pose& pose, bool with_gradient = true) const;

 private:
  std::vector<Vec3> points_;
  TriangleMesh mesh_;
  TriangleBvh mesh_tree_;
  PointBvh cloud_tree_;
};

// Throws "empty operand" when either side is empty.
double chamfer_loss(const PointCloud& cloud, const TriangleMesh& mesh, const Pose& pose);
Vec6 chamfer_gradient(const PointCloud& cloud, const TriangleMesh& mesh, const Pose& pose);

}  // namespace graspref

#include "graspref/chamfer.hpp"

namespace graspref {

namespace {

const PointCloud& require_nonempty(const PointCloud& cloud, const TriangleMesh& mesh) {
  if (cloud.empty() || mesh.empty()) throw Error("chamfer: empty operand");
  return cloud;
}

}  // namespace

ChamferEvaluator::ChamferEvaluator(const PointCloud& cloud, const TriangleMesh& mesh)
    : points_(require_nonempty(cloud, mesh).points),
      mesh_(mesh),
      mesh_tree_(mesh),
      cloud_tree_(points_) {}

ChamferResult ChamferEvaluator::evaluate(const Pose& pose, bool with_gradient) const {
  ChamferResult out;
  const Mat3 rot = pose.rotation_matrix();
  const Vec3& t = pose.translation();
  Vec3 grad_t = Vec3::Zero();
  Vec3 grad_r = Vec3::Zero();

  // A pair (fixed world point p, material point c on the posed mesh) adds
  // |c - p|^2; moving the mesh by (dt, dr) moves c by dt + dr x (c - t).
  const auto accumulate = [&](const Vec3& c, const Vec3& p, double weight, Vec3& gt, Vec3& gr) {
    const Vec3 g = 2.0 * weight * (c - p);
    gt += g;
    gr += (c - t).cross(g);
  };

  const double inv_points = 1.0 / static_cast<double>(points_.size());
  Vec3 term_t = Vec3::Zero();
  Vec3 term_r = Vec3::Zero();
  double sum = 0.0;
  for (const Vec3& p : points_) {
    const TriangleBvh::Hit hit = mesh_tree_.closest(pose.inverse_transform(p));
    sum += hit.dist2;
    if (with_gradient) accumulate(rot * hit.point + t, p, inv_points, term_t, term_r);
  }
  out.points_to_mesh = sum * inv_points;
  grad_t += term_t;
  grad_r += term_r;

  const double inv_faces = 1.0 / static_cast<double>(mesh_.num_faces());
  term_t.setZero();
  term_r.setZero();
  sum = 0.0;
  const auto& verts = mesh_.vertices();
  for (const Face& f : mesh_.faces()) {
    const Triangle world{rot * verts[f[0]] + t, rot * verts[f[1]] + t, rot * verts[f[2]] + t};
    const PointBvh::TriangleHit hit = cloud_tree_.nearest_to_triangle(world);
    sum += hit.dist2;
    if (with_gradient) accumulate(hit.on_triangle, points_[hit.index], inv_faces, term_t, term_r);
  }
  out.mesh_to_points = sum * inv_faces;
  grad_t += term_t;
  grad_r += term_r;

  out.loss = out.points_to_mesh + out.mesh_to_points;
  out.gradient << grad_t, grad_r;
  return out;
}

double chamfer_loss(const PointCloud& cloud, const TriangleMesh& mesh, const Pose& pose) {
  return ChamferEvaluator(cloud, mesh).loss(pose);
}

Vec6 chamfer_gradient(const PointCloud& cloud, const TriangleMesh& mesh, const Pose& pose) {
  return ChamferEvaluator(cloud, mesh).evaluate(pose, true).gradient;
}

}  // namespace graspref

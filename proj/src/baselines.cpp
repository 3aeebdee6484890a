#include "graspref/baselines.hpp"

#include "graspref/bvh.hpp"

#include <Eigen/SVD>

#include <limits>

namespace graspref {

namespace {

PointCloud depth_cloud(const SceneSample& sample) {
  const Observation& obs = sample.observation;
  PointCloud cloud = backproject_depth(obs.depth, obs.camera, obs.mask);
  if (cloud.points.size() < 3) throw Error("icp: fewer than 3 valid depth points");
  return cloud;
}

std::vector<Vec3> model_points(const SceneSample& sample, const IcpConfig& cfg) {
  return sample_surface_points(sample.object, cfg.model_samples, cfg.seed).points;
}

}  // namespace

Pose best_fit_transform(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  if (a.size() != b.size() || a.empty()) throw Error("best_fit_transform: mismatched point sets");
  Vec3 ca = Vec3::Zero();
  Vec3 cb = Vec3::Zero();
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca += a[i];
    cb += b[i];
  }
  ca /= static_cast<double>(a.size());
  cb /= static_cast<double>(b.size());
  Mat3 h = Mat3::Zero();
  for (std::size_t i = 0; i < a.size(); ++i) h += (a[i] - ca) * (b[i] - cb).transpose();
  const Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  const Mat3 r = svd.matrixV() * d * svd.matrixU().transpose();
  return Pose(cb - r * ca, Quat(r));
}

IcpResult icp_align(const PointCloud& cloud, const std::vector<Vec3>& model, const Pose& initial,
                    const IcpConfig& cfg, bool full_budget) {
  if (cloud.points.size() < 3) throw Error("icp: fewer than 3 valid depth points");
  if (model.empty()) throw Error("icp: no model points");
  if (cfg.max_iterations < 1) throw Error("icp: max iterations must be >= 1");
  const PointBvh tree(cloud.points);
  const double cap2 = cfg.max_correspondence_distance * cfg.max_correspondence_distance;

  IcpResult result;
  result.pose = initial;
  result.trajectory.push_back(initial);
  std::vector<Vec3> src;
  std::vector<Vec3> dst;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    src.clear();
    dst.clear();
    double sse = 0.0;
    for (const Vec3& x : model) {
      const Vec3 y = result.pose.transform(x);
      const PointBvh::Hit hit = tree.nearest(y);
      if (hit.dist2 > cap2) continue;
      src.push_back(y);
      dst.push_back(cloud.points[hit.index]);
      sse += hit.dist2;
    }
    if (src.size() < 3) break;
    result.mse.push_back(sse / static_cast<double>(src.size()));
    const Pose delta = best_fit_transform(src, dst);
    double motion = 0.0;
    for (const Vec3& y : src) motion += (delta.transform(y) - y).norm();
    motion /= static_cast<double>(src.size());
    result.pose = delta * result.pose;
    result.trajectory.push_back(result.pose);
    result.iterations = it + 1;
    if (!full_budget && motion < cfg.tolerance) break;
  }
  return result;
}

Pose icp_refine(const SceneSample& sample, const Pose& pose, const IcpConfig& cfg) {
  return icp_align(depth_cloud(sample), model_points(sample, cfg), pose, cfg).pose;
}

Pose icp_with_checkpointing(const SceneSample& sample, const Pose& pose, const IcpConfig& cfg,
                            const RenderConfig& render) {
  const IcpResult run = icp_align(depth_cloud(sample), model_points(sample, cfg), pose, cfg, true);
  const RenderComparator cmp(sample.object, sample.observation.camera, sample.observation.mask, render,
                             sample.hand.get());
  double best = std::numeric_limits<double>::infinity();
  Pose best_pose = pose;
  for (const Pose& p : run.trajectory) {
    const double l = cmp.loss(p);
    if (l < best) {
      best = l;
      best_pose = p;
    }
  }
  return best_pose;
}

}  // namespace graspref

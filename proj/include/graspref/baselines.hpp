#pragma once

#include "graspref/render.hpp"
#include "graspref/scene.hpp"

#include <vector>

namespace graspref {

struct IcpConfig {
  int max_iterations = 50;
  double tolerance = 1e-5;  // m, mean correspondence motion
  double max_correspondence_distance = 0.05;
  std::size_t model_samples = 4096;
  std::uint64_t seed = 0;
};

struct IcpResult {
  Pose pose;
  std::vector<Pose> trajectory;  // initial pose first, then every iterate
  std::vector<double> mse;       // correspondence MSE before each update
  int iterations = 0;
};

// Least-squares rigid transform (b ≈ R a + t) with reflection correction.
Pose best_fit_transform(const std::vector<Vec3>& a, const std::vector<Vec3>& b);

// Point-to-point ICP moving object-local `model` points (placed by the pose)
// onto the world cloud. With `full_budget` the tolerance test is skipped.
IcpResult icp_align(const PointCloud& cloud, const std::vector<Vec3>& model, const Pose& initial,
                    const IcpConfig& cfg, bool full_budget = false);

Pose icp_refine(const SceneSample& sample, const Pose& pose, const IcpConfig& cfg = {});
Pose icp_with_checkpointing(const SceneSample& sample, const Pose& pose, const IcpConfig& cfg = {},
                            const RenderConfig& render = {});

}  // namespace graspref

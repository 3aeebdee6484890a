#pragma once

#include "graspref/scene.hpp"

namespace graspref {

struct MetricsConfig {
  double contact_epsilon = 0.005;  // m
  std::size_t contact_samples = 100000;
  std::size_t volume_samples = 100000;
  std::uint64_t seed = 0;
};

struct MetricsReport {
  double pe = 0.0;        // cm
  double oe = 0.0;        // degrees
  double ca = 0.0;        // cm^2
  double iv = 0.0;        // cm^3
  double delta_ca = 0.0;  // cm^2
  double delta_iv = 0.0;  // cm^3
};

struct GraspGeometry {
  double ca = 0.0;  // cm^2
  double iv = 0.0;  // cm^3
};

double position_error(const Pose& est, const Pose& gt);
double orientation_error(const Quat& est, const Quat& gt);

/// Monte-Carlo contact area and intersection volume of one object against
/// hands, using a seeded low-discrepancy sequence. Surface and interior samples are drawn once in the object frame, so
/// every pose evaluated through one instance shares them.
class MetricsEvaluator {
 public:
  MetricsEvaluator(const TriangleMesh& object, const MetricsConfig& cfg);

  double contact_area(const HandModel& hand, const Pose& pose) const;
  double intersection_volume(const HandModel& hand, const Pose& pose) const;
  GraspGeometry geometry(const HandModel& hand, const Pose& pose) const;
  MetricsReport evaluate(const HandModel& hand, const Pose& est, const Pose& gt) const;
  // Same as evaluate, reusing ground-truth CA/IV computed with this instance.
  MetricsReport evaluate(const HandModel& hand, const Pose& est, const Pose& gt,
                         const GraspGeometry& gt_geometry) const;

  double object_area() const { return area_; }
  double object_volume() const { return volume_; }

 private:
  MetricsConfig cfg_;
  std::vector<Vec3> surface_;
  std::vector<Vec3> interior_;
  double area_ = 0.0;
  double volume_ = 0.0;
};

// Points inside a closed mesh by rejection of a seeded low-discrepancy
// sequence over its bounding box.
std::vector<Vec3> sample_interior_points(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed);

double contact_area(const SceneSample& sample, const Pose& pose, double epsilon = 0.005,
                    std::size_t n = 100000, std::uint64_t seed = 0);
double intersection_volume(const SceneSample& sample, const Pose& pose, std::size_t n = 100000,
                           std::uint64_t seed = 0);
MetricsReport evaluate(const SceneSample& sample, const Pose& pose, const Pose& gt_pose,
                       const MetricsConfig& cfg = {});

}  // namespace graspref

#pragma once

#include "graspref/chamfer.hpp"
#include "graspref/render.hpp"
#include "graspref/scene.hpp"

#include <array>
#include <optional>
#include <string_view>

namespace graspref {

enum class Source : int { physics = 0, render = 1, depth = 2, tactile = 3 };

inline constexpr std::size_t kSourceCount = 4;
inline constexpr std::array<Source, kSourceCount> kAllSources{Source::physics, Source::render,
                                                              Source::depth, Source::tactile};

std::string_view source_name(Source s);
std::optional<Source> parse_source(std::string_view name);
inline std::size_t index_of(Source s) { return static_cast<std::size_t>(s); }

struct LossGradient {
  Source source = Source::physics;
  double loss = 0.0;
  Vec6 grad = Vec6::Zero();
  bool valid = false;
};

struct PhysicsConfig {
  double lambda = 0.05;       // translation regularizer, per m^2
  bool regularize = true;
  double leak_slope = 1e-3;   // per m
  double leak_width = 0.01;   // m
  int samples = 512;
  double stiffness = 300.0;   // penetration penalty k in k * s^2, per m^2
  std::uint64_t seed = 0;

  void validate() const;
};

// Penalty energy of one surface sample at hand signed distance s.
double penetration_energy(const PhysicsConfig& cfg, double s);
double penetration_energy_slope(const PhysicsConfig& cfg, double s);

// Uses cfg.seed to draw the object surface samples.
LossGradient physics_loss_grad(const SceneSample& sample, const Pose& pose, const Pose& anchor,
                               const PhysicsConfig& cfg);
SoftMask render_silhouette(const SceneSample& sample, const Pose& pose, const RenderConfig& cfg);
LossGradient render_loss_grad(const SceneSample& sample, const Pose& pose, const RenderConfig& cfg);
LossGradient depth_loss_grad(const SceneSample& sample, const Pose& pose);
LossGradient tactile_loss_grad(const SceneSample& sample, const Pose& pose, double gamma);

// Seed of the physics sample set used at one optimizer iteration.
std::uint64_t physics_iteration_seed(std::uint64_t seed, std::uint64_t iteration);

/// All four sources over one scene with their acceleration structures built
/// once. Evaluation is const and thread-safe.
class GradientSources {
 public:
  GradientSources(const SceneSample& sample, const PhysicsConfig& physics, const RenderConfig& render,
                  double gamma, const Pose& anchor);

  bool available(Source s) const;
  LossGradient evaluate(Source s, const Pose& pose, std::uint64_t iteration) const;
  double loss(Source s, const Pose& pose, std::uint64_t iteration) const;

  const RenderComparator& renderer() const { return render_; }

 private:
  LossGradient physics(const Pose& pose, std::uint64_t iteration, bool with_gradient) const;
  LossGradient chamfer(Source s, const std::optional<ChamferEvaluator>& eval, const Pose& pose,
                       bool with_gradient) const;

  const SceneSample& sample_;
  PhysicsConfig physics_;
  Pose anchor_;
  RenderComparator render_;
  std::optional<ChamferEvaluator> depth_;
  std::optional<ChamferEvaluator> tactile_;
};

}  // namespace graspref

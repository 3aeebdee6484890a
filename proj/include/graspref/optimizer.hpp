#pragma once

#include "graspref/gradients.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace graspref {

struct StepSizes {
  double translation = 5e-4;  // m per unit normalized gradient
  double rotation = 2e-3;     // rad per unit normalized gradient
};

enum class Weighting { proportional, hard_select };

struct RefinementConfig {
  int max_iterations = 400;
  std::array<bool, kSourceCount> enabled{true, true, true, true};
  std::array<StepSizes, kSourceCount> step_sizes{};
  PhysicsConfig physics;
  RenderConfig render;
  double gamma = 1.0;  // tactile force threshold
  bool checkpointing = true;
  Weighting weighting = Weighting::proportional;
  std::uint64_t seed = 0;  // physics sample sets derive from this

  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  Pose pose;  // pose at which this iteration's losses were evaluated
  std::array<double, kSourceCount> losses{};  // NaN for disabled or invalid sources
  std::array<double, kSourceCount> deltas{};  // NaN for sources that took no trial step
  std::array<double, kSourceCount> alphas{};
  double update_norm = 0.0;
  bool checkpoint = false;  // new running minimum of the rendering loss
};

using IterationTrace = std::vector<IterationRecord>;

enum class Termination { budget, no_improvement };

struct RefinementResult {
  Pose final_pose;  // checkpoint pose or last pose, per the config
  Pose last_pose;
  Pose checkpoint_pose;
  int checkpoint_iteration = 0;
  int iterations = 0;
  Termination termination = Termination::budget;
  IterationTrace trace;
};

// Each of the translation and rotation blocks of the gradient is scaled to
// unit length before the step sizes apply; a zero block gives no motion.
TangentStep candidate_step(const LossGradient& g, const StepSizes& sizes);

// NaN entries are sources that are excluded (invalid or disabled).
std::vector<double> heuristic_weights(std::span<const double> deltas,
                                      Weighting mode = Weighting::proportional);

RefinementResult refine(const SceneSample& sample, const RefinementConfig& cfg);
RefinementResult refine(const SceneSample& sample, const Pose& initial, const RefinementConfig& cfg);

Pose checkpoint_select(const IterationTrace& trace);
std::size_t checkpoint_index(const IterationTrace& trace);

void write_trace_csv(const IterationTrace& trace, std::ostream& out);

}  // namespace graspref

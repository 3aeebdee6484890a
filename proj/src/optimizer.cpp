#include "graspref/optimizer.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace graspref {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Vec3 unit_or_zero(const Vec3& v) {
  const double n = v.norm();
  return n > 0.0 ? Vec3(v / n) : Vec3::Zero();
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void RefinementConfig::validate() const {
  if (max_iterations < 1) throw Error("refine: max iterations must be >= 1");
  for (const StepSizes& s : step_sizes) {
    if (!(s.translation > 0.0) || !(s.rotation > 0.0)) throw Error("refine: step sizes must be > 0");
  }
  if (!(gamma >= 0.0)) throw Error("refine: gamma must be >= 0");
  bool any = false;
  for (bool e : enabled) any = any || e;
  if (!any) throw Error("refine: no gradient source enabled");
  physics.validate();
  render.validate();
}

TangentStep candidate_step(const LossGradient& g, const StepSizes& sizes) {
  if (!g.valid) return {};
  return {-sizes.translation * unit_or_zero(g.grad.head<3>()),
          -sizes.rotation * unit_or_zero(g.grad.tail<3>())};
}

std::vector<double> heuristic_weights(std::span<const double> deltas, Weighting mode) {
  std::vector<double> w(deltas.size(), 0.0);
  double total = 0.0;
  std::size_t best = deltas.size();
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (std::isnan(deltas[i])) continue;
    w[i] = std::max(0.0, -deltas[i]);
    total += w[i];
    if (w[i] > 0.0 && (best == deltas.size() || w[i] > w[best])) best = i;
  }
  if (!(total > 0.0)) return std::vector<double>(deltas.size(), 0.0);
  if (mode == Weighting::hard_select) {
    std::vector<double> hard(deltas.size(), 0.0);
    hard[best] = 1.0;
    return hard;
  }
  for (double& x : w) x /= total;
  return w;
}

RefinementResult refine(const SceneSample& sample, const RefinementConfig& cfg) {
  return refine(sample, sample.initial_pose, cfg);
}

RefinementResult refine(const SceneSample& sample, const Pose& initial, const RefinementConfig& cfg) {
  cfg.validate();
  PhysicsConfig physics = cfg.physics;
  physics.seed = cfg.seed;
  const GradientSources sources(sample, physics, cfg.render, cfg.gamma, initial);

  RefinementResult result;
  Pose pose = initial;
  double best_render = std::numeric_limits<double>::infinity();
  for (int it = 0; it < cfg.max_iterations; ++it) {
    const auto iter = static_cast<std::uint64_t>(it);
    IterationRecord rec;
    rec.iteration = it;
    rec.pose = pose;
    rec.losses.fill(kNaN);
    rec.deltas.fill(kNaN);
    rec.alphas.fill(0.0);

    std::array<TangentStep, kSourceCount> steps{};
    for (Source s : kAllSources) {
      const std::size_t i = index_of(s);
      if (!cfg.enabled[i] || !sources.available(s)) continue;
      const LossGradient g = sources.evaluate(s, pose, iter);
      rec.losses[i] = g.loss;
      steps[i] = candidate_step(g, cfg.step_sizes[i]);
      if (steps[i].is_zero()) continue;
      rec.deltas[i] = sources.loss(s, apply_step(pose, steps[i]), iter) - g.loss;
    }
    const std::size_t ri = index_of(Source::render);
    if (std::isnan(rec.losses[ri])) rec.losses[ri] = sources.loss(Source::render, pose, iter);
    if (rec.losses[ri] < best_render) {
      best_render = rec.losses[ri];
      rec.checkpoint = true;
    }

    const std::vector<double> alphas = heuristic_weights(rec.deltas, cfg.weighting);
    Vec6 update = Vec6::Zero();
    for (std::size_t i = 0; i < kSourceCount; ++i) {
      rec.alphas[i] = alphas[i];
      if (alphas[i] > 0.0) update += alphas[i] * steps[i].as_vector();
    }
    rec.update_norm = update.norm();
    result.trace.push_back(rec);
    if (rec.update_norm == 0.0) {
      result.termination = Termination::no_improvement;
      break;
    }
    pose = apply_step(pose, TangentStep::from_vector(update));
  }

  result.iterations = static_cast<int>(result.trace.size());
  result.checkpoint_iteration = static_cast<int>(checkpoint_index(result.trace));
  result.checkpoint_pose = result.trace[result.checkpoint_iteration].pose;
  result.last_pose = pose;
  result.final_pose = cfg.checkpointing ? result.checkpoint_pose : pose;
  return result;
}

std::size_t checkpoint_index(const IterationTrace& trace) {
  if (trace.empty()) throw Error("checkpoint_select: empty trace");
  const std::size_t ri = index_of(Source::render);
  std::size_t best = 0;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace[i].losses[ri] < trace[best].losses[ri]) best = i;
  }
  return best;
}

Pose checkpoint_select(const IterationTrace& trace) { return trace[checkpoint_index(trace)].pose; }

void write_trace_csv(const IterationTrace& trace, std::ostream& out) {
  out << "iter";
  for (const char* group : {"loss", "delta", "alpha"}) {
    for (Source s : kAllSources) out << ',' << group << '_' << source_name(s);
  }
  out << ",tx,ty,tz,qw,qx,qy,qz,checkpoint\n";
  for (const IterationRecord& r : trace) {
    out << r.iteration;
    for (double v : r.losses) out << ',' << fmt(v);
    for (double v : r.deltas) out << ',' << fmt(v);
    for (double v : r.alphas) out << ',' << fmt(v);
    const Vec3& t = r.pose.translation();
    const Quat& q = r.pose.rotation();
    for (double v : {t.x(), t.y(), t.z(), q.w(), q.x(), q.y(), q.z()}) out << ',' << fmt(v);
    out << ',' << (r.checkpoint ? 1 : 0) << '\n';
  }
}

}  // namespace graspref

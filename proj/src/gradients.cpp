#include "graspref/gradients.hpp"

#include <cmath>
#include <random>

namespace graspref {

namespace {

const HandModel& require_hand(const SceneSample& sample) {
  if (!sample.hand || !sample.hand->sdf().valid()) throw Error("physics: hand SDF missing");
  return *sample.hand;
}

LossGradient physics_eval(const HandModel& hand, const TriangleMesh& object, const Pose& pose,
                          const Pose& anchor, const PhysicsConfig& cfg, std::uint64_t seed,
                          bool with_gradient) {
  const PointCloud local = sample_surface_points(object, static_cast<std::size_t>(cfg.samples), seed);
  const SdfGrid& sdf = hand.sdf();
  const Vec3& t = pose.translation();
  double sum = 0.0;
  Vec3 gt = Vec3::Zero();
  Vec3 gr = Vec3::Zero();
  for (const Vec3& x : local.points) {
    const Vec3 y = pose.transform(x);
    const SdfGrid::Sample q = sdf.query(y);
    const double s = q.value + q.distance_outside;
    sum += penetration_energy(cfg, s);
    if (!with_gradient || q.clamped) continue;
    const double slope = penetration_energy_slope(cfg, s);
    if (slope == 0.0) continue;
    gt += slope * q.gradient;
    gr += slope * (y - t).cross(q.gradient);
  }
  const double m = static_cast<double>(local.points.size());
  LossGradient out{Source::physics, sum / m, Vec6::Zero(), true};
  if (with_gradient) out.grad << gt / m, gr / m;
  if (cfg.regularize) {
    const Vec3 dt = t - anchor.translation();
    out.loss += cfg.lambda * dt.squaredNorm();
    if (with_gradient) out.grad.head<3>() += 2.0 * cfg.lambda * dt;
  }
  return out;
}

// Empty when no masked pixel carries a valid depth.
PointCloud depth_cloud(const Observation& obs) {
  for (std::size_t i = 0; i < obs.mask.data.size() && i < obs.depth.data.size(); ++i) {
    const double z = obs.depth.data[i];
    if (obs.mask.data[i] && std::isfinite(z) && z > 0.0) return backproject_depth(obs.depth, obs.camera, obs.mask);
  }
  return {};
}

LossGradient chamfer_eval(Source s, const ChamferEvaluator& eval, const Pose& pose, bool with_gradient) {
  const ChamferResult r = eval.evaluate(pose, with_gradient);
  return {s, r.loss, r.gradient, true};
}

}  // namespace

std::string_view source_name(Source s) {
  switch (s) {
    case Source::physics: return "physics";
    case Source::render: return "render";
    case Source::depth: return "depth";
    case Source::tactile: return "tactile";
  }
  return "unknown";
}

std::optional<Source> parse_source(std::string_view name) {
  for (Source s : kAllSources) {
    if (source_name(s) == name) return s;
  }
  return std::nullopt;
}

void PhysicsConfig::validate() const {
  if (!(lambda >= 0.0)) throw Error("physics: lambda must be >= 0");
  if (!(leak_width > 0.0)) throw Error("physics: leak width must be > 0");
  if (!(leak_slope >= 0.0)) throw Error("physics: leak slope must be >= 0");
  if (samples < 1) throw Error("physics: sample count must be >= 1");
  if (!(stiffness > 0.0)) throw Error("physics: stiffness must be > 0");
}

double penetration_energy(const PhysicsConfig& cfg, double s) {
  if (s < 0.0) return cfg.stiffness * s * s;
  if (s < cfg.leak_width) return cfg.leak_slope * s;
  return cfg.leak_slope * cfg.leak_width;
}

double penetration_energy_slope(const PhysicsConfig& cfg, double s) {
  if (s < 0.0) return 2.0 * cfg.stiffness * s;
  if (s < cfg.leak_width) return cfg.leak_slope;
  return 0.0;
}

std::uint64_t physics_iteration_seed(std::uint64_t seed, std::uint64_t iteration) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(iteration), static_cast<std::uint32_t>(iteration >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

LossGradient physics_loss_grad(const SceneSample& sample, const Pose& pose, const Pose& anchor,
                               const PhysicsConfig& cfg) {
  cfg.validate();
  return physics_eval(require_hand(sample), sample.object, pose, anchor, cfg, cfg.seed, true);
}

SoftMask render_silhouette(const SceneSample& sample, const Pose& pose, const RenderConfig& cfg) {
  cfg.validate();
  const Camera& cam = sample.observation.camera;
  cam.validate();
  return SilhouetteRenderer(sample.object).render(cam.downsampled(cfg.scale), pose, cfg.edge_softness, cfg.scale);
}

LossGradient render_loss_grad(const SceneSample& sample, const Pose& pose, const RenderConfig& cfg) {
  const RenderComparator cmp(sample.object, sample.observation.camera, sample.observation.mask, cfg,
                             sample.hand.get());
  return {Source::render, cmp.loss(pose), cmp.gradient(pose), true};
}

LossGradient depth_loss_grad(const SceneSample& sample, const Pose& pose) {
  const PointCloud cloud = depth_cloud(sample.observation);
  if (cloud.points.empty()) return {Source::depth};
  return chamfer_eval(Source::depth, ChamferEvaluator(cloud, sample.object), pose, true);
}

LossGradient tactile_loss_grad(const SceneSample& sample, const Pose& pose, double gamma) {
  const PointCloud contacts = tactile_contact_points(sample.observation, gamma);
  if (contacts.points.empty()) return {Source::tactile};
  return chamfer_eval(Source::tactile, ChamferEvaluator(contacts, sample.object), pose, true);
}

GradientSources::GradientSources(const SceneSample& sample, const PhysicsConfig& physics,
                                 const RenderConfig& render, double gamma, const Pose& anchor)
    : sample_(sample), physics_(physics), anchor_(anchor),
      render_(sample.object, sample.observation.camera, sample.observation.mask, render, sample.hand.get()) {
  physics_.validate();
  require_hand(sample);
  const Observation& obs = sample.observation;
  const PointCloud cloud = depth_cloud(obs);
  if (!cloud.points.empty()) depth_.emplace(cloud, sample.object);
  const PointCloud contacts = tactile_contact_points(obs, gamma);
  if (!contacts.points.empty()) tactile_.emplace(contacts, sample.object);
}

bool GradientSources::available(Source s) const {
  switch (s) {
    case Source::depth: return depth_.has_value();
    case Source::tactile: return tactile_.has_value();
    default: return true;
  }
}

LossGradient GradientSources::physics(const Pose& pose, std::uint64_t iteration, bool with_gradient) const {
  return physics_eval(*sample_.hand, sample_.object, pose, anchor_, physics_,
                      physics_iteration_seed(physics_.seed, iteration), with_gradient);
}

LossGradient GradientSources::chamfer(Source s, const std::optional<ChamferEvaluator>& eval,
                                      const Pose& pose, bool with_gradient) const {
  if (!eval) return {s};
  return chamfer_eval(s, *eval, pose, with_gradient);
}

LossGradient GradientSources::evaluate(Source s, const Pose& pose, std::uint64_t iteration) const {
  switch (s) {
    case Source::physics: return physics(pose, iteration, true);
    case Source::render: return {Source::render, render_.loss(pose), render_.gradient(pose), true};
    case Source::depth: return chamfer(s, depth_, pose, true);
    case Source::tactile: return chamfer(s, tactile_, pose, true);
  }
  throw Error("unknown gradient source");
}

double GradientSources::loss(Source s, const Pose& pose, std::uint64_t iteration) const {
  switch (s) {
    case Source::physics: return physics(pose, iteration, false).loss;
    case Source::render: return render_.loss(pose);
    case Source::depth: return chamfer(s, depth_, pose, false).loss;
    case Source::tactile: return chamfer(s, tactile_, pose, false).loss;
  }
  throw Error("unknown gradient source");
}

}  // namespace graspref

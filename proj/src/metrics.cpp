#include "graspref/metrics.hpp"

#include "graspref/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace graspref {

namespace {

constexpr double kCm2PerM2 = 1e4;
constexpr double kCm3PerM3 = 1e6;

// Bound on the union-grid interpolation error, in cells.
constexpr double kSdfSlackCells = 4.0;

std::uint64_t interior_seed(std::uint64_t seed) { return seed ^ 0x9e3779b97f4a7c15ULL; }

// Additive recurrence on the unit cube with the generalized golden ratio,
// shifted by a seeded uniform offset.
class KroneckerSequence {
 public:
  explicit KroneckerSequence(std::uint64_t seed) {
    const double phi = 1.2207440845860048;  // real root of x^4 = x + 1
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (int a = 0; a < 3; ++a) {
      alpha_[a] = std::pow(phi, -(a + 1));
      x_[a] = uniform(rng);
    }
  }

  Vec3 next() {
    const Vec3 out(x_[0], x_[1], x_[2]);
    for (int a = 0; a < 3; ++a) {
      x_[a] += alpha_[a];
      if (x_[a] >= 1.0) x_[a] -= 1.0;
    }
    return out;
  }

 private:
  double alpha_[3];
  double x_[3];
};

std::vector<Vec3> sample_contact_points(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
  if (mesh.empty() || !(mesh.total_area() > 0.0)) throw Error("contact_area: degenerate object mesh");
  std::vector<double> cumulative(mesh.num_faces());
  double running = 0.0;
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    running += mesh.face_areas()[f];
    cumulative[f] = running;
  }
  KroneckerSequence seq(seed);
  std::vector<Vec3> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 u = seq.next();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u.x() * running);
    const std::size_t f = std::min<std::size_t>(it - cumulative.begin(), mesh.num_faces() - 1);
    const double r1 = std::sqrt(u.y());
    const Triangle t = mesh.triangle(f);
    out.push_back((1.0 - r1) * t.a + r1 * (1.0 - u.z()) * t.b + r1 * u.z() * t.c);
  }
  return out;
}

// The grid screen skips exact distance queries far from the hand.
double contact_fraction(const HandModel& hand, const std::vector<Vec3>& local, const Pose& pose,
                        double epsilon) {
  const double screen = epsilon + kSdfSlackCells * hand.sdf().cell();
  std::size_t hits = 0;
  for (const Vec3& x : local) {
    const Vec3 y = pose.transform(x);
    if (std::abs(hand.signed_distance(y)) > screen) continue;
    if (hand.surface_distance(y) <= epsilon) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(local.size());
}

double inside_fraction(const HandModel& hand, const std::vector<Vec3>& local, const Pose& pose) {
  std::size_t inside = 0;
  for (const Vec3& x : local) {
    if (hand.signed_distance(pose.transform(x)) < 0.0) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(local.size());
}

}  // namespace

double position_error(const Pose& est, const Pose& gt) {
  return 100.0 * (est.translation() - gt.translation()).norm();
}

double orientation_error(const Quat& est, const Quat& gt) {
  // The squared inner product is read off the relative rotation, which is
  // exact for q and -q.
  const Quat r = est.conjugate() * gt;
  const double w2 = r.w() * r.w();
  const double d2 = w2 / (w2 + r.vec().squaredNorm());
  const double c = std::clamp(2.0 * d2 - 1.0, -1.0, 1.0);
  return rad2deg(std::acos(c));
}

std::vector<Vec3> sample_interior_points(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
  if (!mesh.is_closed()) throw Error("intersection_volume: object mesh not watertight");
  const TriangleBvh tree(mesh);
  const Aabb box = mesh.bounds();
  const Vec3 extent = box.max() - box.min();
  KroneckerSequence seq(seed);
  std::vector<Vec3> out;
  out.reserve(n);
  const std::size_t max_tries = 1000 * n + 1000;
  for (std::size_t tries = 0; out.size() < n; ++tries) {
    if (tries >= max_tries) throw Error("intersection_volume: interior rejection sampling failed");
    const Vec3 p = box.min() + extent.cwiseProduct(seq.next());
    if (tree.contains(p)) out.push_back(p);
  }
  return out;
}

MetricsEvaluator::MetricsEvaluator(const TriangleMesh& object, const MetricsConfig& cfg) : cfg_(cfg) {
  if (cfg_.contact_samples == 0 || cfg_.volume_samples == 0) throw Error("metrics: sample counts must be > 0");
  if (!(cfg_.contact_epsilon >= 0.0)) throw Error("metrics: contact epsilon must be >= 0");
  surface_ = sample_contact_points(object, cfg_.contact_samples, cfg_.seed);
  interior_ = sample_interior_points(object, cfg_.volume_samples, interior_seed(cfg_.seed));
  area_ = object.total_area();
  volume_ = object.volume();
}

double MetricsEvaluator::contact_area(const HandModel& hand, const Pose& pose) const {
  return contact_fraction(hand, surface_, pose, cfg_.contact_epsilon) * area_ * kCm2PerM2;
}

double MetricsEvaluator::intersection_volume(const HandModel& hand, const Pose& pose) const {
  return inside_fraction(hand, interior_, pose) * volume_ * kCm3PerM3;
}

GraspGeometry MetricsEvaluator::geometry(const HandModel& hand, const Pose& pose) const {
  return {contact_area(hand, pose), intersection_volume(hand, pose)};
}

MetricsReport MetricsEvaluator::evaluate(const HandModel& hand, const Pose& est, const Pose& gt) const {
  return evaluate(hand, est, gt, geometry(hand, gt));
}

MetricsReport MetricsEvaluator::evaluate(const HandModel& hand, const Pose& est, const Pose& gt,
                                         const GraspGeometry& gt_geometry) const {
  const GraspGeometry g = geometry(hand, est);
  MetricsReport r;
  r.pe = position_error(est, gt);
  r.oe = orientation_error(est.rotation(), gt.rotation());
  r.ca = g.ca;
  r.iv = g.iv;
  r.delta_ca = std::abs(g.ca - gt_geometry.ca);
  r.delta_iv = std::abs(g.iv - gt_geometry.iv);
  return r;
}

double contact_area(const SceneSample& sample, const Pose& pose, double epsilon, std::size_t n,
                    std::uint64_t seed) {
  if (n == 0) throw Error("contact_area: sample count must be > 0");
  const std::vector<Vec3> pts = sample_contact_points(sample.object, n, seed);
  return contact_fraction(*sample.hand, pts, pose, epsilon) * sample.object.total_area() * kCm2PerM2;
}

double intersection_volume(const SceneSample& sample, const Pose& pose, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error("intersection_volume: sample count must be > 0");
  const std::vector<Vec3> pts = sample_interior_points(sample.object, n, interior_seed(seed));
  return inside_fraction(*sample.hand, pts, pose) * sample.object.volume() * kCm3PerM3;
}

MetricsReport evaluate(const SceneSample& sample, const Pose& pose, const Pose& gt_pose,
                       const MetricsConfig& cfg) {
  return MetricsEvaluator(sample.object, cfg).evaluate(*sample.hand, pose, gt_pose);
}

}  // namespace graspref

#pragma once

#include "graspref/scene.hpp"


#include <cmath>
#include <functional>
#include <memory>
#include <random>

namespace graspref::test {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec3 random_vec(Rng& rng, double scale) {
  return {uniform(rng, -scale, scale), uniform(rng, -scale, scale), uniform(rng, -scale, scale)};
}

inline Vec3 random_unit(Rng& rng) {
  std::normal_distribution<double> n;
  Vec3 v(n(rng), n(rng), n(rng));
  while (v.norm() < 1e-6) v = {n(rng), n(rng), n(rng)};
  return v.normalized();
}

inline Pose random_pose(Rng& rng, double t_scale, double max_angle) {
  return Pose(random_vec(rng, t_scale), exp_rotation(random_unit(rng) * uniform(rng, 0.0, max_angle)));
}

inline double rel_err(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Central differences of f along the six tangent coordinates of apply_step.
inline Vec6 fd_gradient(const std::function<double(const Pose&)>& f, const Pose& pose, double h) {
  Vec6 g;
  for (int k = 0; k < 6; ++k) {
    Vec6 e = Vec6::Zero();
    e[k] = h;
    g[k] = (f(apply_step(pose, TangentStep::from_vector(e))) -
            f(apply_step(pose, TangentStep::from_vector(-e)))) / (2.0 * h);
  }
  return g;
}

// Central differences are only an oracle where the loss is smooth across the
// stencil. Nearest-element switches and grid cell faces create kinks, so a
// configuration counts only when the h and h/10 stencils agree.
inline bool smooth_stencil(const std::function<double(const Pose&)>& f, const Pose& pose, double h,
                           double tol) {
  const Vec6 a = fd_gradient(f, pose, h);
  const Vec6 b = fd_gradient(f, pose, 0.1 * h);
  return (a - b).norm() <= tol * std::max(a.norm(), 1e-12);
}

// Single-box hand with the box centred at `center`.
inline std::shared_ptr<HandModel> box_hand(const Vec3& size, const Vec3& center, double cell,
                                           double padding) {
  HandLink link{"box", "box.obj", make_box(size), Pose::from_translation(center)};
  return std::make_shared<HandModel>(std::vector<HandLink>{link}, HandSdfOptions{cell, padding});
}

// Large slab whose top face is the plane z = 0 around the origin.
inline std::shared_ptr<HandModel> halfspace_hand(double extent = 3.0, double depth = 0.5,
                                                 double cell = 0.05) {
  return box_hand({extent, extent, depth}, {0.0, 0.0, -0.5 * depth}, cell, 0.1);
}

}  // namespace graspref::test

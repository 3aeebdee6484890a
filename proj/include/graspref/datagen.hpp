#pragma once

#include "graspref/scene.hpp"

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace graspref {

struct ObjectSpec {
  // box | sphere | cylinder | capsule | mustard | obj
  std::string kind = "mustard";
  Vec3 size{0.06, 0.035, 0.12};  // x, y extents and length along the object z axis
  std::filesystem::path path;    // used when kind == "obj"
  int segments = 20;
};

struct HandSpec {
  int fingers = 4;
  Vec3 palm_size{0.10, 0.14, 0.02};
  Vec3 finger_size{0.08, 0.016, 0.014};  // length, width, thickness
  double finger_spacing = 0.022;
  double sdf_cell = 0.0025;
  double sdf_padding = 0.02;
};

struct CameraSpec {
  int width = 160;
  int height = 120;
  double focal = 160.0;         // pixels
  double distance = 0.30;       // m, camera to object centre
  double max_tilt_deg = 30.0;   // view direction vs palm normal
};

struct TactileSpec {
  int palm_rows = 8;
  int palm_cols = 8;
  int finger_rows = 19;  // along the finger
  int finger_cols = 4;
  double contact_radius = 0.002;  // m
  double stiffness = 2e6;         // force units per m
  double max_force = 10000.0;
};

struct NoiseSpec {
  double sigma_t = 0.004;     // m, per axis
  double sigma_r_deg = 5.0;   // degrees, per rotation-vector axis
};

struct GenConfig {
  ObjectSpec object;
  HandSpec hand;
  CameraSpec camera;
  TactileSpec tactile;
  NoiseSpec noise;
  int samples = 50;
  std::uint64_t seed = 0;
  int mask_erosion = 0;              // pixels
  double contact_penetration = 5e-4; // m, target overlap of resting contacts
  double max_gt_iv = 0.3;            // cm^3
  int max_attempts = 50;

  void validate() const;
};

TriangleMesh make_object(const ObjectSpec& spec);

struct RenderedObservation {
  DepthImage depth;
  Mask mask;
  double occlusion_fraction = 0.0;
};

// Nearest-hit ray cast over hand and object; `hand` may be null.
RenderedObservation render_observation(const HandModel* hand, const TriangleMesh& object,
                                       const Pose& pose, const Camera& camera);

std::vector<TactileReading> simulate_tactile(const std::vector<TactileReading>& layout,
                                             const TriangleMesh& object, const Pose& pose,
                                             const TactileSpec& spec);

// Gaussian translation per axis and a rotation vector with Gaussian axes,
// left-multiplied. Zero sigmas return `pose` unchanged.
Pose perturb_pose(const Pose& pose, double sigma_t, double sigma_r_deg, std::mt19937_64& rng);

std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t index);

SceneSample generate_sample(const GenConfig& cfg, const TriangleMesh& object, int index);
std::vector<SceneSample> generate(const GenConfig& cfg);

Mask erode_mask(const Mask& mask, int radius);

}  // namespace graspref

#include "graspref/datagen.hpp"

#include "graspref/bvh.hpp"
#include "graspref/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace graspref {

namespace {

using Uniform = std::uniform_real_distribution<double>;

double box_sdf(const Vec3& p, const Vec3& half) {
  const Vec3 q = p.cwiseAbs() - half;
  return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
}

struct PlacedBox {
  Vec3 half;
  Pose pose;
  double sdf(const Vec3& world) const { return box_sdf(pose.inverse_transform(world), half); }
};

// Lays the object's long (z) axis along hand y, its x extent along hand x.
Quat lying_rotation() {
  Mat3 r;
  r.col(0) = Vec3::UnitX();
  r.col(1) = -Vec3::UnitZ();
  r.col(2) = Vec3::UnitY();
  return Quat(r);
}

Pose look_at(const Vec3& eye, const Vec3& target, double roll) {
  const Vec3 f = (target - eye).normalized();
  const Vec3 hint = std::abs(f.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 a = (hint - hint.dot(f) * f).normalized();
  const Vec3 x = std::cos(roll) * a + std::sin(roll) * f.cross(a);
  const Vec3 y = f.cross(x);
  Mat3 r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = f;
  return Pose(eye, Quat(r)).inverse();
}

std::vector<TactileReading> face_grid(const PlacedBox& box, int rows, int cols, double inset) {
  // Sensors on the local -z face, normals pointing out of it.
  std::vector<TactileReading> out;
  const double lx = 2.0 * box.half.x() - 2.0 * inset;
  const double ly = 2.0 * box.half.y() - 2.0 * inset;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double fx = rows > 1 ? static_cast<double>(i) / (rows - 1) : 0.5;
      const double fy = cols > 1 ? static_cast<double>(j) / (cols - 1) : 0.5;
      const Vec3 local(-0.5 * lx + fx * lx, -0.5 * ly + fy * ly, -box.half.z());
      TactileReading r;
      r.position = box.pose.transform(local);
      r.normal = box.pose.rotation() * Vec3(0.0, 0.0, -1.0);
      out.push_back(r);
    }
  }
  return out;
}

class ObjectDistance {
 public:
  explicit ObjectDistance(const TriangleMesh& mesh) : tree_(mesh) {}
  double signed_distance(const Pose& pose, const Vec3& world) const {
    const Vec3 local = pose.inverse_transform(world);
    const double d = tree_.distance(local);
    return tree_.contains(local) ? -d : d;
  }

 private:
  TriangleBvh tree_;
};

}  // namespace

void GenConfig::validate() const {
  if (!(noise.sigma_t >= 0.0) || !(noise.sigma_r_deg >= 0.0)) throw Error("gen: noise sigmas must be >= 0");
  if (samples < 0) throw Error("gen: sample count must be >= 0");
  if (hand.fingers < 0) throw Error("gen: finger count must be >= 0");
  if (camera.width < 1 || camera.height < 1 || !(camera.focal > 0.0) || !(camera.distance > 0.0)) {
    throw Error("gen: invalid camera spec");
  }
  if (tactile.palm_rows < 0 || tactile.palm_cols < 0 || tactile.finger_rows < 0 || tactile.finger_cols < 0) {
    throw Error("gen: invalid tactile layout");
  }
  if (!(tactile.contact_radius > 0.0) || !(tactile.stiffness > 0.0)) throw Error("gen: invalid tactile model");
  if (mask_erosion < 0) throw Error("gen: mask erosion must be >= 0");
  if (max_attempts < 1) throw Error("gen: max attempts must be >= 1");
}

TriangleMesh make_object(const ObjectSpec& spec) {
  const Vec3& s = spec.size;
  if (spec.kind == "obj") return load_obj(spec.path);
  if (!(s.minCoeff() > 0.0)) throw Error("object: size must be positive");
  if (spec.kind == "box") return make_box(s);
  if (spec.kind == "sphere") return make_icosphere(0.5 * s.x(), 3);
  if (spec.kind == "cylinder") return make_cylinder(0.5 * s.x(), s.z(), spec.segments);
  if (spec.kind == "capsule") return make_capsule(0.5 * s.x(), s.z() - s.x(), spec.segments, 6);
  if (spec.kind == "mustard") return make_bottle(s.z(), s.x(), s.y(), spec.segments);
  throw Error("object: unknown kind '" + spec.kind + "' (box|sphere|cylinder|capsule|mustard|obj)");
}

RenderedObservation render_observation(const HandModel* hand, const TriangleMesh& object, const Pose& pose,
                                       const Camera& camera) {
  camera.validate();
  const TriangleBvh object_tree(object.transformed(pose));
  std::optional<TriangleBvh> hand_tree;
  if (hand) hand_tree.emplace(hand->surface());
  const Vec3 eye = camera.center_world();

  RenderedObservation out;
  out.depth = DepthImage(camera.width, camera.height, 0.0f);
  out.mask = Mask(camera.width, camera.height, 0);
  std::size_t object_hits = 0;
  std::size_t hidden = 0;
  for (int v = 0; v < camera.height; ++v) {
    for (int u = 0; u < camera.width; ++u) {
      // Unit optical-axis component, so the ray parameter is the depth.
      const Vec3 dir = camera.ray_direction(u, v);
      const std::optional<double> to = object_tree.raycast(eye, dir);
      const std::optional<double> th = hand_tree ? hand_tree->raycast(eye, dir) : std::nullopt;
      if (to) ++object_hits;
      if (to && (!th || *to <= *th)) {
        out.depth.at(u, v) = static_cast<float>(*to);
        out.mask.at(u, v) = 1;
      } else if (th) {
        out.depth.at(u, v) = static_cast<float>(*th);
        if (to) ++hidden;
      }
    }
  }
  out.occlusion_fraction = object_hits ? static_cast<double>(hidden) / static_cast<double>(object_hits) : 0.0;
  return out;
}

std::vector<TactileReading> simulate_tactile(const std::vector<TactileReading>& layout,
                                             const TriangleMesh& object, const Pose& pose,
                                             const TactileSpec& spec) {
  const ObjectDistance dist(object);
  std::vector<TactileReading> out = layout;
  for (TactileReading& r : out) {
    const double s = dist.signed_distance(pose, r.position);
    const double magnitude = std::min(spec.max_force, spec.stiffness * std::max(0.0, spec.contact_radius - s));
    r.force = magnitude * r.normal;
  }
  return out;
}

Pose perturb_pose(const Pose& pose, double sigma_t, double sigma_r_deg, std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Vec3 dt;
  Vec3 dr;
  for (int i = 0; i < 3; ++i) dt[i] = sigma_t * n01(rng);
  for (int i = 0; i < 3; ++i) dr[i] = deg2rad(sigma_r_deg) * n01(rng);
  return apply_step(pose, {dt, dr});
}

std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x5eedu};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

Mask erode_mask(const Mask& mask, int radius) {
  if (radius <= 0) return mask;
  Mask out(mask.width, mask.height, 0);
  for (int v = 0; v < mask.height; ++v) {
    for (int u = 0; u < mask.width; ++u) {
      bool keep = mask.at(u, v) != 0;
      for (int dv = -radius; keep && dv <= radius; ++dv) {
        for (int du = -radius; keep && du <= radius; ++du) {
          const int uu = u + du;
          const int vv = v + dv;
          if (uu < 0 || vv < 0 || uu >= mask.width || vv >= mask.height || !mask.at(uu, vv)) keep = false;
        }
      }
      out.at(u, v) = keep ? 1 : 0;
    }
  }
  return out;
}

SceneSample generate_sample(const GenConfig& cfg, const TriangleMesh& object, int index) {
  cfg.validate();
  const std::uint64_t seed = sample_seed(cfg.seed, static_cast<std::uint64_t>(index));
  std::mt19937_64 rng(seed);
  const HandSpec& hs = cfg.hand;
  // Dense object samples for measuring finger overlap against analytic boxes.
  const std::vector<Vec3> object_samples = sample_surface_points(object, 4000, seed).points;
  // Same volume samples as the default evaluation, so the screen agrees with
  // the reported ground-truth IV.
  MetricsConfig mcfg;
  mcfg.contact_samples = 1;
  const MetricsEvaluator volume(object, mcfg);

  const PlacedBox palm{0.5 * hs.palm_size, Pose::from_translation(Vec3(0.0, 0.0, -0.5 * hs.palm_size.z()))};
  const Vec3 finger_half = 0.5 * hs.finger_size;

  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    // Object resting on the palm with a small overlap.
    const double yaw = deg2rad(Uniform(-20.0, 20.0)(rng)) + (Uniform(0.0, 1.0)(rng) < 0.5 ? 0.0 : kPi);
    const double roll = deg2rad(Uniform(-10.0, 10.0)(rng));
    const Quat q = exp_rotation(Vec3(0.0, 0.0, yaw)) * exp_rotation(Vec3(0.0, roll, 0.0)) * lying_rotation();
    double min_z = std::numeric_limits<double>::infinity();
    for (const Vec3& v : object.vertices()) min_z = std::min(min_z, (q * v).z());
    const Vec3 t(Uniform(-0.01, 0.01)(rng), Uniform(-0.01, 0.01)(rng), -min_z - cfg.contact_penetration);
    const Pose object_pose(t, q);

    Aabb world_box;
    for (const Vec3& v : object.vertices()) world_box.extend(object_pose.transform(v));
    std::vector<Vec3> world_samples;
    world_samples.reserve(object_samples.size());
    for (const Vec3& x : object_samples) world_samples.push_back(object_pose.transform(x));

    // Fingers curl over the object from the -x side and are lowered until
    // they rest on it. A finger that cannot reach the object stays open,
    // lying flat beyond the palm edge.
    std::vector<PlacedBox> fingers;
    int closed = 0;
    const double group_offset = Uniform(-0.05, 0.05)(rng);
    for (int k = 0; k < hs.fingers; ++k) {
      const double row = t.y() + group_offset + (k - 0.5 * (hs.fingers - 1)) * hs.finger_spacing;
      bool placed = false;
      for (int tries = 0; tries < 20 && !placed; ++tries) {
        const double y = row + Uniform(-0.004, 0.004)(rng);
        const double tip = t.x() + Uniform(-0.03, 0.035)(rng);
        const double heading = deg2rad(Uniform(-15.0, 15.0)(rng));
        const double pitch = deg2rad(Uniform(-10.0, 10.0)(rng));
        const Quat rf = exp_rotation(Vec3(0.0, 0.0, heading)) * exp_rotation(Vec3(0.0, pitch, 0.0));
        const Vec3 axis = rf * Vec3::UnitX();
        const double cx = tip - finger_half.x() * axis.x();
        const double cy = y - finger_half.x() * axis.y();
        auto overlap = [&](double h) {
          const PlacedBox box{finger_half, Pose(Vec3(cx, cy, h), rf)};
          double d = std::numeric_limits<double>::infinity();
          for (const Vec3& p : world_samples) d = std::min(d, box.sdf(p));
          return -d;
        };
        double lo = world_box.center().z();
        double hi = world_box.max().z() + 2.0 * finger_half.maxCoeff();
        if (overlap(lo) <= cfg.contact_penetration) continue;
        for (int it = 0; it < 40; ++it) {
          const double mid = 0.5 * (lo + hi);
          (overlap(mid) > cfg.contact_penetration ? lo : hi) = mid;
        }
        fingers.push_back({finger_half, Pose(Vec3(cx, cy, hi), rf)});
        placed = true;
        ++closed;
      }
      if (!placed) {
        const Vec3 open(-0.5 * hs.palm_size.x() - finger_half.x(), row, finger_half.z());
        fingers.push_back({finger_half, Pose::from_translation(open)});
      }
    }
    if (closed == 0) continue;

    std::vector<HandLink> links;
    links.push_back({"palm", "palm.obj", make_box(hs.palm_size), palm.pose});
    for (int k = 0; k < hs.fingers; ++k) {
      links.push_back({"finger_" + std::to_string(k), "finger.obj", make_box(hs.finger_size), fingers[k].pose});
    }
    auto hand = std::make_shared<const HandModel>(std::move(links), HandSdfOptions{hs.sdf_cell, hs.sdf_padding});
    if (volume.intersection_volume(*hand, object_pose) > cfg.max_gt_iv) continue;

    // Camera looks at the object from within a cone around the palm normal.
    const double cos_max = std::cos(deg2rad(cfg.camera.max_tilt_deg));
    const double ct = Uniform(cos_max, 1.0)(rng);
    const double phi = Uniform(0.0, 2.0 * kPi)(rng);
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    const Vec3 dir(st * std::cos(phi), st * std::sin(phi), ct);
    Camera cam;
    cam.width = cfg.camera.width;
    cam.height = cfg.camera.height;
    cam.fx = cam.fy = cfg.camera.focal;
    cam.cx = 0.5 * (cam.width - 1);
    cam.cy = 0.5 * (cam.height - 1);
    cam.camera_from_world = look_at(t + cfg.camera.distance * dir, t, Uniform(0.0, 2.0 * kPi)(rng));

    RenderedObservation rendered = render_observation(hand.get(), object, object_pose, cam);

    std::vector<TactileReading> layout;
    if (cfg.tactile.palm_rows > 0 && cfg.tactile.palm_cols > 0) {
      // Palm sensors face +z: flip the palm frame so its -z face is the top.
      const PlacedBox flipped{palm.half, palm.pose * Pose(Vec3::Zero(), Quat(0.0, 1.0, 0.0, 0.0))};
      const auto g = face_grid(flipped, cfg.tactile.palm_rows, cfg.tactile.palm_cols, 0.004);
      layout.insert(layout.end(), g.begin(), g.end());
    }
    for (const PlacedBox& f : fingers) {
      const auto g = face_grid(f, cfg.tactile.finger_rows, cfg.tactile.finger_cols, 0.002);
      layout.insert(layout.end(), g.begin(), g.end());
    }

    SceneSample sample;
    char id[32];
    std::snprintf(id, sizeof id, "s%04d", index);
    sample.id = id;
    sample.seed = seed;
    sample.hand = std::move(hand);
    sample.object = object;
    sample.observation.camera = cam;
    sample.observation.depth = std::move(rendered.depth);
    sample.observation.mask = erode_mask(rendered.mask, cfg.mask_erosion);
    sample.observation.tactile = simulate_tactile(layout, object, object_pose, cfg.tactile);
    sample.gt_pose = object_pose;
    sample.initial_pose = perturb_pose(object_pose, cfg.noise.sigma_t, cfg.noise.sigma_r_deg, rng);
    sample.occlusion_fraction = rendered.occlusion_fraction;
    return sample;
  }
  throw Error("datagen: placement failed for sample " + std::to_string(index) + " (seed " +
              std::to_string(seed) + ") after " + std::to_string(cfg.max_attempts) + " attempts");
}

std::vector<SceneSample> generate(const GenConfig& cfg) {
  cfg.validate();
  const TriangleMesh object = make_object(cfg.object);
  std::vector<SceneSample> out;
  out.reserve(static_cast<std::size_t>(cfg.samples));
  for (int i = 0; i < cfg.samples; ++i) out.push_back(generate_sample(cfg, object, i));
  return out;
}

}  // namespace graspref

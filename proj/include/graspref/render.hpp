#pragma once

#include "graspref/scene.hpp"

#include <array>
#include <vector>

namespace graspref {

struct RenderConfig {
  int scale = 4;                  // render resolution divisor
  double edge_softness = 1.0;     // pixels at render resolution
  double fd_translation = 1e-3;   // meters
  double fd_rotation = deg2rad(0.5);
  bool hand_occlusion = true;     // composite the known hand in front of the hypothesis

  void validate() const;
};

/// Depths of the hand seen through every full-resolution pixel, grouped by
/// the low-resolution pixel that contains it. Lets a low-resolution render
/// count which share of a pixel the hand hides at a given object depth.
class HandOcclusion {
 public:
  HandOcclusion(const HandModel& hand, const Camera& full_camera, int scale);

  // Share of the pixel's sub-rays whose hand hit lies beyond `depth`.
  double visible_fraction(int u, int v, double depth) const;
  // True when some sub-ray of the pixel hits the hand.
  bool covers(int u, int v) const;
  // Hand depth along sub-ray k (row-major within the pixel); +inf for misses.
  double sub_ray_depth(int u, int v, int k) const;
  int width() const { return width_; }
  int height() const { return height_; }
  int scale() const { return scale_; }
  int sub_rays() const { return per_pixel_; }

 private:
  int width_ = 0;
  int height_ = 0;
  int scale_ = 1;
  int per_pixel_ = 0;
  std::vector<float> depths_;  // ascending within each pixel; +inf for misses
  std::vector<float> ray_depths_;  // in sub-ray order
};

/// Soft silhouette rasterizer for a closed mesh.
///
/// Coverage of a pixel is a logistic function of its signed distance (pixels)
/// to the projected silhouette contour, with slope 1/softness at the contour.
/// Contour segments are the projected edges shared by a front- and a
/// back-facing triangle; inside/outside comes from rasterizing front faces.
class SilhouetteRenderer {
 public:
  explicit SilhouetteRenderer(const TriangleMesh& mesh);

  // With an occluder, pixels the hand reaches are resolved per sub-ray:
  // object depth and inside tests come from rasterizing at the sub-ray, and
  // sub-rays that hit the hand in front of the object contribute nothing.
  // Contour pixels average the logistic over supersample x supersample
  // sub-samples, each with width softness / supersample, treating the contour
  // as a straight edge through its nearest point. An occluder must share the
  // supersampling factor.
  SoftMask render(const Camera& camera, const Pose& pose, double softness, int supersample = 1,
                  const HandOcclusion* occluder = nullptr) const;

 private:
  TriangleMesh mesh_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 2>> edge_faces_;  // second is -1 on open boundaries
};

double mask_mse(const SoftMask& a, const SoftMask& b);

/// Pixel-wise MSE between the rendered object and the observed mask, both at
/// the reduced render resolution. The observed binary mask is box-filtered.
class RenderComparator {
 public:
  // `hand` is composited as an occluder when the config asks for it.
  RenderComparator(const TriangleMesh& mesh, const Camera& camera, const Mask& observed,
                   const RenderConfig& config, const HandModel* hand = nullptr);

  double loss(const Pose& pose) const;
  // Central differences over the six tangent coordinates (12 renders).
  Vec6 gradient(const Pose& pose) const;
  SoftMask render(const Pose& pose) const;

  const SoftMask& observed() const { return observed_; }
  const Camera& camera() const { return camera_; }

 private:
  SilhouetteRenderer renderer_;
  Camera camera_;
  SoftMask observed_;
  RenderConfig config_;
  std::optional<HandOcclusion> occluder_;
};

}  // namespace graspref

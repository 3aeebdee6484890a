#pragma once

#include "graspref/mesh.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace graspref {

template <typename T>
struct Image {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Image() = default;
  Image(int w, int h, T fill = T{}) : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  T& at(int u, int v) { return data[static_cast<std::size_t>(v) * width + u]; }
  const T& at(int u, int v) const { return data[static_cast<std::size_t>(v) * width + u]; }
  std::size_t size() const { return data.size(); }
  bool operator==(const Image&) const = default;
};

using DepthImage = Image<float>;    // meters along the optical axis; 0 or NaN = invalid
using Mask = Image<std::uint8_t>;   // 1 = object pixel
using SoftMask = Image<double>;     // coverage in [0, 1]

struct PixelDepth {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

/// Pinhole camera; pixel (u, v) has its centre at integer coordinates.
/// Camera frame: x right, y down, z forward.
struct Camera {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;
  Pose camera_from_world;

  // Throws unless fx, fy > 0 and the principal point lies inside the image.
  void validate() const;

  Vec3 to_camera(const Vec3& world) const { return camera_from_world.transform(world); }
  Vec3 to_world(const Vec3& cam) const { return camera_from_world.inverse_transform(cam); }
  Vec3 center_world() const { return camera_from_world.inverse_transform(Vec3::Zero()); }

  // Projection of a world point; empty when the point is not in front.
  std::optional<PixelDepth> project(const Vec3& world) const;
  // World point at pixel (u, v) with the given optical-axis depth.
  Vec3 unproject(double u, double v, double depth) const;
  // World-frame ray direction (not normalized; unit optical-axis component).
  Vec3 ray_direction(double u, double v) const;

  // Camera for an image downsampled by an integer factor: low-res pixel
  // (U, V) covers full-res pixels [sU, sU + s) x [sV, sV + s).
  Camera downsampled(int factor) const;

  bool operator==(const Camera& o) const;
};

PointCloud backproject_depth(const DepthImage& depth, const Camera& camera, const Mask& mask);

// Box-filter average of a binary mask onto the downsampled grid.
SoftMask downsample_mask(const Mask& mask, int factor);

}  // namespace graspref

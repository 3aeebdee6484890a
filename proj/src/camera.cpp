#include "graspref/camera.hpp"

#include <cmath>

namespace graspref {

void Camera::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw Error("camera: focal lengths must be positive");
  if (width <= 0 || height <= 0) throw Error("camera: image size must be positive");
  if (!(cx >= -0.5 && cx <= width - 0.5 && cy >= -0.5 && cy <= height - 0.5)) {
    throw Error("camera: principal point outside the image");
  }
}

std::optional<PixelDepth> Camera::project(const Vec3& world) const {
  const Vec3 c = to_camera(world);
  if (!(c.z() > 0.0)) return std::nullopt;
  return PixelDepth{fx * c.x() / c.z() + cx, fy * c.y() / c.z() + cy, c.z()};
}

Vec3 Camera::unproject(double u, double v, double depth) const {
  const Vec3 c((u - cx) / fx * depth, (v - cy) / fy * depth, depth);
  return to_world(c);
}

Vec3 Camera::ray_direction(double u, double v) const {
  return camera_from_world.rotation().conjugate() * Vec3((u - cx) / fx, (v - cy) / fy, 1.0);
}

Camera Camera::downsampled(int factor) const {
  if (factor < 1) throw Error("camera: downsample factor must be >= 1");
  Camera out = *this;
  const double s = factor;
  const double shift = 0.5 * (s - 1.0);
  out.fx = fx / s;
  out.fy = fy / s;
  out.cx = (cx - shift) / s;
  out.cy = (cy - shift) / s;
  out.width = width / factor;
  out.height = height / factor;
  return out;
}

bool Camera::operator==(const Camera& o) const {
  return fx == o.fx && fy == o.fy && cx == o.cx && cy == o.cy && width == o.width &&
         height == o.height &&
         camera_from_world.translation() == o.camera_from_world.translation() &&
         camera_from_world.rotation().coeffs() == o.camera_from_world.rotation().coeffs();
}

PointCloud backproject_depth(const DepthImage& depth, const Camera& camera, const Mask& mask) {
  if (depth.width != camera.width || depth.height != camera.height || mask.width != camera.width ||
      mask.height != camera.height) {
    throw Error("backproject_depth: image dimensions do not match the camera");
  }
  PointCloud cloud;
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      if (!mask.at(u, v)) continue;
      const double z = depth.at(u, v);
      if (!std::isfinite(z) || z <= 0.0) continue;
      cloud.points.push_back(camera.unproject(u, v, z));
    }
  }
  if (cloud.empty()) throw Error("backproject_depth: empty observation");
  return cloud;
}

SoftMask downsample_mask(const Mask& mask, int factor) {
  if (factor < 1) throw Error("downsample_mask: factor must be >= 1");
  SoftMask out(mask.width / factor, mask.height / factor, 0.0);
  const double inv = 1.0 / (factor * factor);
  for (int v = 0; v < out.height; ++v) {
    for (int u = 0; u < out.width; ++u) {
      int count = 0;
      for (int dv = 0; dv < factor; ++dv) {
        for (int du = 0; du < factor; ++du) count += mask.at(u * factor + du, v * factor + dv) ? 1 : 0;
      }
      out.at(u, v) = count * inv;
    }
  }
  return out;
}

}  // namespace graspref

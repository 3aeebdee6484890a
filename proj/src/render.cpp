#include "graspref/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace graspref {

namespace {

constexpr double kNear = 1e-4;

struct Segment {
  Eigen::Vector2d a;
  Eigen::Vector2d b;
  double inv_za = 0.0;
  double inv_zb = 0.0;
};

double segment_distance2(const Eigen::Vector2d& p, const Segment& s, double& t) {
  const Eigen::Vector2d ab = s.b - s.a;
  const double len2 = ab.squaredNorm();
  t = len2 > 0.0 ? std::clamp((p - s.a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (s.a + t * ab - p).squaredNorm();
}

// Offset of sub-sample k (row-major) from the centre of its pixel, for n x n
// sub-samples at the centres of the full-resolution pixels.
Eigen::Vector2d sub_pixel_offset(int k, int n) {
  const double centre = 0.5 * (n - 1);
  return {(k % n - centre) / n, (k / n - centre) / n};
}

double edge_function(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& p) {
  return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
}

// Screen-space affine function x * gx + y * gy + c.
struct Affine {
  double gx = 0.0;
  double gy = 0.0;
  double c = 0.0;
  double at(double x, double y) const { return x * gx + y * gy + c; }
};

// Edge function of (a, b) divided by scale.
Affine edge_affine(const Eigen::Vector2d& a, const Eigen::Vector2d& b, double scale) {
  const double dx = (b.x() - a.x()) / scale;
  const double dy = (b.y() - a.y()) / scale;
  return {-dy, dx, dy * a.x() - dx * a.y()};
}

}  // namespace

void RenderConfig::validate() const {
  if (scale < 1) throw Error("render: scale must be >= 1");
  if (!(edge_softness > 0.0)) throw Error("render: edge softness must be > 0");
  if (!(fd_translation > 0.0) || !(fd_rotation > 0.0)) {
    throw Error("render: finite-difference steps must be > 0");
  }
}

SilhouetteRenderer::SilhouetteRenderer(const TriangleMesh& mesh) : mesh_(mesh) {
  std::map<std::pair<int, int>, std::size_t> index;
  const auto& faces = mesh_.faces();
  for (std::size_t f = 0; f < faces.size(); ++f) {
    for (int k = 0; k < 3; ++k) {
      int a = faces[f][k];
      int b = faces[f][(k + 1) % 3];
      if (a > b) std::swap(a, b);
      auto [it, inserted] = index.try_emplace({a, b}, edges_.size());
      if (inserted) {
        edges_.push_back({a, b});
        edge_faces_.push_back({static_cast<int>(f), -1});
      } else {
        edge_faces_[it->second][1] = static_cast<int>(f);
      }
    }
  }
}

HandOcclusion::HandOcclusion(const HandModel& hand, const Camera& full_camera, int scale)
    : width_(full_camera.width / scale), height_(full_camera.height / scale), scale_(scale), per_pixel_(scale * scale) {
  if (scale < 1) throw Error("render: scale must be >= 1");
  const TriangleBvh tree(hand.surface());
  const Vec3 eye = full_camera.center_world();
  depths_.assign(static_cast<std::size_t>(width_) * height_ * per_pixel_,
                 std::numeric_limits<float>::infinity());
  for (int v = 0; v < height_ * scale; ++v) {
    for (int u = 0; u < width_ * scale; ++u) {
      const std::size_t pixel = static_cast<std::size_t>(v / scale) * width_ + u / scale;
      const std::size_t slot = static_cast<std::size_t>(v % scale) * scale + u % scale;
      // Unit optical-axis component, so the ray parameter is the depth.
      if (const auto t = tree.raycast(eye, full_camera.ray_direction(u, v))) {
        depths_[pixel * per_pixel_ + slot] = static_cast<float>(*t);
      }
    }
  }
  ray_depths_ = depths_;
  for (std::size_t p = 0; p < depths_.size(); p += per_pixel_) {
    std::sort(depths_.begin() + static_cast<std::ptrdiff_t>(p),
              depths_.begin() + static_cast<std::ptrdiff_t>(p + per_pixel_));
  }
}

double HandOcclusion::visible_fraction(int u, int v, double depth) const {
  if (u < 0 || v < 0 || u >= width_ || v >= height_) return 1.0;
  const auto first = depths_.begin() + static_cast<std::ptrdiff_t>((static_cast<std::size_t>(v) * width_ + u) * per_pixel_);
  const auto last = first + per_pixel_;
  const auto behind = std::upper_bound(first, last, static_cast<float>(depth));
  return static_cast<double>(last - behind) / per_pixel_;
}

bool HandOcclusion::covers(int u, int v) const {
  if (u < 0 || v < 0 || u >= width_ || v >= height_) return false;
  return std::isfinite(depths_[(static_cast<std::size_t>(v) * width_ + u) * per_pixel_]);
}

double HandOcclusion::sub_ray_depth(int u, int v, int k) const {
  if (u < 0 || v < 0 || u >= width_ || v >= height_) return std::numeric_limits<double>::infinity();
  return ray_depths_[(static_cast<std::size_t>(v) * width_ + u) * per_pixel_ + k];
}



SoftMask SilhouetteRenderer::render(const Camera& camera, const Pose& pose, double softness, int supersample,
                                    const HandOcclusion* occluder) const {
  if (supersample < 1) throw Error("render: supersampling factor must be >= 1");
  if (occluder && (occluder->scale() != supersample || occluder->width() != camera.width ||
                   occluder->height() != camera.height)) {
    throw Error("render: occluder does not match the render resolution");
  }
  SoftMask out(camera.width, camera.height, 0.0);
  const auto& verts = mesh_.vertices();
  const auto& faces = mesh_.faces();

  const Pose cam_from_object = camera.camera_from_world * pose;
  std::vector<Vec3> cv(verts.size());
  std::vector<Eigen::Vector2d> px(verts.size());
  std::vector<char> in_front(verts.size());
  for (std::size_t i = 0; i < verts.size(); ++i) {
    cv[i] = cam_from_object.transform(verts[i]);
    in_front[i] = cv[i].z() > kNear;
    if (in_front[i]) {
      px[i] = {camera.fx * cv[i].x() / cv[i].z() + camera.cx, camera.fy * cv[i].y() / cv[i].z() + camera.cy};
    }
  }

  // 1 front, 0 back, -1 clipped.
  std::vector<int> facing(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& fc = faces[f];
    if (!in_front[fc[0]] || !in_front[fc[1]] || !in_front[fc[2]]) {
      facing[f] = -1;
      continue;
    }
    const Vec3 n = (cv[fc[1]] - cv[fc[0]]).cross(cv[fc[2]] - cv[fc[0]]);
    facing[f] = n.dot(cv[fc[0]]) < 0.0 ? 1 : 0;
  }

  std::vector<Segment> contour;
  Eigen::AlignedBox2d contour_box;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const int f0 = edge_faces_[e][0];
    const int f1 = edge_faces_[e][1];
    const int a = facing[f0];
    const int b = f1 >= 0 ? facing[f1] : 0;
    if (a < 0 || b < 0 || a == b) continue;
    const int va = edges_[e][0];
    const int vb = edges_[e][1];
    const Segment s{px[va], px[vb], 1.0 / cv[va].z(), 1.0 / cv[vb].z()};
    contour.push_back(s);
    contour_box.extend(s.a);
    contour_box.extend(s.b);
  }
  if (contour.empty()) return out;

  // Pixels the hand reaches also get inverse depths at every sub-ray.
  const int sub_rays = supersample * supersample;
  std::vector<Eigen::Vector2d> offsets(sub_rays);
  for (int k = 0; k < sub_rays; ++k) offsets[k] = sub_pixel_offset(k, supersample);
  std::vector<int> sub_index;
  std::vector<double> sub_inv_depth;
  if (occluder) {
    sub_index.assign(out.data.size(), -1);
    int n = 0;
    for (int v = 0; v < camera.height; ++v) {
      for (int u = 0; u < camera.width; ++u) {
        if (occluder->covers(u, v)) sub_index[static_cast<std::size_t>(v) * camera.width + u] = n++;
      }
    }
    sub_inv_depth.assign(static_cast<std::size_t>(n) * sub_rays, 0.0);
  }

  // Inside test at pixel centres from the union of front faces, keeping the
  // nearest surface as inverse depth (affine in screen space).
  std::vector<double> inv_depth(out.data.size(), 0.0);
  for (std::size_t f = 0; f < faces.size(); ++f) {
    if (facing[f] != 1) continue;
    const Face& fc = faces[f];
    const Eigen::Vector2d& p0 = px[fc[0]];
    const Eigen::Vector2d& p1 = px[fc[1]];
    const Eigen::Vector2d& p2 = px[fc[2]];
    const double area = edge_function(p0, p1, p2);
    if (area == 0.0) continue;
    // Barycentric weights and inverse depth as affine functions of the pixel.
    const Affine e0 = edge_affine(p1, p2, area);
    const Affine e1 = edge_affine(p2, p0, area);
    const Affine e2 = edge_affine(p0, p1, area);
    const double w0 = 1.0 / cv[fc[0]].z();
    const double w1 = 1.0 / cv[fc[1]].z();
    const double w2 = 1.0 / cv[fc[2]].z();
    const Affine depth{e0.gx * w0 + e1.gx * w1 + e2.gx * w2, e0.gy * w0 + e1.gy * w1 + e2.gy * w2,
                       e0.c * w0 + e1.c * w1 + e2.c * w2};
    const int u0 = std::max(0, static_cast<int>(std::ceil(std::min({p0.x(), p1.x(), p2.x()}))));
    const int u1 = std::min(camera.width - 1, static_cast<int>(std::floor(std::max({p0.x(), p1.x(), p2.x()}))));
    const int v0 = std::max(0, static_cast<int>(std::ceil(std::min({p0.y(), p1.y(), p2.y()}))));
    const int v1 = std::min(camera.height - 1, static_cast<int>(std::floor(std::max({p0.y(), p1.y(), p2.y()}))));
    for (int v = v0; v <= v1; ++v) {
      for (int u = u0; u <= u1; ++u) {
        if (e0.at(u, v) < 0.0 || e1.at(u, v) < 0.0 || e2.at(u, v) < 0.0) continue;
        const double iz = depth.at(u, v);
        double& slot = inv_depth[static_cast<std::size_t>(v) * camera.width + u];
        slot = std::max(slot, iz);
      }
    }
    if (!occluder) continue;
    const double x0 = std::min({p0.x(), p1.x(), p2.x()});
    const double x1 = std::max({p0.x(), p1.x(), p2.x()});
    const double y0 = std::min({p0.y(), p1.y(), p2.y()});
    const double y1 = std::max({p0.y(), p1.y(), p2.y()});
    for (int v = std::max(0, static_cast<int>(std::floor(y0))); v <= std::min(camera.height - 1, static_cast<int>(std::ceil(y1))); ++v) {
      for (int u = std::max(0, static_cast<int>(std::floor(x0))); u <= std::min(camera.width - 1, static_cast<int>(std::ceil(x1))); ++u) {
        const int index = sub_index[static_cast<std::size_t>(v) * camera.width + u];
        if (index < 0) continue;
        double* slots = &sub_inv_depth[static_cast<std::size_t>(index) * sub_rays];
        for (int k = 0; k < sub_rays; ++k) {
          const double x = u + offsets[k].x();
          const double y = v + offsets[k].y();
          if (e0.at(x, y) < 0.0 || e1.at(x, y) < 0.0 || e2.at(x, y) < 0.0) continue;
          slots[k] = std::max(slots[k], depth.at(x, y));
        }
      }
    }
  }
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = inv_depth[i] > 0.0 ? 1.0 : 0.0;

  // Beyond this distance the coverage is 0 or 1 to within about 1e-13.
  const double cutoff = supersample == 1 ? 10.0 * softness : 0.75 + 8.0 * softness / supersample;
  const double slope = 4.0 / softness;
  const double sub_slope = slope * supersample;
  const int u0 = std::max(0, static_cast<int>(std::floor(contour_box.min().x() - cutoff)));
  const int u1 = std::min(camera.width - 1, static_cast<int>(std::ceil(contour_box.max().x() + cutoff)));
  const int v0 = std::max(0, static_cast<int>(std::floor(contour_box.min().y() - cutoff)));
  const int v1 = std::min(camera.height - 1, static_cast<int>(std::ceil(contour_box.max().y() + cutoff)));
  const double cutoff2 = cutoff * cutoff;
  // Nearest contour point per pixel in the band (1 outside, 2 inside), for
  // per-sub-ray occlusion.
  std::vector<Eigen::Vector2d> nearest;
  std::vector<char> in_band;
  if (occluder) {
    nearest.resize(out.data.size());
    in_band.assign(out.data.size(), 0);
  }
  for (int v = v0; v <= v1; ++v) {
    for (int u = u0; u <= u1; ++u) {
      const Eigen::Vector2d p(u, v);
      double d2 = cutoff2;
      double edge_inv_depth = 0.0;
      Eigen::Vector2d closest = p;
      for (const Segment& s : contour) {
        double t = 0.0;
        const double e2 = segment_distance2(p, s, t);
        if (e2 < d2) {
          d2 = e2;
          edge_inv_depth = (1.0 - t) * s.inv_za + t * s.inv_zb;
          closest = s.a + t * (s.b - s.a);
        }
      }
      if (d2 >= cutoff2) continue;
      const std::size_t i = static_cast<std::size_t>(v) * camera.width + u;
      const bool inside = inv_depth[i] > 0.0;
      if (occluder && d2 > 0.0) {
        nearest[i] = closest;
        in_band[i] = inside ? 2 : 1;
      }
      const double d = inside ? std::sqrt(d2) : -std::sqrt(d2);
      if (supersample == 1 || d2 == 0.0) {
        out.data[i] = 1.0 / (1.0 + std::exp(-slope * d));
      } else {
        const Eigen::Vector2d normal = (p - closest) / d;  // inward
        double sum = 0.0;
        for (int k = 0; k < sub_rays; ++k) {
          sum += 1.0 / (1.0 + std::exp(-sub_slope * (p + offsets[k] - closest).dot(normal)));
        }
        out.data[i] = sum / sub_rays;
      }
      // Pixels just outside the contour borrow the contour's depth.
      if (!inside) inv_depth[i] = edge_inv_depth;
    }
  }

  if (occluder) {
    for (int v = 0; v < camera.height; ++v) {
      for (int u = 0; u < camera.width; ++u) {
        const std::size_t i = static_cast<std::size_t>(v) * camera.width + u;
        const int index = sub_index[i];
        if (index < 0 || out.data[i] == 0.0 || inv_depth[i] <= 0.0) continue;
        const Eigen::Vector2d p(u, v);
        const bool soft = in_band[i] != 0;
        // Inward normal of the edge, for the signed distance at each sub-ray.
        const Eigen::Vector2d normal =
            soft ? Eigen::Vector2d((p - nearest[i]).normalized() * (in_band[i] == 2 ? 1.0 : -1.0))
                 : Eigen::Vector2d::Zero();
        double sum = 0.0;
        int visible = 0;
        for (int k = 0; k < sub_rays; ++k) {
          const double iz = sub_inv_depth[static_cast<std::size_t>(index) * sub_rays + k];
          const double depth = 1.0 / (iz > 0.0 ? iz : inv_depth[i]);
          if (occluder->sub_ray_depth(u, v, k) <= depth) continue;
          ++visible;
          if (soft) {
            const double d = (p + offsets[k] - nearest[i]).dot(normal);
            sum += 1.0 / (1.0 + std::exp(-sub_slope * d));
          } else {
            sum += iz > 0.0 ? 1.0 : 0.0;
          }
        }
        // A pixel the hand does not hide keeps its unoccluded coverage.
        if (visible < sub_rays) out.data[i] = sum / sub_rays;
      }
    }
  }
  return out;
}

double mask_mse(const SoftMask& a, const SoftMask& b) {
  if (a.width != b.width || a.height != b.height) throw Error("mask_mse: size mismatch");
  if (a.data.empty()) throw Error("mask_mse: empty masks");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    sum += d * d;
  }
  return sum / static_cast<double>(a.data.size());
}

RenderComparator::RenderComparator(const TriangleMesh& mesh, const Camera& camera, const Mask& observed,
                                   const RenderConfig& config, const HandModel* hand)
    : renderer_(mesh), camera_(camera.downsampled(config.scale)),
      observed_(downsample_mask(observed, config.scale)), config_(config) {
  config_.validate();
  if (observed.width != camera.width || observed.height != camera.height) {
    throw Error("render: mask size does not match camera");
  }
  if (hand && config_.hand_occlusion) occluder_.emplace(*hand, camera, config_.scale);
}

SoftMask RenderComparator::render(const Pose& pose) const {
  return renderer_.render(camera_, pose, config_.edge_softness, config_.scale, occluder_ ? &*occluder_ : nullptr);
}

double RenderComparator::loss(const Pose& pose) const { return mask_mse(render(pose), observed_); }

Vec6 RenderComparator::gradient(const Pose& pose) const {
  Vec6 g;
  for (int k = 0; k < 6; ++k) {
    const double h = k < 3 ? config_.fd_translation : config_.fd_rotation;
    Vec6 e = Vec6::Zero();
    e[k] = h;
    const double plus = loss(apply_step(pose, TangentStep::from_vector(e)));
    const double minus = loss(apply_step(pose, TangentStep::from_vector(-e)));
    g[k] = (plus - minus) / (2.0 * h);
  }
  return g;
}

}  // namespace graspref

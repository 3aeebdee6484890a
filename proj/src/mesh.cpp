#include "graspref/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <unordered_map>

namespace graspref {

namespace {

constexpr double kMinFaceArea = 1e-12;

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

}  // namespace

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)) {
  for (const Vec3& v : vertices_) {
    if (!all_finite(v)) throw Error("mesh: non-finite vertex coordinate");
  }
  const int nv = static_cast<int>(vertices_.size());
  areas_.reserve(faces_.size());
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    for (int idx : faces_[f]) {
      if (idx < 0 || idx >= nv) {
        throw Error("mesh: face " + std::to_string(f) + " has out-of-range vertex index " +
                    std::to_string(idx));
      }
    }
    const Triangle t = triangle(f);
    const double area = triangle_area(t.a, t.b, t.c);
    if (!(area > kMinFaceArea)) {
      throw Error("mesh: face " + std::to_string(f) + " is degenerate (zero area)");
    }
    areas_.push_back(area);
  }
  // Fixed-order summation keeps the total reproducible.
  for (double a : areas_) total_area_ += a;
}

Triangle TriangleMesh::triangle(std::size_t face) const {
  const Face& f = faces_[face];
  return {vertices_[f[0]], vertices_[f[1]], vertices_[f[2]]};
}

Vec3 TriangleMesh::face_normal(std::size_t face) const {
  const Triangle t = triangle(face);
  return (t.b - t.a).cross(t.c - t.a).normalized();
}

Aabb TriangleMesh::bounds() const {
  Aabb box;
  for (const Vec3& v : vertices_) box.extend(v);
  return box;
}

bool TriangleMesh::is_closed() const {
  if (faces_.empty()) return false;
  const auto key = [&](int a, int b) {
    return static_cast<std::int64_t>(a) * static_cast<std::int64_t>(vertices_.size()) + b;
  };
  std::unordered_map<std::int64_t, int> directed;
  directed.reserve(faces_.size() * 3);
  for (const Face& f : faces_) {
    for (int e = 0; e < 3; ++e) {
      if (++directed[key(f[e], f[(e + 1) % 3])] > 1) return false;
    }
  }
  for (const Face& f : faces_) {
    for (int e = 0; e < 3; ++e) {
      if (!directed.contains(key(f[(e + 1) % 3], f[e]))) return false;
    }
  }
  return true;
}

double TriangleMesh::volume() const {
  double vol = 0.0;
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    const Triangle t = triangle(f);
    vol += t.a.dot(t.b.cross(t.c));
  }
  return vol / 6.0;
}

TriangleMesh TriangleMesh::transformed(const Pose& pose) const {
  std::vector<Vec3> verts;
  verts.reserve(vertices_.size());
  for (const Vec3& v : vertices_) verts.push_back(pose.transform(v));
  return TriangleMesh(std::move(verts), faces_);
}

PointCloud transformed(const PointCloud& cloud, const Pose& pose) {
  PointCloud out;
  out.weights = cloud.weights;
  out.points.reserve(cloud.size());
  for (const Vec3& p : cloud.points) out.points.push_back(pose.transform(p));
  return out;
}

// Region classification after Ericson, "Real-Time Collision Detection", 5.1.5.
Vec3 closest_point_on_triangle(const Vec3& p, const Triangle& tri) {
  const Vec3& a = tri.a;
  const Vec3& b = tri.b;
  const Vec3& c = tri.c;
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return a + v * ab;
  }

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return a + w * ac;
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return b + w * (c - b);
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  return a + ab * v + ac * w;
}

ClosestPoint point_triangle_distance(const Vec3& p, const Triangle& tri) {
  if (!(triangle_area(tri.a, tri.b, tri.c) > kMinFaceArea)) {
    throw Error("point_triangle_distance: degenerate triangle");
  }
  const Vec3 q = closest_point_on_triangle(p, tri);
  return {(p - q).norm(), q};
}

namespace {

// Draws n area-weighted surface samples; optionally reports the face of each.
PointCloud sample_surface(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed,
                          std::vector<std::size_t>* faces_out) {
  if (mesh.empty() || !(mesh.total_area() > 0.0)) throw Error("degenerate mesh");
  std::vector<double> cumulative(mesh.num_faces());
  double running = 0.0;
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    running += mesh.face_areas()[f];
    cumulative[f] = running;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  PointCloud cloud;
  cloud.points.reserve(n);
  if (faces_out) faces_out->resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double target = uniform(rng) * running;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    const std::size_t f = std::min<std::size_t>(it - cumulative.begin(), mesh.num_faces() - 1);
    const double r1 = std::sqrt(uniform(rng));
    const double r2 = uniform(rng);
    const Triangle t = mesh.triangle(f);
    cloud.points.push_back((1.0 - r1) * t.a + r1 * (1.0 - r2) * t.b + r1 * r2 * t.c);
    if (faces_out) (*faces_out)[i] = f;
  }
  return cloud;
}

}  // namespace

std::vector<std::size_t> sample_surface_faces(const TriangleMesh& mesh, std::size_t n,
                                              std::uint64_t seed) {
  std::vector<std::size_t> faces;
  sample_surface(mesh, n, seed, &faces);
  return faces;
}

PointCloud sample_surface_points(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error("sample_surface_points: n must be >= 1");
  return sample_surface(mesh, n, seed, nullptr);
}

// ---------------------------------------------------------------------------
// Primitives

namespace {

struct Ring {
  double rx, ry, z;
};

// Surface of revolution with elliptic cross-sections. A ring with zero radius
// becomes a pole; otherwise the ends are closed with flat fans.
TriangleMesh make_lathe(const std::vector<Ring>& rings, int segments) {
  std::vector<Vec3> verts;
  std::vector<Face> faces;
  const int nr = static_cast<int>(rings.size());
  const bool bottom_pole = rings.front().rx == 0.0 && rings.front().ry == 0.0;
  const bool top_pole = rings.back().rx == 0.0 && rings.back().ry == 0.0;
  const int first = bottom_pole ? 1 : 0;
  const int last = top_pole ? nr - 2 : nr - 1;

  const int bottom_center = static_cast<int>(verts.size());
  verts.emplace_back(0.0, 0.0, rings.front().z);
  std::vector<int> ring_start;
  for (int r = first; r <= last; ++r) {
    ring_start.push_back(static_cast<int>(verts.size()));
    for (int s = 0; s < segments; ++s) {
      const double th = 2.0 * kPi * s / segments;
      verts.emplace_back(rings[r].rx * std::cos(th), rings[r].ry * std::sin(th), rings[r].z);
    }
  }
  const int top_center = static_cast<int>(verts.size());
  verts.emplace_back(0.0, 0.0, rings.back().z);

  auto at = [&](int ring, int s) { return ring_start[ring] + (s % segments); };
  const int nring = static_cast<int>(ring_start.size());
  for (int s = 0; s < segments; ++s) {
    faces.push_back({bottom_center, at(0, s + 1), at(0, s)});
    faces.push_back({top_center, at(nring - 1, s), at(nring - 1, s + 1)});
  }
  for (int r = 0; r + 1 < nring; ++r) {
    for (int s = 0; s < segments; ++s) {
      faces.push_back({at(r, s), at(r, s + 1), at(r + 1, s + 1)});
      faces.push_back({at(r, s), at(r + 1, s + 1), at(r + 1, s)});
    }
  }
  return TriangleMesh(std::move(verts), std::move(faces));
}

Vec3 volume_centroid(const TriangleMesh& mesh) {
  Vec3 acc = Vec3::Zero();
  double vol = 0.0;
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const Triangle t = mesh.triangle(f);
    const double v = t.a.dot(t.b.cross(t.c)) / 6.0;
    acc += v * (t.a + t.b + t.c) / 4.0;
    vol += v;
  }
  return acc / vol;
}

}  // namespace

TriangleMesh make_box(const Vec3& size) {
  const Vec3 h = 0.5 * size;
  std::vector<Vec3> v;
  for (int i = 0; i < 8; ++i) {
    v.emplace_back((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(), (i & 4) ? h.z() : -h.z());
  }
  std::vector<Face> f = {
      {0, 2, 3}, {0, 3, 1},  // -z
      {4, 5, 7}, {4, 7, 6},  // +z
      {0, 1, 5}, {0, 5, 4},  // -y
      {2, 6, 7}, {2, 7, 3},  // +y
      {0, 4, 6}, {0, 6, 2},  // -x
      {1, 3, 7}, {1, 7, 5},  // +x
  };
  return TriangleMesh(std::move(v), std::move(f));
}

TriangleMesh make_icosphere(double radius, int subdivisions) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
                         {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
                         {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (Vec3& p : v) p.normalize();
  std::vector<Face> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                         {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                         {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                         {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::unordered_map<std::int64_t, int> midpoint;
    auto mid = [&](int a, int b) {
      const std::int64_t key = static_cast<std::int64_t>(std::min(a, b)) * 1000003 + std::max(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const int idx = static_cast<int>(v.size()) - 1;
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<Face> next;
    next.reserve(f.size() * 4);
    for (const Face& tri : f) {
      const int ab = mid(tri[0], tri[1]);
      const int bc = mid(tri[1], tri[2]);
      const int ca = mid(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    f = std::move(next);
  }
  for (Vec3& p : v) p *= radius;
  return TriangleMesh(std::move(v), std::move(f));
}

TriangleMesh make_cylinder(double radius, double height, int segments) {
  return make_lathe({{radius, radius, -0.5 * height}, {radius, radius, 0.5 * height}}, segments);
}

TriangleMesh make_capsule(double radius, double length, int segments, int rings) {
  std::vector<Ring> profile;
  profile.push_back({0.0, 0.0, -0.5 * length - radius});
  for (int k = 1; k <= rings; ++k) {
    const double phi = 0.5 * kPi * k / rings;
    const double r = radius * std::sin(phi);
    profile.push_back({r, r, -0.5 * length - radius * std::cos(phi)});
  }
  for (int k = 0; k < rings; ++k) {
    const double phi = 0.5 * kPi + 0.5 * kPi * k / rings;
    const double r = radius * std::sin(phi);
    profile.push_back({r, r, 0.5 * length - radius * std::cos(phi)});
  }
  profile.push_back({0.0, 0.0, 0.5 * length + radius});
  return make_lathe(profile, segments);
}

TriangleMesh make_bottle(double height, double width, double depth, int segments) {
  // (height fraction, cross-section scale)
  static constexpr std::array<std::array<double, 2>, 8> kProfile = {{
      {0.00, 0.86}, {0.04, 1.00}, {0.55, 1.00}, {0.68, 0.86},
      {0.78, 0.52}, {0.82, 0.40}, {0.83, 0.33}, {1.00, 0.30},
  }};
  std::vector<Ring> rings;
  for (const auto& [frac, scale] : kProfile) {
    rings.push_back({0.5 * width * scale, 0.5 * depth * scale, height * frac});
  }
  TriangleMesh raw = make_lathe(rings, segments);
  return raw.transformed(Pose::from_translation(-volume_centroid(raw)));
}

// ---------------------------------------------------------------------------
// OBJ

TriangleMesh load_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open mesh file '" + path.string() + "'");
  std::vector<Vec3> verts;
  std::vector<Face> faces;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ss >> p.x() >> p.y() >> p.z())) {
        throw Error("mesh file '" + path.string() + "': bad vertex on line " +
                    std::to_string(lineno));
      }
      verts.push_back(p);
    } else if (tag == "f") {
      std::vector<int> poly;
      std::string tok;
      while (ss >> tok) {
        int idx = 0;
        try {
          idx = std::stoi(tok.substr(0, tok.find('/')));
        } catch (const std::exception&) {
          throw Error("mesh file '" + path.string() + "': bad face index on line " +
                      std::to_string(lineno));
        }
        idx = idx < 0 ? static_cast<int>(verts.size()) + idx : idx - 1;
        poly.push_back(idx);
      }
      if (poly.size() < 3) {
        throw Error("mesh file '" + path.string() + "': face with fewer than 3 vertices on line " +
                    std::to_string(lineno));
      }
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
        faces.push_back({poly[0], poly[k], poly[k + 1]});
      }
    }
  }
  if (faces.empty()) throw Error("mesh file '" + path.string() + "' contains no faces");
  try {
    return TriangleMesh(std::move(verts), std::move(faces));
  } catch (const Error& e) {
    throw Error("mesh file '" + path.string() + "': " + e.what());
  }
}

void save_obj(const TriangleMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write mesh file '" + path.string() + "'");
  out << std::setprecision(17);
  for (const Vec3& v : mesh.vertices()) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const Face& f : mesh.faces()) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  if (!out) throw Error("failed writing mesh file '" + path.string() + "'");
}

}  // namespace graspref

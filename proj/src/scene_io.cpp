#include "graspref/scene_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>

namespace graspref {

using nlohmann::json;
namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little,
              "depth buffers are stored as little-endian float32");

namespace {

json vec_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error("expected a 3-element array");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

bool same_mesh(const TriangleMesh& a, const TriangleMesh& b) {
  return a.vertices() == b.vertices() && a.faces() == b.faces();
}

void write_mesh_reference(const TriangleMesh& mesh, const fs::path& path) {
  if (fs::exists(path)) {
    if (same_mesh(load_obj(path), mesh)) return;
    throw Error("mesh file conflict: '" + path.string() + "' exists with different contents");
  }
  fs::create_directories(path.parent_path());
  save_obj(mesh, path);
}

}  // namespace

json pose_to_json(const Pose& pose) {
  const Quat& q = pose.rotation();
  return {{"t", vec_to_json(pose.translation())}, {"q", json::array({q.w(), q.x(), q.y(), q.z()})}};
}

Pose pose_from_json(const json& j) {
  const json& q = j.at("q");
  if (!q.is_array() || q.size() != 4) throw Error("pose quaternion must have 4 elements (w,x,y,z)");
  return Pose(vec_from_json(j.at("t")),
              Quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>()));
}

std::string encode_depth(const DepthImage& depth) {
  using namespace boost::archive::iterators;
  using ToBase64 = base64_from_binary<transform_width<const char*, 6, 8>>;
  const char* begin = reinterpret_cast<const char*>(depth.data.data());
  const std::size_t bytes = depth.data.size() * sizeof(float);
  std::string out(ToBase64(begin), ToBase64(begin + bytes));
  out.append((3 - bytes % 3) % 3, '=');
  return out;
}

DepthImage decode_depth(const std::string& text, int width, int height) {
  using namespace boost::archive::iterators;
  using FromBase64 = transform_width<binary_from_base64<std::string::const_iterator>, 8, 6>;
  std::string padded = text;
  std::size_t pad = 0;
  while (!padded.empty() && padded.back() == '=') {
    padded.pop_back();
    ++pad;
  }
  padded.append(pad, 'A');
  std::string raw;
  try {
    raw.assign(FromBase64(padded.cbegin()), FromBase64(padded.cend()));
  } catch (const std::exception&) {
    throw Error("depth buffer is not valid base64");
  }
  if (raw.size() >= pad) raw.resize(raw.size() - pad);
  DepthImage depth(width, height, 0.0f);
  if (raw.size() != depth.data.size() * sizeof(float)) {
    throw Error("depth buffer has " + std::to_string(raw.size()) + " bytes, expected " +
                std::to_string(depth.data.size() * sizeof(float)));
  }
  std::memcpy(depth.data.data(), raw.data(), raw.size());
  return depth;
}

// Alternating run lengths, starting with a (possibly empty) run of zeros.
std::vector<std::uint32_t> encode_mask_runs(const Mask& mask) {
  std::vector<std::uint32_t> runs;
  std::uint8_t current = 0;
  std::uint32_t length = 0;
  for (std::uint8_t px : mask.data) {
    const std::uint8_t bit = px ? 1 : 0;
    if (bit != current) {
      runs.push_back(length);
      current = bit;
      length = 0;
    }
    ++length;
  }
  runs.push_back(length);
  return runs;
}

Mask decode_mask_runs(const std::vector<std::uint32_t>& runs, int width, int height) {
  Mask mask(width, height, 0);
  std::size_t pos = 0;
  std::uint8_t bit = 0;
  for (std::uint32_t run : runs) {
    if (pos + run > mask.data.size()) throw Error("mask runs exceed image size");
    std::fill_n(mask.data.begin() + static_cast<std::ptrdiff_t>(pos), run, bit);
    pos += run;
    bit ^= 1;
  }
  if (pos != mask.data.size()) throw Error("mask runs do not cover the image");
  return mask;
}

void save_scene(const SceneSample& sample, const fs::path& path) {
  const fs::path dir = path.parent_path();
  if (!dir.empty()) fs::create_directories(dir);
  const Observation& obs = sample.observation;
  const Camera& cam = obs.camera;

  json links = json::array();
  for (const HandLink& link : sample.hand->links()) {
    write_mesh_reference(link.mesh, dir / link.mesh_file);
    links.push_back({{"name", link.name}, {"mesh", link.mesh_file}, {"pose", pose_to_json(link.pose)}});
  }
  write_mesh_reference(sample.object, dir / sample.object_mesh_file);

  json tactile = json::array();
  for (const TactileReading& r : obs.tactile) {
    tactile.push_back(
        {{"p", vec_to_json(r.position)}, {"n", vec_to_json(r.normal)}, {"f", vec_to_json(r.force)}});
  }

  json doc = {
      {"format", kSceneFormat},
      {"id", sample.id},
      {"seed", sample.seed},
      {"camera",
       {{"fx", cam.fx},
        {"fy", cam.fy},
        {"cx", cam.cx},
        {"cy", cam.cy},
        {"width", cam.width},
        {"height", cam.height},
        {"camera_from_world", pose_to_json(cam.camera_from_world)}}},
      {"object", {{"mesh", sample.object_mesh_file}}},
      {"hand",
       {{"sdf_cell", sample.hand->sdf_options().cell},
        {"sdf_padding", sample.hand->sdf_options().padding},
        {"links", links}}},
      {"gt_pose", pose_to_json(sample.gt_pose)},
      {"initial_pose", pose_to_json(sample.initial_pose)},
      {"depth", {{"encoding", "base64-f32le"}, {"data", encode_depth(obs.depth)}}},
      {"mask", {{"encoding", "rle"}, {"runs", encode_mask_runs(obs.mask)}}},
      {"tactile", tactile},
      {"occlusion_fraction", sample.occlusion_fraction},
  };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write scene file '" + path.string() + "'");
  out << doc.dump(1) << '\n';
  if (!out) throw Error("failed writing scene file '" + path.string() + "'");
}

SceneSample load_scene(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open scene file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();

  json doc;
  try {
    doc = json::parse(buffer.str());
  } catch (const json::exception& e) {
    throw Error("scene file '" + path.string() + "': parse error: " + e.what());
  }

  try {
    const std::string format = doc.at("format").get<std::string>();
    if (format != kSceneFormat) {
      throw Error("scene file '" + path.string() + "': unsupported format '" + format +
                  "'; supported versions: " + std::string(kSceneFormat));
    }
    const fs::path dir = path.parent_path();
    SceneSample sample;
    sample.id = doc.at("id").get<std::string>();
    sample.seed = doc.at("seed").get<std::uint64_t>();

    const json& jc = doc.at("camera");
    Camera cam;
    cam.fx = jc.at("fx").get<double>();
    cam.fy = jc.at("fy").get<double>();
    cam.cx = jc.at("cx").get<double>();
    cam.cy = jc.at("cy").get<double>();
    cam.width = jc.at("width").get<int>();
    cam.height = jc.at("height").get<int>();
    cam.camera_from_world = pose_from_json(jc.at("camera_from_world"));
    cam.validate();

    sample.object_mesh_file = doc.at("object").at("mesh").get<std::string>();
    sample.object = load_obj(dir / sample.object_mesh_file);

    const json& jh = doc.at("hand");
    HandSdfOptions sdf_opts{jh.at("sdf_cell").get<double>(), jh.at("sdf_padding").get<double>()};
    std::vector<HandLink> links;
    for (const json& jl : jh.at("links")) {
      HandLink link;
      link.name = jl.at("name").get<std::string>();
      link.mesh_file = jl.at("mesh").get<std::string>();
      link.mesh = load_obj(dir / link.mesh_file);
      link.pose = pose_from_json(jl.at("pose"));
      links.push_back(std::move(link));
    }
    sample.hand = std::make_shared<const HandModel>(std::move(links), sdf_opts);

    sample.gt_pose = pose_from_json(doc.at("gt_pose"));
    sample.initial_pose = pose_from_json(doc.at("initial_pose"));

    Observation& obs = sample.observation;
    obs.camera = cam;
    const json& jd = doc.at("depth");
    if (jd.at("encoding").get<std::string>() != "base64-f32le") {
      throw Error("unsupported depth encoding '" + jd.at("encoding").get<std::string>() + "'");
    }
    obs.depth = decode_depth(jd.at("data").get<std::string>(), cam.width, cam.height);
    const json& jm = doc.at("mask");
    if (jm.at("encoding").get<std::string>() != "rle") {
      throw Error("unsupported mask encoding '" + jm.at("encoding").get<std::string>() + "'");
    }
    obs.mask = decode_mask_runs(jm.at("runs").get<std::vector<std::uint32_t>>(), cam.width, cam.height);
    for (const json& jt : doc.at("tactile")) {
      TactileReading r;
      r.position = vec_from_json(jt.at("p"));
      r.normal = vec_from_json(jt.at("n"));
      r.force = vec_from_json(jt.at("f"));
      obs.tactile.push_back(r);
    }
    sample.occlusion_fraction = doc.at("occlusion_fraction").get<double>();
    return sample;
  } catch (const json::exception& e) {
    throw Error("scene file '" + path.string() + "': schema violation: " + e.what());
  } catch (const Error& e) {
    const std::string msg = e.what();
    if (msg.find(path.string()) != std::string::npos) throw;
    throw Error("scene file '" + path.string() + "': " + msg);
  }
}

}  // namespace graspref

#include "graspref/experiment.hpp"

#include "graspref/scene_io.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#ifndef GRASPREF_VERSION
#define GRASPREF_VERSION "unknown"
#endif

namespace graspref {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!j.is_object()) throw UsageError("config: '" + std::string(where) + "' must be an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (std::string_view a : allowed) ok = ok || item.key() == a;
    if (!ok) throw UsageError("config: unknown key '" + item.key() + "' in '" + std::string(where) + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_vec(const json& j, const char* key, Vec3& out) {
  if (!j.contains(key)) return;
  const json& a = j.at(key);
  if (!a.is_array() || a.size() != 3) throw UsageError(std::string("config: '") + key + "' must have 3 entries");
  out = Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

std::string weighting_name(Weighting w) { return w == Weighting::hard_select ? "hard-select" : "proportional"; }

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string termination_name(Termination t) { return t == Termination::budget ? "budget" : "no-improvement"; }

}  // namespace

void ExperimentConfig::propagate_seed() {
  gen.seed = seed;
  refine.seed = seed;
  icp.seed = seed;
}

json config_to_json(const ExperimentConfig& c) {
  json steps = json::object();
  for (Source s : kAllSources) {
    const StepSizes& st = c.refine.step_sizes[index_of(s)];
    steps[std::string(source_name(s))] = {{"translation", st.translation}, {"rotation", st.rotation}};
  }
  const GenConfig& g = c.gen;
  return {
      {"format", kConfigFormat},
      {"seed", c.seed},
      {"workers", c.workers},
      {"method", c.method},
      {"allow_partial", c.allow_partial},
      {"sweep_iterations", c.sweep_iterations},
      {"gen",
       {{"samples", g.samples},
        {"object",
         {{"kind", g.object.kind},
          {"size", vec_json(g.object.size)},
          {"path", g.object.path.string()},
          {"segments", g.object.segments}}},
        {"hand",
         {{"fingers", g.hand.fingers},
          {"palm_size", vec_json(g.hand.palm_size)},
          {"finger_size", vec_json(g.hand.finger_size)},
          {"finger_spacing", g.hand.finger_spacing},
          {"sdf_cell", g.hand.sdf_cell},
          {"sdf_padding", g.hand.sdf_padding}}},
        {"camera",
         {{"width", g.camera.width},
          {"height", g.camera.height},
          {"focal", g.camera.focal},
          {"distance", g.camera.distance},
          {"max_tilt_deg", g.camera.max_tilt_deg}}},
        {"tactile",
         {{"palm_rows", g.tactile.palm_rows},
          {"palm_cols", g.tactile.palm_cols},
          {"finger_rows", g.tactile.finger_rows},
          {"finger_cols", g.tactile.finger_cols},
          {"contact_radius", g.tactile.contact_radius},
          {"stiffness", g.tactile.stiffness},
          {"max_force", g.tactile.max_force}}},
        {"noise", {{"sigma_t", g.noise.sigma_t}, {"sigma_r_deg", g.noise.sigma_r_deg}}},
        {"mask_erosion", g.mask_erosion},
        {"contact_penetration", g.contact_penetration},
        {"max_gt_iv", g.max_gt_iv},
        {"max_attempts", g.max_attempts}}},
      {"refine",
       {{"iters", c.refine.max_iterations},
        {"step_sizes", steps},
        {"lambda", c.refine.physics.lambda},
        {"regularize", c.refine.physics.regularize},
        {"leak_slope", c.refine.physics.leak_slope},
        {"leak_width", c.refine.physics.leak_width},
        {"stiffness", c.refine.physics.stiffness},
        {"physics_samples", c.refine.physics.samples},
        {"gamma", c.refine.gamma},
        {"checkpoint", c.refine.checkpointing},
        {"weighting", weighting_name(c.refine.weighting)},
        {"render",
         {{"scale", c.refine.render.scale},
          {"edge_softness", c.refine.render.edge_softness},
          {"fd_translation", c.refine.render.fd_translation},
          {"fd_rotation", c.refine.render.fd_rotation}}}}},
      {"icp",
       {{"iters", c.icp.max_iterations},
        {"tolerance", c.icp.tolerance},
        {"max_correspondence_distance", c.icp.max_correspondence_distance},
        {"model_samples", c.icp.model_samples}}},
      {"metrics",
       {{"contact_epsilon", c.metrics.contact_epsilon},
        {"contact_samples", c.metrics.contact_samples},
        {"volume_samples", c.metrics.volume_samples},
        {"seed", c.metrics.seed}}},
  };
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  try {
    check_keys(j, {"format", "seed", "workers", "method", "allow_partial", "sweep_iterations", "gen", "refine", "icp",
                   "metrics"},
               "config");
    if (j.contains("format") && j.at("format").get<std::string>() != kConfigFormat) {
      throw UsageError("config: unsupported format '" + j.at("format").get<std::string>() +
                       "'; supported versions: " + std::string(kConfigFormat));
    }
    read(j, "seed", c.seed);
    read(j, "workers", c.workers);
    read(j, "method", c.method);
    read(j, "allow_partial", c.allow_partial);
    read(j, "sweep_iterations", c.sweep_iterations);

    if (j.contains("gen")) {
      const json& g = j.at("gen");
      check_keys(g, {"samples", "object", "hand", "camera", "tactile", "noise", "mask_erosion",
                     "contact_penetration", "max_gt_iv", "max_attempts"},
                 "gen");
      GenConfig& o = c.gen;
      read(g, "samples", o.samples);
      read(g, "mask_erosion", o.mask_erosion);
      read(g, "contact_penetration", o.contact_penetration);
      read(g, "max_gt_iv", o.max_gt_iv);
      read(g, "max_attempts", o.max_attempts);
      if (g.contains("object")) {
        const json& x = g.at("object");
        check_keys(x, {"kind", "size", "path", "segments"}, "gen.object");
        read(x, "kind", o.object.kind);
        read_vec(x, "size", o.object.size);
        if (x.contains("path")) o.object.path = x.at("path").get<std::string>();
        read(x, "segments", o.object.segments);
      }
      if (g.contains("hand")) {
        const json& x = g.at("hand");
        check_keys(x, {"fingers", "palm_size", "finger_size", "finger_spacing", "sdf_cell", "sdf_padding"},
                   "gen.hand");
        read(x, "fingers", o.hand.fingers);
        read_vec(x, "palm_size", o.hand.palm_size);
        read_vec(x, "finger_size", o.hand.finger_size);
        read(x, "finger_spacing", o.hand.finger_spacing);
        read(x, "sdf_cell", o.hand.sdf_cell);
        read(x, "sdf_padding", o.hand.sdf_padding);
      }
      if (g.contains("camera")) {
        const json& x = g.at("camera");
        check_keys(x, {"width", "height", "focal", "distance", "max_tilt_deg"}, "gen.camera");
        read(x, "width", o.camera.width);
        read(x, "height", o.camera.height);
        read(x, "focal", o.camera.focal);
        read(x, "distance", o.camera.distance);
        read(x, "max_tilt_deg", o.camera.max_tilt_deg);
      }
      if (g.contains("tactile")) {
        const json& x = g.at("tactile");
        check_keys(x, {"palm_rows", "palm_cols", "finger_rows", "finger_cols", "contact_radius", "stiffness",
                       "max_force"},
                   "gen.tactile");
        read(x, "palm_rows", o.tactile.palm_rows);
        read(x, "palm_cols", o.tactile.palm_cols);
        read(x, "finger_rows", o.tactile.finger_rows);
        read(x, "finger_cols", o.tactile.finger_cols);
        read(x, "contact_radius", o.tactile.contact_radius);
        read(x, "stiffness", o.tactile.stiffness);
        read(x, "max_force", o.tactile.max_force);
      }
      if (g.contains("noise")) {
        const json& x = g.at("noise");
        check_keys(x, {"sigma_t", "sigma_r_deg"}, "gen.noise");
        read(x, "sigma_t", o.noise.sigma_t);
        read(x, "sigma_r_deg", o.noise.sigma_r_deg);
      }
    }

    if (j.contains("refine")) {
      const json& r = j.at("refine");
      check_keys(r, {"iters", "step_sizes", "lambda", "regularize", "leak_slope", "leak_width", "stiffness", "physics_samples",
                     "gamma", "checkpoint", "weighting", "render"},
                 "refine");
      RefinementConfig& o = c.refine;
      read(r, "iters", o.max_iterations);
      read(r, "lambda", o.physics.lambda);
      read(r, "regularize", o.physics.regularize);
      read(r, "leak_slope", o.physics.leak_slope);
      read(r, "leak_width", o.physics.leak_width);
      read(r, "stiffness", o.physics.stiffness);
      read(r, "physics_samples", o.physics.samples);
      read(r, "gamma", o.gamma);
      read(r, "checkpoint", o.checkpointing);
      if (r.contains("weighting")) {
        const std::string w = r.at("weighting").get<std::string>();
        if (w == "proportional") o.weighting = Weighting::proportional;
        else if (w == "hard-select") o.weighting = Weighting::hard_select;
        else throw UsageError("config: weighting must be 'proportional' or 'hard-select'");
      }
      if (r.contains("step_sizes")) {
        const json& st = r.at("step_sizes");
        check_keys(st, {"physics", "render", "depth", "tactile"}, "refine.step_sizes");
        for (const auto& item : st.items()) {
          check_keys(item.value(), {"translation", "rotation"}, "refine.step_sizes." + item.key());
          StepSizes& s = o.step_sizes[index_of(*parse_source(item.key()))];
          read(item.value(), "translation", s.translation);
          read(item.value(), "rotation", s.rotation);
        }
      }
      if (r.contains("render")) {
        const json& x = r.at("render");
        check_keys(x, {"scale", "edge_softness", "fd_translation", "fd_rotation"}, "refine.render");
        read(x, "scale", o.render.scale);
        read(x, "edge_softness", o.render.edge_softness);
        read(x, "fd_translation", o.render.fd_translation);
        read(x, "fd_rotation", o.render.fd_rotation);
      }
    }

    if (j.contains("icp")) {
      const json& x = j.at("icp");
      check_keys(x, {"iters", "tolerance", "max_correspondence_distance", "model_samples"}, "icp");
      read(x, "iters", c.icp.max_iterations);
      read(x, "tolerance", c.icp.tolerance);
      read(x, "max_correspondence_distance", c.icp.max_correspondence_distance);
      read(x, "model_samples", c.icp.model_samples);
    }
    if (j.contains("metrics")) {
      const json& x = j.at("metrics");
      check_keys(x, {"contact_epsilon", "contact_samples", "volume_samples", "seed"}, "metrics");
      read(x, "contact_epsilon", c.metrics.contact_epsilon);
      read(x, "contact_samples", c.metrics.contact_samples);
      read(x, "volume_samples", c.metrics.volume_samples);
      read(x, "seed", c.metrics.seed);
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  c.propagate_seed();
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw UsageError("config file '" + path.string() + "': parse error: " + e.what());
  }
  return config_from_json(j);
}

Method parse_method(std::string_view text) {
  Method m;
  m.name = std::string(text);
  if (text == "ours") return m;
  if (text == "icp") {
    m.kind = MethodKind::icp;
    return m;
  }
  if (text == "icp-cp") {
    m.kind = MethodKind::icp_cp;
    return m;
  }
  if (text == "gt") {
    m.kind = MethodKind::ground_truth;
    return m;
  }
  if (text == "initial") {
    m.kind = MethodKind::initial;
    return m;
  }
  constexpr std::string_view prefix = "ours-ablate:";
  if (text.starts_with(prefix)) {
    m.sources.fill(false);
    std::string_view rest = text.substr(prefix.size());
    while (true) {
      const std::size_t cut = rest.find('+');
      const std::string_view name = rest.substr(0, cut);
      const std::optional<Source> s = parse_source(name);
      if (!s) {
        throw UsageError("unknown gradient source '" + std::string(name) +
                         "' (physics, render, depth, tactile); valid methods: " + valid_methods());
      }
      m.sources[index_of(*s)] = true;
      if (cut == std::string_view::npos) break;
      rest = rest.substr(cut + 1);
    }
    bool any = false;
    for (bool b : m.sources) any = any || b;
    if (any) return m;
  }
  throw UsageError("unknown method '" + std::string(text) + "'; valid methods: " + valid_methods());
}

std::string valid_methods() { return "ours, ours-ablate:<source>[+<source>...], icp, icp-cp, gt, initial"; }

MethodOutput run_method(const SceneSample& sample, const Method& method, const ExperimentConfig& cfg) {
  switch (method.kind) {
    case MethodKind::ours: {
      RefinementConfig rc = cfg.refine;
      rc.enabled = method.sources;
      RefinementResult r = refine(sample, rc);
      return {r.final_pose, std::move(r)};
    }
    case MethodKind::icp: return {icp_refine(sample, sample.initial_pose, cfg.icp), std::nullopt};
    case MethodKind::icp_cp:
      return {icp_with_checkpointing(sample, sample.initial_pose, cfg.icp, cfg.refine.render), std::nullopt};
    case MethodKind::ground_truth: return {sample.gt_pose, std::nullopt};
    case MethodKind::initial: return {sample.initial_pose, std::nullopt};
  }
  throw Error("unknown method kind");
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  const std::size_t count = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (count <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < count; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  }
  for (std::thread& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<MethodOutput> run_batch(const std::vector<SceneSample>& samples, const Method& method,
                                    const ExperimentConfig& cfg) {
  std::vector<MethodOutput> out(samples.size());
  parallel_for(samples.size(), cfg.workers, [&](std::size_t i) { out[i] = run_method(samples[i], method, cfg); });
  return out;
}

Pose pose_at_budget(const RefinementResult& run, int n, bool checkpointing) {
  if (n < 1) throw Error("pose_at_budget: budget must be >= 1");
  const IterationTrace& trace = run.trace;
  const std::size_t end = std::min(static_cast<std::size_t>(n), trace.size());
  if (checkpointing) {
    const std::size_t ri = index_of(Source::render);
    std::size_t best = 0;
    for (std::size_t i = 1; i < end; ++i) {
      if (trace[i].losses[ri] < trace[best].losses[ri]) best = i;
    }
    return trace[best].pose;
  }
  return static_cast<std::size_t>(n) < trace.size() ? trace[n].pose : run.last_pose;
}

SuiteEvaluator::SuiteEvaluator(const std::vector<SceneSample>& samples, const MetricsConfig& cfg, int workers)
    : samples_(samples), evaluators_(samples.size()), gt_(samples.size()), workers_(workers) {
  // Samples usually share one object; its interior samples are drawn once.
  std::vector<std::pair<const TriangleMesh*, std::shared_ptr<const MetricsEvaluator>>> unique;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const TriangleMesh& mesh = samples[i].object;
    for (const auto& [m, e] : unique) {
      if (m->vertices() == mesh.vertices() && m->faces() == mesh.faces()) {
        evaluators_[i] = e;
        break;
      }
    }
    if (!evaluators_[i]) {
      evaluators_[i] = std::make_shared<const MetricsEvaluator>(mesh, cfg);
      unique.emplace_back(&mesh, evaluators_[i]);
    }
  }
  parallel_for(samples.size(), workers, [&](std::size_t i) {
    gt_[i] = evaluators_[i]->geometry(*samples_[i].hand, samples_[i].gt_pose);
  });
}

MetricsReport SuiteEvaluator::evaluate(std::size_t i, const Pose& pose) const {
  return evaluators_.at(i)->evaluate(*samples_[i].hand, pose, samples_[i].gt_pose, gt_[i]);
}

std::vector<MetricsReport> SuiteEvaluator::evaluate(const std::vector<Pose>& poses) const {
  if (poses.size() != samples_.size()) throw Error("evaluate: pose count does not match the suite");
  std::vector<MetricsReport> out(poses.size());
  parallel_for(poses.size(), workers_, [&](std::size_t i) { out[i] = evaluate(i, poses[i]); });
  return out;
}

MetricsReport mean_report(const std::vector<MetricsReport>& reports) {
  MetricsReport m;
  if (reports.empty()) return m;
  for (const MetricsReport& r : reports) {
    m.pe += r.pe;
    m.oe += r.oe;
    m.ca += r.ca;
    m.iv += r.iv;
    m.delta_ca += r.delta_ca;
    m.delta_iv += r.delta_iv;
  }
  const double n = static_cast<double>(reports.size());
  m.pe /= n;
  m.oe /= n;
  m.ca /= n;
  m.iv /= n;
  m.delta_ca /= n;
  m.delta_iv /= n;
  return m;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

std::vector<SceneSample> generate_dataset(const ExperimentConfig& cfg) {
  cfg.gen.validate();
  const TriangleMesh object = make_object(cfg.gen.object);
  std::vector<SceneSample> out(static_cast<std::size_t>(cfg.gen.samples));
  parallel_for(out.size(), cfg.workers,
               [&](std::size_t i) { out[i] = generate_sample(cfg.gen, object, static_cast<int>(i)); });
  return out;
}

void write_dataset(const std::vector<SceneSample>& samples, const ExperimentConfig& cfg, const fs::path& dir) {
  json list = json::array();
  std::string digest;
  for (const SceneSample& s : samples) {
    const fs::path rel = fs::path("scenes") / (s.id + ".json");
    save_scene(s, dir / rel);
    const std::string h = hex64(fnv1a64(read_file(dir / rel)));
    digest += h;
    list.push_back({{"id", s.id}, {"file", rel.generic_string()}, {"fnv1a64", h},
                    {"occlusion_fraction", s.occlusion_fraction}});
  }
  const json cfg_json = config_to_json(cfg);
  digest += cfg_json.dump();
  const json manifest = {{"format", kDatasetFormat},
                         {"version", GRASPREF_VERSION},
                         {"hash", hex64(fnv1a64(digest))},
                         {"config", cfg_json},
                         {"samples", list}};
  write_file(dir / "manifest.json", manifest.dump(1) + "\n");
}

std::vector<SceneSample> load_dataset(const fs::path& dir) {
  json manifest;
  try {
    manifest = json::parse(read_file(dir / "manifest.json"));
    if (manifest.at("format").get<std::string>() != kDatasetFormat) {
      throw Error("dataset '" + dir.string() + "': unsupported format '" +
                  manifest.at("format").get<std::string>() + "'; supported versions: " + std::string(kDatasetFormat));
    }
    std::vector<SceneSample> out;
    for (const json& s : manifest.at("samples")) out.push_back(load_scene(dir / s.at("file").get<std::string>()));
    return out;
  } catch (const json::exception& e) {
    throw Error("dataset '" + dir.string() + "': " + e.what());
  }
}

void write_results(const std::vector<SceneSample>& samples, const std::vector<MethodOutput>& outputs,
                   const Method& method, const ExperimentConfig& cfg, const fs::path& dir) {
  if (samples.size() != outputs.size()) throw Error("write_results: output count does not match samples");
  json list = json::array();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const MethodOutput& o = outputs[i];
    json doc = {{"id", samples[i].id}, {"method", method.name}, {"pose", pose_to_json(o.pose)}};
    if (o.refinement) {
      const RefinementResult& r = *o.refinement;
      doc["iterations"] = r.iterations;
      doc["termination"] = termination_name(r.termination);
      doc["checkpoint_iteration"] = r.checkpoint_iteration;
      std::ostringstream csv;
      write_trace_csv(r.trace, csv);
      write_file(dir / "traces" / (samples[i].id + ".csv"), csv.str());
    }
    write_file(dir / "poses" / (samples[i].id + ".json"), doc.dump(1) + "\n");
    list.push_back(samples[i].id);
  }
  ExperimentConfig echo = cfg;
  echo.method = method.name;
  const json manifest = {{"format", kResultsFormat},
                         {"version", GRASPREF_VERSION},
                         {"method", method.name},
                         {"config", config_to_json(echo)},
                         {"samples", list}};
  write_file(dir / "manifest.json", manifest.dump(1) + "\n");
}

ResultSet load_results(const fs::path& dir) {
  try {
    const json manifest = json::parse(read_file(dir / "manifest.json"));
    if (manifest.at("format").get<std::string>() != kResultsFormat) {
      throw Error("results '" + dir.string() + "': unsupported format '" +
                  manifest.at("format").get<std::string>() + "'; supported versions: " + std::string(kResultsFormat));
    }
    ResultSet rs;
    rs.method = manifest.at("method").get<std::string>();
    for (const json& id : manifest.at("samples")) {
      const fs::path file = dir / "poses" / (id.get<std::string>() + ".json");
      if (!fs::exists(file)) continue;
      const json doc = json::parse(read_file(file));
      rs.poses.emplace(id.get<std::string>(), pose_from_json(doc.at("pose")));
    }
    return rs;
  } catch (const json::exception& e) {
    throw Error("results '" + dir.string() + "': " + e.what());
  }
}

EvalTables evaluate_results(const std::vector<SceneSample>& samples, const std::vector<ResultSet>& results,
                            const ExperimentConfig& cfg) {
  const SuiteEvaluator suite(samples, cfg.metrics, cfg.workers);
  EvalTables tables;
  for (const ResultSet& rs : results) {
    std::vector<std::size_t> idx;
    std::vector<MetricsReport> reports;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (rs.poses.count(samples[i].id)) idx.push_back(i);
      else tables.missing.push_back(rs.method + ":" + samples[i].id);
    }
    reports.resize(idx.size());
    parallel_for(idx.size(), cfg.workers,
                 [&](std::size_t k) { reports[k] = suite.evaluate(idx[k], rs.poses.at(samples[idx[k]].id)); });
    for (std::size_t k = 0; k < idx.size(); ++k) tables.rows.push_back({samples[idx[k]].id, rs.method, reports[k]});
    tables.summary.emplace_back(rs.method, mean_report(reports));
  }
  return tables;
}

std::string rows_csv(const std::vector<EvalRow>& rows) {
  std::string out = "sample,method,PE,OE,CA,IV,dCA,dIV\n";
  for (const EvalRow& r : rows) {
    const MetricsReport& m = r.report;
    out += r.sample + "," + r.method + "," + num(m.pe) + "," + num(m.oe) + "," + num(m.ca) + "," + num(m.iv) +
           "," + num(m.delta_ca) + "," + num(m.delta_iv) + "\n";
  }
  return out;
}

std::string summary_csv(const std::vector<std::pair<std::string, MetricsReport>>& summary) {
  std::string out = "method,PE,OE,CA,IV,dCA,dIV\n";
  for (const auto& [name, m] : summary) {
    out += name + "," + num(m.pe) + "," + num(m.oe) + "," + num(m.ca) + "," + num(m.iv) + "," + num(m.delta_ca) +
           "," + num(m.delta_iv) + "\n";
  }
  return out;
}

json summary_json(const std::vector<std::pair<std::string, MetricsReport>>& summary) {
  json rows = json::array();
  for (const auto& [name, m] : summary) {
    rows.push_back({{"method", name},
                    {"PE_cm", m.pe},
                    {"OE_deg", m.oe},
                    {"CA_cm2", m.ca},
                    {"IV_cm3", m.iv},
                    {"dCA_cm2", m.delta_ca},
                    {"dIV_cm3", m.delta_iv}});
  }
  return {{"columns", {"PE", "OE", "CA", "IV", "dCA", "dIV"}}, {"rows", rows}};
}

std::string summary_table(const std::vector<std::pair<std::string, MetricsReport>>& summary) {
  std::size_t width = 6;
  for (const auto& [name, m] : summary) width = std::max(width, name.size());
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s %9s %9s %9s %9s %9s %9s\n", static_cast<int>(width), "method", "PE[cm]",
                "OE[deg]", "CA[cm2]", "IV[cm3]", "|dCA|", "|dIV|");
  out += buf;
  for (const auto& [name, m] : summary) {
    std::snprintf(buf, sizeof buf, "%-*s %9.3f %9.3f %9.3f %9.3f %9.3f %9.3f\n", static_cast<int>(width),
                  name.c_str(), m.pe, m.oe, m.ca, m.iv, m.delta_ca, m.delta_iv);
    out += buf;
  }
  return out;
}

std::vector<SweepRow> run_sweep(const std::vector<SceneSample>& samples, const Method& method,
                                const ExperimentConfig& cfg, const SuiteEvaluator& metrics) {
  if (method.kind != MethodKind::ours) throw UsageError("sweep: only ours and ours-ablate methods have traces");
  if (cfg.sweep_iterations.empty()) throw UsageError("sweep: no iteration budgets given");
  ExperimentConfig run_cfg = cfg;
  run_cfg.refine.max_iterations = 0;
  for (int n : cfg.sweep_iterations) {
    if (n < 1) throw UsageError("sweep: iteration budgets must be >= 1");
    run_cfg.refine.max_iterations = std::max(run_cfg.refine.max_iterations, n);
  }
  const std::vector<MethodOutput> runs = run_batch(samples, method, run_cfg);
  std::vector<SweepRow> rows;
  for (int n : cfg.sweep_iterations) {
    std::vector<Pose> poses;
    for (const MethodOutput& o : runs) poses.push_back(pose_at_budget(*o.refinement, n, cfg.refine.checkpointing));
    rows.push_back({n, mean_report(metrics.evaluate(poses))});
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "iterations,PE,OE,CA,IV,dCA,dIV\n";
  for (const SweepRow& r : rows) {
    const MetricsReport& m = r.mean;
    out += std::to_string(r.iterations) + "," + num(m.pe) + "," + num(m.oe) + "," + num(m.ca) + "," + num(m.iv) +
           "," + num(m.delta_ca) + "," + num(m.delta_iv) + "\n";
  }
  return out;
}

}  // namespace graspref

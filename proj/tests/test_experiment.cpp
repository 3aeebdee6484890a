#include "graspref/experiment.hpp"

#include "support.hpp"

#include <doctest.h>

#include <atomic>
#include <filesystem>

using namespace graspref;
using namespace graspref::test;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.gen.samples = 3;
  cfg.seed = 17;
  cfg.propagate_seed();
  cfg.metrics.contact_samples = 5000;
  cfg.metrics.volume_samples = 5000;
  return cfg;
}

}  // namespace

TEST_CASE("config json round trip and strict keys") {
  ExperimentConfig cfg;
  cfg.seed = 9;
  cfg.refine.physics.lambda = 0.3;
  cfg.refine.physics.stiffness = 12.5;
  cfg.refine.step_sizes[1].rotation = 7e-3;
  cfg.gen.noise.sigma_t = 0.015;
  cfg.sweep_iterations = {10, 20};
  const nlohmann::json j = config_to_json(cfg);
  const ExperimentConfig back = config_from_json(j);
  CHECK(config_to_json(back) == j);
  CHECK(back.refine.physics.stiffness == 12.5);
  CHECK(back.refine.step_sizes[1].rotation == 7e-3);

  nlohmann::json partial = {{"format", std::string(kConfigFormat)}, {"refine", {{"lambda", 0.7}}}};
  const ExperimentConfig p = config_from_json(partial);
  CHECK(p.refine.physics.lambda == 0.7);
  CHECK(p.refine.max_iterations == RefinementConfig{}.max_iterations);

  nlohmann::json unknown = j;
  unknown["refine"]["lamda"] = 1.0;
  try {
    config_from_json(unknown);
    FAIL("expected an error");
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()).find("lamda") != std::string::npos);
  }
  nlohmann::json version = j;
  version["format"] = "graspref-config/9";
  CHECK_THROWS_AS(config_from_json(version), UsageError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), Error);
}

TEST_CASE("seed propagation") {
  ExperimentConfig cfg;
  cfg.seed = 1234;
  cfg.propagate_seed();
  CHECK(cfg.gen.seed == 1234);
  CHECK(cfg.refine.seed == 1234);
  CHECK(cfg.icp.seed == 1234);
}

TEST_CASE("method names") {
  CHECK(parse_method("ours").kind == MethodKind::ours);
  CHECK(parse_method("icp").kind == MethodKind::icp);
  CHECK(parse_method("icp-cp").kind == MethodKind::icp_cp);
  CHECK(parse_method("gt").kind == MethodKind::ground_truth);
  CHECK(parse_method("initial").kind == MethodKind::initial);
  const Method m = parse_method("ours-ablate:physics+tactile");
  CHECK(m.kind == MethodKind::ours);
  CHECK(m.sources == std::array<bool, kSourceCount>{true, false, false, true});
  CHECK(m.name == "ours-ablate:physics+tactile");
  CHECK(parse_method("ours-ablate:render").sources == std::array<bool, kSourceCount>{false, true, false, false});
  for (const char* bad : {"", "ICP", "ours-ablate:", "ours-ablate:sound", "ours-ablate:render+", "foo"}) {
    CHECK_THROWS_AS(parse_method(bad), UsageError);
  }
  try {
    parse_method("bogus");
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()).find(valid_methods()) != std::string::npos);
  }
}

TEST_CASE("parallel_for visits every index and rethrows") {
  for (int workers : {1, 3, 8}) {
    std::vector<std::atomic<int>> hits(37);
    parallel_for(hits.size(), workers, [&](std::size_t i) { ++hits[i]; });
    for (const auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(20, workers,
                                 [](std::size_t i) {
                                   if (i == 7) throw Error("boom");
                                 }),
                    Error);
  }
  parallel_for(0, 4, [](std::size_t) { FAIL("no work expected"); });
}

TEST_CASE("hashing helpers") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("budget prefixes reproduce shorter runs") {
  const ExperimentConfig base = small_config();
  const SceneSample s = generate_sample(base.gen, make_object(base.gen.object), 0);
  RefinementConfig rc = base.refine;
  rc.max_iterations = 90;
  const RefinementResult longer = refine(s, rc);
  for (bool checkpointing : {true, false}) {
    RefinementConfig shorter = rc;
    shorter.max_iterations = 30;
    shorter.checkpointing = checkpointing;
    const Pose expected = refine(s, shorter).final_pose;
    const Pose read = pose_at_budget(longer, 30, checkpointing);
    CHECK(read.translation() == expected.translation());
    CHECK(read.rotation().coeffs() == expected.rotation().coeffs());
  }
  CHECK_THROWS_AS(pose_at_budget(longer, 0, true), Error);
}

TEST_CASE("dataset and results round trip through disk") {
  ExperimentConfig cfg = small_config();
  const std::vector<SceneSample> samples = generate_dataset(cfg);
  REQUIRE(samples.size() == 3);
  const fs::path dir = fresh_dir("graspref_test_experiment");
  write_dataset(samples, cfg, dir / "data");
  const std::vector<SceneSample> loaded = load_dataset(dir / "data");
  REQUIRE(loaded.size() == samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(loaded[i].id == samples[i].id);
    CHECK(loaded[i].gt_pose.translation() == samples[i].gt_pose.translation());
  }

  const Method gt = parse_method("gt");
  write_results(loaded, run_batch(loaded, gt, cfg), gt, cfg, dir / "gt");
  const Method initial = parse_method("initial");
  write_results(loaded, run_batch(loaded, initial, cfg), initial, cfg, dir / "initial");
  const ResultSet gt_set = load_results(dir / "gt");
  CHECK(gt_set.method == "gt");
  CHECK(gt_set.poses.size() == 3);
  CHECK(gt_set.poses.at(samples[1].id).translation() == samples[1].gt_pose.translation());

  ResultSet partial = load_results(dir / "initial");
  partial.poses.erase(samples[2].id);
  const EvalTables t = evaluate_results(loaded, {gt_set, partial}, cfg);
  REQUIRE(t.summary.size() == 2);
  CHECK(t.summary[0].first == "gt");
  CHECK(t.summary[0].second.pe == 0.0);
  CHECK(t.summary[0].second.oe == 0.0);
  CHECK(t.summary[0].second.delta_ca == 0.0);
  CHECK(t.summary[0].second.delta_iv == 0.0);
  CHECK(t.summary[1].second.pe > 0.0);
  CHECK(t.rows.size() == 5);
  CHECK(t.missing == std::vector<std::string>{"initial:" + samples[2].id});

  const std::string csv = summary_csv(t.summary);
  CHECK(csv.rfind("method,PE,OE,CA,IV,dCA,dIV\ngt,", 0) == 0);
  CHECK(rows_csv(t.rows).rfind("sample,method,PE,OE,CA,IV,dCA,dIV\n", 0) == 0);
  CHECK(summary_json(t.summary)["rows"].size() == 2);
  CHECK(summary_table(t.summary).find("initial") != std::string::npos);

  // Refinement results carry one trace per sample.
  ExperimentConfig quick = cfg;
  quick.refine.max_iterations = 5;
  const Method ours = parse_method("ours");
  write_results(loaded, run_batch(loaded, ours, quick), ours, quick, dir / "ours");
  for (const SceneSample& s : loaded) CHECK(fs::exists(dir / "ours" / "traces" / (s.id + ".csv")));
  CHECK(load_results(dir / "ours").poses.size() == 3);

  CHECK_THROWS_AS(load_results(dir / "absent"), Error);
  CHECK_THROWS_AS(load_dataset(dir / "absent"), Error);
  fs::remove_all(dir);
}

TEST_CASE("sweep rows follow the requested budgets") {
  ExperimentConfig cfg = small_config();
  cfg.gen.samples = 2;
  cfg.sweep_iterations = {5, 10};
  const std::vector<SceneSample> samples = generate_dataset(cfg);
  const SuiteEvaluator metrics(samples, cfg.metrics, 1);
  const std::vector<SweepRow> rows = run_sweep(samples, parse_method("ours"), cfg, metrics);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].iterations == 5);
  CHECK(rows[1].iterations == 10);
  CHECK(sweep_csv(rows).rfind("iterations,PE,OE,CA,IV,dCA,dIV\n5,", 0) == 0);
  CHECK_THROWS_AS(run_sweep(samples, parse_method("icp"), cfg, metrics), UsageError);
  cfg.sweep_iterations = {};
  CHECK_THROWS_AS(run_sweep(samples, parse_method("ours"), cfg, metrics), UsageError);
}

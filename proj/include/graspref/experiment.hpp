#pragma once

#include "graspref/baselines.hpp"
#include "graspref/datagen.hpp"
#include "graspref/metrics.hpp"
#include "graspref/optimizer.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace graspref {

inline constexpr std::string_view kConfigFormat = "graspref-config/1";
inline constexpr std::string_view kDatasetFormat = "graspref-dataset/1";
inline constexpr std::string_view kResultsFormat = "graspref-results/1";

// Invalid command-line or config usage, as opposed to bad data.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  int workers = 1;
  std::string method = "ours";
  bool allow_partial = false;
  GenConfig gen;
  RefinementConfig refine;
  IcpConfig icp;
  MetricsConfig metrics;
  std::vector<int> sweep_iterations{100, 200, 400, 600, 1000};

  // Copies the top-level seed into the generator, optimizer and ICP.
  void propagate_seed();
};

nlohmann::json config_to_json(const ExperimentConfig& cfg);
// Keys absent from `j` keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

enum class MethodKind { ours, icp, icp_cp, ground_truth, initial };

struct Method {
  MethodKind kind = MethodKind::ours;
  std::array<bool, kSourceCount> sources{true, true, true, true};
  std::string name;
};

// ours | ours-ablate:<source>[+<source>...] | icp | icp-cp | gt | initial
Method parse_method(std::string_view text);
std::string valid_methods();

struct MethodOutput {
  Pose pose;
  std::optional<RefinementResult> refinement;
};

MethodOutput run_method(const SceneSample& sample, const Method& method, const ExperimentConfig& cfg);

// Calls fn(i) for i in [0, n) on up to `workers` threads. The first
// exception thrown is rethrown after all workers stop.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

std::vector<MethodOutput> run_batch(const std::vector<SceneSample>& samples, const Method& method,
                                    const ExperimentConfig& cfg);

// Pose the optimizer would report with budget n, read off a longer run.
Pose pose_at_budget(const RefinementResult& run, int n, bool checkpointing);

/// Shared-seed metrics over a fixed suite; ground-truth CA/IV per sample are
/// computed once and reused for every method.
class SuiteEvaluator {
 public:
  SuiteEvaluator(const std::vector<SceneSample>& samples, const MetricsConfig& cfg, int workers);

  MetricsReport evaluate(std::size_t i, const Pose& pose) const;
  std::vector<MetricsReport> evaluate(const std::vector<Pose>& poses) const;
  const GraspGeometry& ground_truth(std::size_t i) const { return gt_[i]; }

 private:
  const std::vector<SceneSample>& samples_;
  std::vector<std::shared_ptr<const MetricsEvaluator>> evaluators_;
  std::vector<GraspGeometry> gt_;
  int workers_;
};

MetricsReport mean_report(const std::vector<MetricsReport>& reports);

// --- on-disk layout -------------------------------------------------------

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view text);

std::vector<SceneSample> generate_dataset(const ExperimentConfig& cfg);

// <dir>/manifest.json plus <dir>/scenes/<id>.json and shared meshes.
void write_dataset(const std::vector<SceneSample>& samples, const ExperimentConfig& cfg,
                   const std::filesystem::path& dir);
std::vector<SceneSample> load_dataset(const std::filesystem::path& dir);

// <dir>/manifest.json, <dir>/poses/<id>.json, <dir>/traces/<id>.csv
void write_results(const std::vector<SceneSample>& samples, const std::vector<MethodOutput>& outputs,
                   const Method& method, const ExperimentConfig& cfg, const std::filesystem::path& dir);

struct ResultSet {
  std::string method;
  std::map<std::string, Pose> poses;  // by sample id
};
ResultSet load_results(const std::filesystem::path& dir);

struct EvalRow {
  std::string sample;
  std::string method;
  MetricsReport report;
};

struct EvalTables {
  std::vector<EvalRow> rows;
  std::vector<std::pair<std::string, MetricsReport>> summary;  // method, means
  std::vector<std::string> missing;                            // "method:sample"
};

EvalTables evaluate_results(const std::vector<SceneSample>& samples, const std::vector<ResultSet>& results,
                            const ExperimentConfig& cfg);
std::string rows_csv(const std::vector<EvalRow>& rows);
std::string summary_csv(const std::vector<std::pair<std::string, MetricsReport>>& summary);
nlohmann::json summary_json(const std::vector<std::pair<std::string, MetricsReport>>& summary);
std::string summary_table(const std::vector<std::pair<std::string, MetricsReport>>& summary);

struct SweepRow {
  int iterations = 0;
  MetricsReport mean;
};
// One run at the largest budget; smaller budgets are read off its trace.
std::vector<SweepRow> run_sweep(const std::vector<SceneSample>& samples, const Method& method,
                                const ExperimentConfig& cfg, const SuiteEvaluator& metrics);
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace graspref

// graspref: generate datasets, refine poses, evaluate and sweep.

#include "graspref/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace fs = std::filesystem;
using namespace graspref;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<int> samples;
  std::optional<double> noise_t;
  std::optional<double> noise_r;
  std::optional<int> iters;
  std::optional<double> lambda;
  std::optional<double> gamma;
  bool no_checkpoint = false;
  bool no_regularize = false;
  bool allow_partial = false;
  std::string method;
  std::vector<int> iters_list;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON config (" + std::string(kConfigFormat) + ")");
  cmd->add_option("--seed", o.seed, "Seed for generation, physics sampling and ICP");
  cmd->add_option("--workers", o.workers, "Parallel workers across samples");
}

void add_refine_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--method", o.method, valid_methods());
  cmd->add_option("--iters", o.iters, "Iteration budget N");
  cmd->add_option("--lambda", o.lambda, "Translation regularizer weight");
  cmd->add_option("--gamma", o.gamma, "Tactile force threshold");
  cmd->add_flag("--no-checkpoint", o.no_checkpoint, "Report the last pose instead of the checkpoint");
  cmd->add_flag("--no-regularize", o.no_regularize, "Drop the translation regularizer");
}

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.workers) cfg.workers = *o.workers;
  if (o.samples) cfg.gen.samples = *o.samples;
  if (o.noise_t) cfg.gen.noise.sigma_t = *o.noise_t;
  if (o.noise_r) cfg.gen.noise.sigma_r_deg = *o.noise_r;
  if (o.iters) cfg.refine.max_iterations = *o.iters;
  if (o.lambda) cfg.refine.physics.lambda = *o.lambda;
  if (o.gamma) cfg.refine.gamma = *o.gamma;
  if (o.no_checkpoint) cfg.refine.checkpointing = false;
  if (o.no_regularize) cfg.refine.physics.regularize = false;
  if (o.allow_partial) cfg.allow_partial = true;
  if (!o.method.empty()) cfg.method = o.method;
  if (!o.iters_list.empty()) cfg.sweep_iterations = o.iters_list;
  if (cfg.workers < 1) throw UsageError("--workers must be >= 1");
  cfg.propagate_seed();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-modal 6D pose refinement with physical plausibility"};
  app.require_subcommand(1);
  Overrides o;
  std::string out_dir;
  std::string dataset;
  std::string positional_method;
  std::vector<std::string> result_dirs;

  CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic grasp dataset");
  gen->add_option("out", out_dir, "Output directory")->required();
  add_common(gen, o);
  gen->add_option("--samples", o.samples, "Number of scenes");
  gen->add_option("--noise-t", o.noise_t, "Initial-pose translation noise sigma (m)");
  gen->add_option("--noise-r", o.noise_r, "Initial-pose rotation noise sigma (deg)");

  CLI::App* ref = app.add_subcommand("refine", "Refine every scene of a dataset with one method");
  ref->add_option("dataset", dataset, "Dataset directory")->required();
  ref->add_option("METHOD", positional_method, valid_methods());
  ref->add_option("--out", out_dir, "Results directory")->required();
  add_common(ref, o);
  add_refine_flags(ref, o);

  CLI::App* ev = app.add_subcommand("eval", "Evaluate result directories against a dataset");
  ev->add_option("dataset", dataset, "Dataset directory")->required();
  ev->add_option("results", result_dirs, "Results directories")->required();
  ev->add_option("--out", out_dir, "Directory for rows.csv, summary.csv, summary.json");
  add_common(ev, o);
  ev->add_flag("--allow-partial", o.allow_partial, "Evaluate despite missing sample results");

  CLI::App* sw = app.add_subcommand("sweep", "Metrics at several iteration budgets from one long run");
  sw->add_option("dataset", dataset, "Dataset directory")->required();
  sw->add_option("--out", out_dir, "Directory for sweep.csv");
  sw->add_option("--iters-list", o.iters_list, "Budgets, e.g. 100,200,400,600,1000")->delimiter(',');
  add_common(sw, o);
  add_refine_flags(sw, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (!positional_method.empty()) {
      if (!o.method.empty() && o.method != positional_method) throw UsageError("conflicting method arguments");
      o.method = positional_method;
    }
    const ExperimentConfig cfg = resolve(o);

    if (gen->parsed()) {
      const std::vector<SceneSample> samples = generate_dataset(cfg);
      write_dataset(samples, cfg, out_dir);
      std::cout << "wrote " << samples.size() << " scenes to " << out_dir << "\n";
    } else if (ref->parsed()) {
      const Method method = parse_method(cfg.method);
      const std::vector<SceneSample> samples = load_dataset(dataset);
      const std::vector<MethodOutput> outputs = run_batch(samples, method, cfg);
      write_results(samples, outputs, method, cfg, out_dir);
      std::cout << "refined " << samples.size() << " scenes with " << method.name << " into " << out_dir << "\n";
    } else if (ev->parsed()) {
      const std::vector<SceneSample> samples = load_dataset(dataset);
      std::vector<ResultSet> results;
      for (const std::string& d : result_dirs) results.push_back(load_results(d));
      const EvalTables tables = evaluate_results(samples, results, cfg);
      if (!tables.missing.empty()) {
        std::cerr << "missing results:";
        for (const std::string& m : tables.missing) std::cerr << ' ' << m;
        std::cerr << "\n";
        if (!cfg.allow_partial) return 2;
      }
      if (!out_dir.empty()) {
        write_file(fs::path(out_dir) / "rows.csv", rows_csv(tables.rows));
        write_file(fs::path(out_dir) / "summary.csv", summary_csv(tables.summary));
        write_file(fs::path(out_dir) / "summary.json", summary_json(tables.summary).dump(1) + "\n");
      }
      std::cout << summary_table(tables.summary);
    } else if (sw->parsed()) {
      const Method method = parse_method(cfg.method);
      const std::vector<SceneSample> samples = load_dataset(dataset);
      const SuiteEvaluator metrics(samples, cfg.metrics, cfg.workers);
      const std::vector<SweepRow> rows = run_sweep(samples, method, cfg, metrics);
      const std::string csv = sweep_csv(rows);
      if (!out_dir.empty()) write_file(fs::path(out_dir) / "sweep.csv", csv);
      std::cout << csv;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

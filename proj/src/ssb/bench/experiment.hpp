#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ssb/costmodel.hpp"
#include "ssb/detect.hpp"
#include "ssb/nn/train.hpp"
#include "ssb/sigsim.hpp"

namespace ssb::bench {

struct ExperimentEntry {
  std::string name;
  costmodel::Arch arch;
  nn::TrainConfig train;
  // train on the first train_subset examples of the training split
  // (0 = the whole split)
  std::uint64_t train_subset = 0;
};

struct ExperimentConfig {
  std::optional<std::string> dataset_path;        // load ...
  std::optional<sigsim::DatasetSpec> dataset_spec;  // ... or generate
  std::vector<ExperimentEntry> entries;
  int repeats = 1;
  std::uint64_t master_seed = 0;

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::string& path);
  void validate() const;
};

struct RunResult {
  std::string entry;
  int seed_index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  detect::Metrics metrics;
  int best_epoch = -1;
  int epochs_run = 0;
};

struct EntrySummary {
  std::string name;
  std::string family;
  std::uint64_t train_subset = 0;
  costmodel::CostReport cost;
  std::vector<RunResult> runs;
  // aggregates over completed runs only
  int completed = 0;
  double median_p_d = 0.0;
  double max_p_d = 0.0;
  double median_p_fd = 0.0;
  double min_p_fd = 0.0;
  bool failed = false;  // every run failed
};

struct ExperimentReport {
  sigsim::DatasetSpec dataset;
  detect::Metrics baseline;  // energy detector at the same target P_fa
  double target_pfa = 0.01;
  std::vector<EntrySummary> entries;

  nlohmann::json to_json() const;
  static ExperimentReport from_json(const nlohmann::json& j);
};

// Derivation used for per-run training seeds; exposed for the resumability
// contract (a manifest entry stays valid across processes).
std::uint64_t run_seed(std::uint64_t master_seed, const std::string& entry,
                       int seed_index);

nlohmann::json metrics_to_json(const detect::Metrics& m);
detect::Metrics metrics_from_json(const nlohmann::json& j);

// Executes the full protocol: obtain the dataset, train `repeats` seeds per
// entry, calibrate thresholds on validation, evaluate on test, aggregate,
// and attach the energy-detector baseline. Completed runs found in
// out_dir/manifest.json are not re-run. Writes report.json, runs.csv,
// summary.csv, and per-run checkpoints/history under out_dir.
ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                const std::string& out_dir, int workers);

}  // namespace ssb::bench

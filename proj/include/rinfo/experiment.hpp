#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rinfo/analysis.hpp"
#include "rinfo/benchmarks.hpp"
#include "rinfo/infomax.hpp"

namespace rinfo {

enum class Task { memory, bool2, bool3 };

std::string_view task_name(Task t);
Task parse_task(std::string_view name);

struct ExperimentConfig {
  int n_neurons = 100;
  double sigma2_init = 0.01;
  RIConfig ri;
  std::vector<int> k_sweep{1};
  int n_trials = 10;
  int eval_every = 100;
  int checkpoint_every = 100;
  BenchmarkPhases phases;
  int tau_max = 50;
  std::vector<Task> tasks{Task::memory, Task::bool2, Task::bool3};
  /// Samples for the neuron-input MI, taken after a washout of phases.washout.
  std::int64_t mi_steps = 50'000;
  int top_k = 50;
  std::filesystem::path out_dir = "runs/default";
  std::uint64_t master_seed = 1;
  /// Parallel (trial, K) jobs; 0 picks the hardware concurrency.
  int threads = 0;
  /// Stop, checkpointed, on reaching this block; -1 runs to completion.
  int stop_at_block = -1;
  /// Benchmarks at eval blocks. Off only for trajectory-isolation checks.
  bool evaluate = true;

  void validate() const;

  /// Full settings: N = 100, 100,000-step blocks, 1500 blocks, tau up to 50, K = 1..35.
  static ExperimentConfig paper_profile();
  /// Desk-scale settings: N = 30, 20,000-step blocks, tau up to 20, 5 trials.
  static ExperimentConfig reduced_profile();
};

/// Every settable key, e.g. "n_neurons", "ri.eta", "phases.washout".
const std::vector<std::string>& config_keys();

/// Sets one field from its text form; throws ConfigError on unknown keys or bad values.
void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// Reads an INI-style file ([ri] and [phases] sections, top-level keys for the rest).
void load_config_file(ExperimentConfig& cfg, const std::filesystem::path& path);

/// INI text that load_config_file reads back to the same configuration.
std::string format_config(const ExperimentConfig& cfg);

struct BlockRecord {
  int block = 0;
  MiReport mi;
  bool skipped = false;
  double mean_abs_internal_top50 = 0.0;
  double mean_abs_input = 0.0;
};

struct EvaluationRecord {
  int block = 0;
  std::map<std::string, double> totals;  // "MC", "BC2", "BC3"
  std::filesystem::path checkpoint;
};

struct JobTrace {
  int trial = 0;
  int input_multiplicity = 1;
  std::filesystem::path dir;
  std::vector<BlockRecord> blocks;
  std::vector<EvaluationRecord> evaluations;
  int skipped_updates = 0;
  int last_checkpoint = -1;
  bool completed = false;
};

struct RunTrace {
  std::vector<JobTrace> jobs;
};

/// Directory of one (trial, K) job inside out_dir.
std::filesystem::path job_dir(const std::filesystem::path& out_dir, int trial, int k);

/// Runs every trial x K job, resuming each from its latest checkpoint.
RunTrace run_experiment(const ExperimentConfig& cfg);

/// Parses a job directory written by run_experiment.
JobTrace load_job_trace(const std::filesystem::path& dir);

struct EvaluationResult {
  int block = 0;
  std::optional<TaskScore> memory;
  std::optional<BooleanCapacityResult> bool2;
  std::optional<BooleanCapacityResult> bool3;
  std::vector<double> neuron_input_mi;
  WeightSummary weights;
  std::vector<ConnectionRecord> top;
};

struct EvaluationSettings {
  std::vector<Task> tasks{Task::memory, Task::bool2, Task::bool3};
  BenchmarkPhases phases;
  int tau_max = 50;
  std::int64_t mi_steps = 50'000;
  int top_k = 50;
};

/// Benchmarks and diagnostics on a frozen copy of `params`.
EvaluationResult evaluate_params(const NetworkParams& params, const EvaluationSettings& settings,
                                 std::uint64_t seed, int block = 0);

/// Writes benchmark.csv / analysis.csv rows, the summary JSON and the
/// top-connection edge list for one evaluation into `dir`.
void export_evaluation(const std::filesystem::path& dir, const EvaluationResult& result,
                       int input_multiplicity);

/// Loads a snapshot and evaluates it, exporting into out_dir when given.
EvaluationResult evaluate_checkpoint(const std::filesystem::path& snapshot,
                                     const EvaluationSettings& settings, std::uint64_t seed,
                                     const std::optional<std::filesystem::path>& out_dir = {});

/// Aggregates every job under run_dir into run_dir/report/*.csv and returns
/// the file paths written.
std::vector<std::filesystem::path> sweep_report(const std::filesystem::path& run_dir);

/// Mean and sample standard deviation (0 for a single value).
struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
  int n = 0;
};
MeanSd mean_sd(const std::vector<double>& values);

}  // namespace rinfo

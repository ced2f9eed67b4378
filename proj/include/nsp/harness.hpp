#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nsp/dataset.hpp"
#include "nsp/network.hpp"
#include "nsp/trainer.hpp"

namespace nsp {

/// Process exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitVerifyFailed = 1,
  kExitConfig = 2,
  kExitFormat = 3,
  kExitSizeCap = 4,
};

/// A file could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Dataset files
//
//   #nspdata problem=parity N=4 d=2 c=2 seed=7 count=2 replacement=1
//   1,0,1,0\t0
//   0,0,1,0\t1

void write_dataset(std::ostream& out, const Dataset& data);
/// Throws FormatError on a malformed header or sample line.
Dataset read_dataset(std::istream& in);
void save_dataset(const std::string& path, const Dataset& data);
Dataset load_dataset(const std::string& path);

// ---------------------------------------------------------------------------
// Model files

inline constexpr const char* kModelFormat = "nsp-model";
inline constexpr int kModelVersion = 1;
inline constexpr const char* kIndexConvention = "mixed-radix-first-most-significant";

struct ModelInfo {
  Problem problem = Problem::custom;
  std::uint64_t seed = 0;
  std::string config_hash;
};

struct Model {
  Network network;
  ModelInfo info;
};

/// Throws ConfigError for networks without a standard builder.
nlohmann::json model_to_json(const Network& net, const ModelInfo& info);
/// Rebuilds the topology from the stored build parameters and installs the
/// stored tables. Throws FormatError on any inconsistency.
Model model_from_json(const nlohmann::json& doc);
void save_model(const std::string& path, const Network& net, const ModelInfo& info);
Model load_model(const std::string& path);

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
  Problem problem = Problem::parity;
  std::uint32_t sites = 16;
  /// n_samp for parity and div7.
  std::size_t n_samp = 1300;
  /// Per-class count for height.
  std::size_t n_per_class = 4000;
  NetworkKind network = NetworkKind::mps;
  Dim chi_max = 10;
  bool share_layers = false;
  double alpha = 1.0;
  std::uint32_t n_sweeps = 100;
  std::optional<Schedule> schedule;
  SweepOrder order = SweepOrder::bottom_up;
  std::uint32_t convergence_window = 5;
  bool early_stop = true;
  TestMode test = TestMode::automatic;
  std::uint32_t n_trials = 1;
  std::uint64_t seed = 0;
  std::string output_dir = ".";
  std::uint32_t jobs = 1;

  /// Output directory from NSPNET_OUTPUT_DIR when set, otherwise ".".
  static std::string default_output_dir();

  /// Throws ConfigError naming the offending field.
  void validate() const;
  ProblemSpec problem_spec() const;
  SweepConfig sweep_config() const;
  std::size_t count() const { return problem == Problem::height ? n_per_class : n_samp; }

  /// Keys match the field names; `schedule` is {"frozen": a, "active": b}.
  nlohmann::json to_json() const;
  /// Overwrites the fields present in `doc`. Unknown keys are config errors.
  void merge_json(const nlohmann::json& doc);

  /// FNV-1a of the canonical JSON of every field that affects results.
  std::string hash() const;
};

RunConfig load_run_config(const std::string& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

// ---------------------------------------------------------------------------
// Commands. Each writes human-readable output to `out` and returns an exit
// code; exceptions escape and are mapped by exit_code_for.

struct GenDataOptions {
  std::string path;
  /// Writes the independent test stream instead of the training stream.
  bool test_set = false;
};

struct TrainOptions {
  /// Training set shared by every trial instead of per-trial generated data.
  std::optional<std::string> dataset;
};

struct EvalOptions {
  std::string model;
  std::optional<std::string> dataset;
  bool exhaustive = false;
  /// Ground truth for exhaustive evaluation when the model does not record it.
  std::optional<Problem> problem;
};

struct VerifyOptions {
  std::uint32_t instances = 200;
  std::uint64_t seed = 1;
  std::uint32_t max_sites = 8;
  Dim max_dim = 4;
  std::size_t max_samples = 64;
};

int cmd_gen_data(const RunConfig& cfg, const GenDataOptions& opts, std::ostream& out);
/// Writes metrics.csv, summary.csv and model.json (the trial with the lowest
/// test error) into cfg.output_dir.
int cmd_train(const RunConfig& cfg, const TrainOptions& opts, std::ostream& out);
int cmd_eval(const EvalOptions& opts, std::ostream& out);
int cmd_verify(const VerifyOptions& opts, std::ostream& out);
/// Reads metrics.csv (and summary.csv when present) from a directory or a
/// metrics file path.
int cmd_summarize(const std::string& path, std::ostream& out);

/// Maps an exception from a command to its exit code and prints the message.
int exit_code_for(const std::exception& e, std::ostream& err);

// ---------------------------------------------------------------------------
// Metrics

inline constexpr const char* kMetricsHeader = "trial,sweep,phase,n_correct,train_error";
inline constexpr const char* kSummaryHeader =
    "trial,phase,train_error,test_error,perfect,sweeps_run,sweeps_to_convergence,converged";

std::string metrics_row(std::uint32_t trial, const SweepRecord& r);
std::string summary_row(std::uint32_t trial, const PhaseResult& p);

struct MetricsRow {
  std::uint32_t trial = 0;
  std::uint32_t sweep = 0;
  std::string phase;
  std::size_t n_correct = 0;
  double train_error = 0.0;
};

/// Throws FormatError on a malformed file.
std::vector<MetricsRow> read_metrics(std::istream& in);

// ---------------------------------------------------------------------------
// Verification suite

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Worked examples of the update algebra and the oracle equivalence checks.
std::vector<CheckResult> run_verification(const VerifyOptions& opts);

}  // namespace nsp

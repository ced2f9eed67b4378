#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nsp/contraction.hpp"
#include "nsp/dataset.hpp"
#include "nsp/network.hpp"
#include "nsp/random.hpp"
#include "nsp/update.hpp"

namespace nsp {

enum class SweepOrder {
  /// Bottom layer first, left to right within a layer.
  bottom_up,
  top_down,
};

std::string to_string(SweepOrder order);
SweepOrder sweep_order_from_string(const std::string& name);

/// Sweeps with disentanglers frozen followed by sweeps with them active.
struct Schedule {
  std::uint32_t frozen_sweeps = 0;
  std::uint32_t active_sweeps = 0;
};

struct SweepConfig {
  double alpha = 0.0;
  /// Sweep cap when no schedule is given.
  std::uint32_t n_sweeps = 100;
  SweepOrder order = SweepOrder::bottom_up;
  std::optional<Schedule> schedule;
  std::uint64_t seed = 0;
  /// A phase has converged once n_correct is unchanged for this many sweeps.
  std::uint32_t convergence_window = 5;
  /// Stop a phase once it has converged. With alpha > 0 a plateau is not a
  /// fixed point, so only a perfectly fitted training set stops early.
  bool early_stop = true;
  /// All-zero environment rows under stochastic updates (alpha > 0).
  ZeroRowPolicy zero_rows = ZeroRowPolicy::resample;
  EnvironmentMethod method = EnvironmentMethod::reachable;
  /// Checks the trace identity before every unshared update.
  bool check_trace = false;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// The nodes updated together in one step: a share group or a single node.
struct UpdateUnit {
  std::vector<NodeId> members;
  bool disentangler = false;
};

/// Units in visiting order; each group is visited at its first member.
std::vector<UpdateUnit> update_units(const Network& net, SweepOrder order);

struct UpdateStats {
  std::size_t updates = 0;
  /// Updates that installed a different table.
  std::size_t changed = 0;
  /// Greedy shared-group updates undone because they lowered n_correct.
  std::size_t rollbacks = 0;
  /// Greedy updates that lowered n_correct and were kept.
  std::size_t monotonicity_violations = 0;
  std::size_t trace_mismatches = 0;
};

/// Single-tensor and shared-group updates of one network against one
/// training set. The network must outlive the trainer and must not be
/// modified behind its back.
class Trainer {
 public:
  Trainer(Network& net, std::span<const LabeledSample> train, const SweepConfig& cfg, Rng rng);

  std::size_t n_correct() const { return engine_.n_correct(); }
  std::size_t sample_count() const { return engine_.sample_count(); }
  const UpdateStats& stats() const noexcept { return stats_; }
  const std::vector<UpdateUnit>& units() const noexcept { return units_; }

  /// Summed environment of the unit's members.
  Environment environment(const UpdateUnit& unit);

  /// Updates one unit and returns n_correct afterwards. With alpha = 0 a
  /// shared-group update that would lower n_correct is rolled back.
  std::size_t update(const UpdateUnit& unit);

  /// One pass over every unit; disentanglers are skipped while frozen.
  std::size_t sweep(bool disentanglers_frozen = false);

  /// Called after every update with (unit, n_correct before, n_correct after).
  std::function<void(const UpdateUnit&, std::size_t, std::size_t)> on_update;

 private:
  Network* net_;
  SweepConfig cfg_;
  Rng rng_;
  EnvironmentEngine engine_;
  std::vector<UpdateUnit> units_;
  UpdateStats stats_;
};

/// Replacement tensor for a share group: one update from the summed
/// environments of its members, installed in every member.
UnitalTensor update_shared_group(Network& net, std::span<const LabeledSample> train, GroupId group,
                                 double alpha, Rng& rng);

/// Runs the configured sweeps and returns n_correct after each one.
std::vector<std::size_t> sweep(Network& net, std::span<const LabeledSample> train, const SweepConfig& cfg);

/// Index of the first sweep after which n_correct stays unchanged for
/// `window` more sweeps; `values[0]` is the state before the first sweep.
std::optional<std::uint32_t> convergence_sweep(std::span<const std::size_t> values, std::uint32_t window);

enum class TestMode {
  /// Exhaustive when the input space fits the cap, otherwise sampled.
  automatic,
  exhaustive,
  sampled,
};

/// Dataset generator plus network builder for one trial.
struct ProblemSpec {
  Problem problem = Problem::parity;
  std::uint32_t sites = 0;
  /// n_samp for parity and div7, n_per_class for height.
  std::size_t count = 0;
  NetworkKind network = NetworkKind::mps;
  Dim chi_max = 0;
  bool share_layers = false;
  TestMode test = TestMode::automatic;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  Network build() const;
};

struct SweepRecord {
  std::uint32_t sweep = 0;
  std::string phase;
  std::size_t n_correct = 0;
  double train_error = 0.0;

  friend bool operator==(const SweepRecord&, const SweepRecord&) = default;
};

struct PhaseResult {
  std::string phase;
  double train_error = 0.0;
  double test_error = 0.0;
  bool perfect = false;
  std::uint32_t sweeps_run = 0;
  std::uint32_t sweeps_to_convergence = 0;
  bool converged = false;

  friend bool operator==(const PhaseResult&, const PhaseResult&) = default;
};

struct TrialResult {
  std::uint32_t trial = 0;
  std::uint64_t trial_seed = 0;
  /// Sweep 0 is the initial network.
  std::vector<SweepRecord> trace;
  std::vector<PhaseResult> phases;
  /// Figures of the final phase.
  double train_error = 0.0;
  double test_error = 0.0;
  bool perfect = false;
  std::uint32_t sweeps_to_convergence = 0;
  bool exhaustive_test = false;
  UpdateStats stats;
  Network network;
};

/// Training and test data of one trial.
struct TrialData {
  std::uint64_t trial_seed = 0;
  Dataset train;
  /// Empty when the test error is computed over every input string.
  Dataset test;
  bool exhaustive_test = false;
};

/// Generates the data of trial `trial` of a run seeded by `seed`. Throws
/// SizeCapError when an exhaustive test is requested beyond the cap.
TrialData trial_data(const ProblemSpec& spec, std::uint64_t seed, std::uint32_t trial);

using UpdateHook = std::function<void(const UpdateUnit&, std::size_t, std::size_t)>;

/// Builds a randomly initialized network from `data.trial_seed` and runs the
/// sweeps on `data.train`. `on_update` is installed as Trainer::on_update.
TrialResult run_trial(const ProblemSpec& spec, const SweepConfig& cfg, std::uint32_t trial, const TrialData& data,
                      const std::function<void(const SweepRecord&)>& on_sweep = {}, const UpdateHook& on_update = {});

/// trial_data followed by run_trial. Trial `trial` derives all of its
/// streams from (cfg.seed, trial).
TrialResult train_trial(const ProblemSpec& spec, const SweepConfig& cfg, std::uint32_t trial = 0,
                        const std::function<void(const SweepRecord&)>& on_sweep = {});

}  // namespace nsp

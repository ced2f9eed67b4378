#include "nsp/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "nsp/errors.hpp"
#include "nsp/update.hpp"

namespace nsp {

std::string to_string(SweepOrder order) {
  return order == SweepOrder::bottom_up ? "bottom-up" : "top-down";
}

SweepOrder sweep_order_from_string(const std::string& name) {
  if (name == "bottom-up") return SweepOrder::bottom_up;
  if (name == "top-down") return SweepOrder::top_down;
  throw ConfigError("unknown sweep order '" + name + "'", "order");
}

void SweepConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be a finite value >= 0", "alpha");
  if (convergence_window == 0) throw ConfigError("convergence window must be positive", "convergence_window");
}

std::vector<UpdateUnit> update_units(const Network& net, SweepOrder order) {
  std::vector<NodeId> ids(net.node_count());
  for (NodeId i = 0; i < ids.size(); ++i) ids[i] = i;
  std::stable_sort(ids.begin(), ids.end(), [&](NodeId a, NodeId b) {
    const int la = net.node(a).layer;
    const int lb = net.node(b).layer;
    return order == SweepOrder::bottom_up ? la < lb : la > lb;
  });
  std::vector<UpdateUnit> units;
  std::vector<bool> group_seen(net.share_groups().size(), false);
  for (NodeId id : ids) {
    const auto& n = net.node(id);
    UpdateUnit unit;
    unit.disentangler = n.role == NodeRole::disentangler;
    if (n.share_group) {
      if (group_seen[*n.share_group]) continue;
      group_seen[*n.share_group] = true;
      unit.members = net.share_groups()[*n.share_group];
    } else {
      unit.members = {id};
    }
    units.push_back(std::move(unit));
  }
  return units;
}

Trainer::Trainer(Network& net, std::span<const LabeledSample> train, const SweepConfig& cfg, Rng rng)
    : net_(&net), cfg_(cfg), rng_(std::move(rng)), engine_(net, train), units_(update_units(net, cfg.order)) {
  cfg_.validate();
}

Environment Trainer::environment(const UpdateUnit& unit) {
  Environment env = engine_.environment(unit.members.front(), cfg_.method);
  for (std::size_t i = 1; i < unit.members.size(); ++i) env += engine_.environment(unit.members[i], cfg_.method);
  return env;
}

std::size_t Trainer::update(const UpdateUnit& unit) {
  const Environment env = environment(unit);
  const UnitalTensor current = net_->node(unit.members.front()).payload;
  const std::size_t before = engine_.n_correct();
  if (cfg_.check_trace && unit.members.size() == 1 && env.trace_with(current) != before) {
    ++stats_.trace_mismatches;
  }
  ++stats_.updates;
  UnitalTensor next = stochastic_update(env, cfg_.alpha, current, rng_, cfg_.zero_rows);
  std::size_t after = before;
  if (next != current) {
    for (NodeId m : unit.members) net_->set_payload(m, next);
    engine_.refresh();
    after = engine_.n_correct();
    if (cfg_.alpha == 0.0 && after < before) {
      if (unit.members.size() > 1) {
        for (NodeId m : unit.members) net_->set_payload(m, current);
        engine_.refresh();
        after = engine_.n_correct();
        ++stats_.rollbacks;
      } else {
        ++stats_.monotonicity_violations;
        ++stats_.changed;
      }
    } else {
      ++stats_.changed;
    }
  }
  if (on_update) on_update(unit, before, after);
  return after;
}

std::size_t Trainer::sweep(bool disentanglers_frozen) {
  for (const auto& unit : units_) {
    if (disentanglers_frozen && unit.disentangler) continue;
    update(unit);
  }
  return engine_.n_correct();
}

UnitalTensor update_shared_group(Network& net, std::span<const LabeledSample> train, GroupId group,
                                 double alpha, Rng& rng) {
  if (group >= net.share_groups().size()) throw DomainError("share group id out of range");
  const auto& members = net.share_groups()[group];
  if (members.empty()) throw DomainError("share group is empty");
  for (NodeId m : members) {
    const auto& p = net.node(m).payload;
    const auto& first = net.node(members.front()).payload;
    if (p.in_dims() != first.in_dims() || p.out_dims() != first.out_dims()) {
      throw ConfigError("share group members have different dims", "share_layers");
    }
  }
  EnvironmentEngine engine(net, train);
  Environment env = engine.environment(members.front());
  for (std::size_t i = 1; i < members.size(); ++i) env += engine.environment(members[i]);
  UnitalTensor next = stochastic_update(env, alpha, net.node(members.front()).payload, rng);
  for (NodeId m : members) net.set_payload(m, next);
  return next;
}

std::optional<std::uint32_t> convergence_sweep(std::span<const std::size_t> values, std::uint32_t window) {
  std::size_t run = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    run = values[i] == values[i - 1] ? run + 1 : 0;
    if (run == window) return static_cast<std::uint32_t>(i - window);
  }
  return std::nullopt;
}

namespace {

struct Phase {
  std::string name;
  std::uint32_t sweeps = 0;
  bool frozen = false;
};

std::vector<Phase> phases_for(const ProblemSpec& spec, const SweepConfig& cfg) {
  const std::string name = to_string(spec.network);
  if (cfg.schedule) {
    if (spec.network != NetworkKind::mera) {
      throw ConfigError("a frozen/active schedule needs a MERA network", "schedule");
    }
    return {{"ttn", cfg.schedule->frozen_sweeps, true}, {"mera", cfg.schedule->active_sweeps, false}};
  }
  return {{name, cfg.n_sweeps, spec.network == NetworkKind::ttn}};
}

}  // namespace

std::vector<std::size_t> sweep(Network& net, std::span<const LabeledSample> train, const SweepConfig& cfg) {
  Trainer trainer(net, train, cfg, make_rng(cfg.seed, Stream::updates));
  const bool ttn = net.kind() == NetworkKind::ttn;
  std::vector<std::size_t> values;
  if (cfg.schedule) {
    for (std::uint32_t s = 0; s < cfg.schedule->frozen_sweeps; ++s) values.push_back(trainer.sweep(true));
    for (std::uint32_t s = 0; s < cfg.schedule->active_sweeps; ++s) values.push_back(trainer.sweep(false));
  } else {
    for (std::uint32_t s = 0; s < cfg.n_sweeps; ++s) values.push_back(trainer.sweep(ttn));
  }
  return values;
}

void ProblemSpec::validate() const {
  if (problem == Problem::custom) throw ConfigError("trials need a benchmark problem", "problem");
  if (count == 0) throw ConfigError("training set size must be positive", problem == Problem::height ? "n_per_class" : "n_samp");
  if (chi_max == 0) throw ConfigError("chi_max must be positive", "chi_max");
  if (network == NetworkKind::custom) throw ConfigError("trials need a standard network", "network");
}

Network ProblemSpec::build() const {
  const Dim d = site_dim_of(problem);
  const Dim c = label_count_of(problem);
  switch (network) {
    case NetworkKind::mps: return build_mps(sites, d, c, chi_max);
    case NetworkKind::ttn: return build_binary_mera(sites, d, c, chi_max, false, share_layers);
    case NetworkKind::mera: return build_binary_mera(sites, d, c, chi_max, true, share_layers);
    case NetworkKind::custom: break;
  }
  throw ConfigError("trials need a standard network", "network");
}

TrialData trial_data(const ProblemSpec& spec, std::uint64_t seed, std::uint32_t trial) {
  spec.validate();
  TrialData data;
  data.trial_seed = derive_seed(seed, trial);
  data.train = generate(spec.problem, spec.sites, spec.count, data.trial_seed);

  std::uint64_t space = 1;
  const Dim d = site_dim_of(spec.problem);
  for (std::uint32_t i = 0; i < spec.sites && space <= kExhaustiveCap; ++i) space *= d;
  const bool fits = space <= kExhaustiveCap;
  if (spec.test == TestMode::exhaustive && !fits) {
    throw SizeCapError("exhaustive evaluation exceeds the cap; use a sampled test set");
  }
  // Height error rates are reported on sampled test sets even when N is small.
  data.exhaustive_test = spec.test == TestMode::exhaustive ||
                         (spec.test == TestMode::automatic && fits && spec.problem != Problem::height);
  if (!data.exhaustive_test) data.test = gen_test_set(spec.problem, spec.sites, spec.count, data.trial_seed);
  return data;
}

TrialResult train_trial(const ProblemSpec& spec, const SweepConfig& cfg, std::uint32_t trial,
                        const std::function<void(const SweepRecord&)>& on_sweep) {
  return run_trial(spec, cfg, trial, trial_data(spec, cfg.seed, trial), on_sweep);
}

TrialResult run_trial(const ProblemSpec& spec, const SweepConfig& cfg, std::uint32_t trial, const TrialData& data,
                      const std::function<void(const SweepRecord&)>& on_sweep, const UpdateHook& on_update) {
  spec.validate();
  cfg.validate();
  const auto phases = phases_for(spec, cfg);
  if (data.train.empty()) throw ConfigError("training set is empty", "data");
  if (!data.exhaustive_test && data.test.empty()) throw ConfigError("test set is empty", "data");

  TrialResult result;
  result.trial = trial;
  result.trial_seed = data.trial_seed;
  const auto& train = data.train;
  const auto& test = data.test;
  const bool exhaustive = data.exhaustive_test;
  result.exhaustive_test = exhaustive;

  result.network = spec.build();
  Network& net = result.network;
  auto init_rng = make_rng(result.trial_seed, Stream::initialization);
  net.randomize(init_rng, !cfg.schedule);

  Trainer trainer(net, train.samples, cfg, make_rng(result.trial_seed, Stream::updates));
  trainer.on_update = on_update;
  const double n = static_cast<double>(train.size());
  const auto record = [&](std::uint32_t sweep_index, const std::string& phase, std::size_t correct) {
    SweepRecord r{sweep_index, phase, correct, 1.0 - static_cast<double>(correct) / n};
    result.trace.push_back(r);
    if (on_sweep) on_sweep(r);
  };
  const auto test_error = [&]() {
    if (exhaustive) return 1.0 - exhaustive_accuracy(net, spec.problem, spec.sites);
    return 1.0 - static_cast<double>(n_correct(net, test.samples)) / static_cast<double>(test.size());
  };

  std::uint32_t sweep_index = 0;
  record(sweep_index, phases.front().name, trainer.n_correct());
  for (const auto& phase : phases) {
    std::vector<std::size_t> values{trainer.n_correct()};
    PhaseResult pr;
    pr.phase = phase.name;
    for (std::uint32_t s = 0; s < phase.sweeps; ++s) {
      values.push_back(trainer.sweep(phase.frozen));
      record(++sweep_index, phase.name, values.back());
      ++pr.sweeps_run;
      const bool settled = cfg.alpha == 0.0 || values.back() == trainer.sample_count();
      if (cfg.early_stop && settled && convergence_sweep(values, cfg.convergence_window)) break;
    }
    const auto converged_at = convergence_sweep(values, cfg.convergence_window);
    pr.converged = converged_at.has_value();
    pr.sweeps_to_convergence = converged_at.value_or(pr.sweeps_run);
    pr.train_error = 1.0 - static_cast<double>(trainer.n_correct()) / n;
    pr.test_error = test_error();
    pr.perfect = pr.test_error == 0.0;
    result.phases.push_back(pr);
  }
  const auto& last = result.phases.back();
  result.train_error = last.train_error;
  result.test_error = last.test_error;
  result.perfect = last.perfect;
  result.sweeps_to_convergence = last.sweeps_to_convergence;
  result.stats = trainer.stats();
  return result;
}

}  // namespace nsp

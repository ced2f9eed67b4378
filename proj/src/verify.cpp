#include <algorithm>
#include <cmath>
#include <functional>

#include "nsp/contraction.hpp"
#include "nsp/errors.hpp"
#include "nsp/harness.hpp"
#include "nsp/oracle.hpp"
#include "nsp/update.hpp"

namespace nsp {

namespace {

// Four-sample-group environment of a 2-in/2-out node with binary legs, the
// worked example of the update algebra.
Environment worked_environment() {
  const std::uint64_t counts[4][4] = {{10, 12, 9, 8}, {5, 6, 9, 2}, {21, 18, 7, 22}, {12, 15, 13, 14}};
  Environment env(4, 4);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) env(r, c) = counts[r][c];
  return env;
}

CheckResult check_optimal_example() {
  const auto env = worked_environment();
  const auto t = optimal_update(env, UnitalTensor::constant({2, 2}, {2, 2}));
  const bool ok = t.table() == std::vector<std::uint32_t>{1, 2, 3, 1} && env.trace_with(t) == 58;
  return {"worked example: optimal update selects columns 1,2,3,1 with value 58", ok,
          "value " + std::to_string(env.trace_with(t))};
}

CheckResult check_difference_example() {
  const double expected[4][4] = {{-2, 0, -3, -4}, {-4, -3, 0, -7}, {-1, -4, -15, 0}, {-3, 0, -2, -1}};
  const auto omega = difference_matrix(worked_environment()).values;
  bool ok = omega.rows() == 4 && omega.cols() == 4;
  for (std::size_t r = 0; ok && r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) ok = ok && omega(r, c) == expected[r][c];
  return {"worked example: difference matrix exact", ok, ""};
}

CheckResult check_transition_example() {
  const double expected[4][4] = {{0.21, 0.58, 0.13, 0.08},
                                 {0.10, 0.16, 0.72, 0.02},
                                 {0.35, 0.08, 0.00, 0.57},
                                 {0.10, 0.45, 0.17, 0.28}};
  const auto p = transition_matrix(difference_matrix(worked_environment()), 2.0).probabilities;
  // The published row {0.10, 0.45, 0.17, 0.28} sums to one; the exact middle
  // entry is 0.4551, so agreement means a difference below 0.01.
  double worst = 0.0;
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) worst = std::max(worst, std::abs(p(r, c) - expected[r][c]));
  return {"worked example: transition matrix at alpha=2 to 2 decimals", worst < 0.01,
          "max deviation " + std::to_string(worst)};
}

enum class Outcome { pass, fail, skip };

// Runs `check` on random instances until `instances` of them were not
// skipped; a failing or throwing check fails the instance.
CheckResult over_instances(const std::string& name, const VerifyOptions& opts, std::uint64_t stream,
                           const std::function<Outcome(const oracle::Instance&, Rng&)>& check) {
  oracle::InstanceCaps caps{opts.max_sites, opts.max_dim, opts.max_samples};
  std::uint32_t passed = 0;
  std::uint32_t checked = 0;
  std::string first_failure;
  for (std::uint64_t i = 0; checked < opts.instances && i < 20ull * opts.instances; ++i) {
    auto rng = make_rng(opts.seed, Stream::verification, stream * 1000003 + i);
    const auto inst = oracle::random_instance(rng, caps);
    Outcome outcome = Outcome::fail;
    try {
      outcome = check(inst, rng);
    } catch (const std::exception& e) {
      if (first_failure.empty()) first_failure = e.what();
    }
    if (outcome == Outcome::skip) continue;
    ++checked;
    if (outcome == Outcome::pass) ++passed;
    else if (first_failure.empty()) first_failure = "instance " + std::to_string(i);
  }
  std::string detail = std::to_string(passed) + "/" + std::to_string(opts.instances) + " instances";
  if (passed != opts.instances && !first_failure.empty()) detail += "; first failure: " + first_failure;
  return {name, passed == opts.instances, detail};
}

Outcome outcome(bool ok) { return ok ? Outcome::pass : Outcome::fail; }

NodeId random_node(const Network& net, Rng& rng) {
  return static_cast<NodeId>(uniform_below(rng, net.node_count()));
}

std::uint64_t table_candidates(const UnitalTensor& t) {
  std::uint64_t n = 1;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    n *= t.cols();
    if (n > oracle::kTableSearchCap) return n;
  }
  return n;
}

}  // namespace

std::vector<CheckResult> run_verification(const VerifyOptions& opts) {
  std::vector<CheckResult> out;
  out.push_back(check_optimal_example());
  out.push_back(check_difference_example());
  out.push_back(check_transition_example());

  out.push_back(over_instances("forward_evaluate == dense contraction", opts, 1, [](const auto& inst, Rng&) {
    for (const auto& s : inst.samples) {
      const auto dense = oracle::dense_edge_values(inst.net, s.state);
      if (forward_evaluate(inst.net, s.state) != dense[inst.net.output_edge()]) return Outcome::fail;
    }
    return Outcome::pass;
  }));

  out.push_back(over_instances("config_space(region) == brute_config_space", opts, 2, [](const auto& inst, Rng& rng) {
    const auto& s = inst.samples[uniform_below(rng, inst.samples.size())];
    const auto n = inst.net.input_sites().size();
    SiteRegion region;
    for (std::uint32_t i = 0; i < n; ++i) {
      if (uniform_below(rng, 3) == 0) region.sites.push_back(i);
    }
    if (region.sites.empty()) region.sites.push_back(static_cast<std::uint32_t>(uniform_below(rng, n)));
    return outcome(config_space(inst.net, s.state, s.label, region) ==
                   oracle::brute_config_space(inst.net, s.state, s.label, region));
  }));

  out.push_back(over_instances("config_space(node) == brute_config_space", opts, 3, [](const auto& inst, Rng& rng) {
    const auto& s = inst.samples[uniform_below(rng, inst.samples.size())];
    const NodeId u = random_node(inst.net, rng);
    return outcome(config_space(inst.net, s.state, s.label, u) ==
                   oracle::brute_config_space(inst.net, s.state, s.label, u));
  }));

  out.push_back(over_instances("accumulate_environment == oracle environment", opts, 4, [](const auto& inst, Rng&) {
    for (NodeId u = 0; u < inst.net.node_count(); ++u) {
      const auto expected = oracle::oracle_environment(inst.net, inst.samples, u);
      if (accumulate_environment(inst.net, inst.samples, u, EnvironmentMethod::reachable) != expected) {
        return Outcome::fail;
      }
      if (accumulate_environment(inst.net, inst.samples, u, EnvironmentMethod::full_lowering) != expected) {
        return Outcome::fail;
      }
    }
    return Outcome::pass;
  }));

  out.push_back(over_instances("trace identity n_correct == sum_r env[r][table[r]]", opts, 5,
                               [](const auto& inst, Rng&) {
                                 const auto correct = n_correct(inst.net, inst.samples);
                                 for (NodeId u = 0; u < inst.net.node_count(); ++u) {
                                   const auto env = accumulate_environment(inst.net, inst.samples, u);
                                   if (env.trace_with(inst.net.node(u).payload) != correct) return Outcome::fail;
                                 }
                                 return Outcome::pass;
                               }));

  out.push_back(over_instances("optimal_update value == brute_optimal_tensor maximum", opts, 6,
                               [](const auto& inst, Rng&) {
                                 // The node with the smallest table search space.
                                 NodeId best = 0;
                                 for (NodeId u = 1; u < inst.net.node_count(); ++u) {
                                   if (table_candidates(inst.net.node(u).payload) <
                                       table_candidates(inst.net.node(best).payload)) {
                                     best = u;
                                   }
                                 }
                                 const auto& current = inst.net.node(best).payload;
                                 if (table_candidates(current) > oracle::kTableSearchCap) return Outcome::skip;
                                 const auto env = accumulate_environment(inst.net, inst.samples, best);
                                 const auto updated = optimal_update(env, current);
                                 Network net = inst.net;
                                 net.set_payload(best, updated);
                                 const auto brute = oracle::brute_optimal_tensor(inst.net, inst.samples, best);
                                 return outcome(n_correct(net, inst.samples) == brute.n_correct &&
                                                env.trace_with(updated) == brute.n_correct);
                               }));
  return out;
}

}  // namespace nsp

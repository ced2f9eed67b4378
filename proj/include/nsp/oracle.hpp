#pragma once

// Brute-force reference implementations. Exponential in the instance size
// and guarded by hard caps; used for differential tests and verification.

#include <cstdint>
#include <span>
#include <vector>

#include "nsp/contraction.hpp"
#include "nsp/dataset.hpp"
#include "nsp/network.hpp"
#include "nsp/random.hpp"

namespace nsp::oracle {

inline constexpr std::uint64_t kDenseCap = std::uint64_t{1} << 20;
inline constexpr std::uint64_t kRegionCap = std::uint64_t{1} << 16;
inline constexpr std::uint64_t kTableSearchCap = std::uint64_t{1} << 16;

/// Label of every input composite, in composite order.
struct DenseClassifier {
  std::vector<Dim> bases;
  std::vector<Digit> labels;

  Digit operator()(Composite x) const { return labels.at(x); }
  std::size_t size() const noexcept { return labels.size(); }
};

/// Output state of one tensor computed as the unit row vector of the input
/// times the dense input-output matrix.
NumberState dense_apply(const UnitalTensor& t, const NumberState& in_state);

/// Every edge value of the network for one input, node by node through
/// dense_apply.
std::vector<Digit> dense_edge_values(const Network& net, const NumberState& sample);

/// Throws SizeCapError when the input space exceeds kDenseCap.
DenseClassifier dense_forward(const Network& net);

/// Region states σ with forward_evaluate(sample with σ on the region) == label.
/// Edges are the region's site edges sorted by id. Throws SizeCapError
/// beyond kRegionCap states.
ConfigurationSpace brute_config_space(const Network& net, const NumberState& sample, Digit label,
                                      const SiteRegion& region);

/// Output states of `target` that, forced onto its out edges, make the
/// network output `label`. Edges are the target's out edges sorted by id.
ConfigurationSpace brute_config_space(const Network& net, const NumberState& sample, Digit label, NodeId target);

/// Environment built by forcing every candidate output column of `u` for
/// every sample and re-evaluating the network.
Environment oracle_environment(const Network& net, std::span<const LabeledSample> samples, NodeId u);

struct TableSearchResult {
  UnitalTensor table;
  std::size_t n_correct = 0;
};

/// Best payload for node `u` with every other node fixed, by enumerating all
/// unital tables in lexicographic order; the first maximizer is returned.
/// Throws SizeCapError beyond kTableSearchCap candidates.
TableSearchResult brute_optimal_tensor(const Network& net, std::span<const LabeledSample> samples, NodeId u);

/// Size limits of random test instances.
struct InstanceCaps {
  std::uint32_t max_sites = 8;
  Dim max_dim = 4;
  std::size_t max_samples = 64;
};

struct Instance {
  Network net;
  std::vector<LabeledSample> samples;
};

/// Random network with random payloads and a random labelled dataset.
/// Alternates between MPS, TTN, MERA and free-form layered networks.
Instance random_instance(Rng& rng, const InstanceCaps& caps = {});

}  // namespace nsp::oracle

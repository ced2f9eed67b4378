#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "nsp/causal_cone.hpp"
#include "nsp/dataset.hpp"
#include "nsp/network.hpp"

namespace nsp {

/// Digits fixed on edges outside a cone.
using BoundaryDigits = std::map<EdgeId, Digit>;

/// Indicator of accepted composite states over an ordered list of edges.
///
/// Stored as a sorted list of composites while sparse and as a bit vector
/// once more than half of the space is accepted. Equality compares the
/// accepted sets, not the representation.
class ConfigurationSpace {
 public:
  ConfigurationSpace() = default;
  /// Empty set over `edges` with the given dims.
  ConfigurationSpace(std::vector<EdgeId> edges, std::vector<Dim> dims);

  static ConfigurationSpace full(std::vector<EdgeId> edges, std::vector<Dim> dims);
  /// `accepted` need not be sorted; duplicates are ignored.
  static ConfigurationSpace of(std::vector<EdgeId> edges, std::vector<Dim> dims, std::vector<Composite> accepted);
  static ConfigurationSpace from_flags(std::vector<EdgeId> edges, std::vector<Dim> dims,
                                       const std::vector<std::uint8_t>& flags);

  const std::vector<EdgeId>& edges() const noexcept { return edges_; }
  const std::vector<Dim>& dims() const noexcept { return dims_; }
  Composite space_size() const noexcept { return space_; }
  std::size_t count() const noexcept { return count_; }
  bool is_dense() const noexcept { return dense_; }
  bool contains(Composite x) const;
  std::vector<Composite> accepted() const;

  friend bool operator==(const ConfigurationSpace& a, const ConfigurationSpace& b);

 private:
  void choose_representation(std::vector<Composite> sorted);

  std::vector<EdgeId> edges_;
  std::vector<Dim> dims_;
  Composite space_ = 1;
  std::size_t count_ = 0;
  bool dense_ = false;
  std::vector<Composite> sparse_;
  std::vector<std::uint64_t> bits_;
};

/// Applies every non-cone node to the sample and returns the digits on the
/// cone's boundary edges. Digits the sample holds on open region sites are
/// never read.
BoundaryDigits lift_boundary(const Network& net, const CausalCone& cone, const NumberState& sample);

/// Exact preimage of `upper` through one cone layer. The lower space's
/// edges are the upper edges not produced by `layer_nodes` plus the open
/// inputs of `layer_nodes`, sorted by id. A lower state is accepted iff the
/// layer nodes, applied to it together with the boundary digits, produce an
/// accepted upper state. Throws InternalError if the layer's outputs do not
/// match the upper edges or an input is neither open nor fixed.
ConfigurationSpace lower_config_space(const Network& net, const ConfigurationSpace& upper,
                                      std::span<const NodeId> layer_nodes, const BoundaryDigits& boundary);

/// Region states that, together with the sample's digits elsewhere, are
/// classified as `label`. Lowered layer by layer from the output.
ConfigurationSpace config_space(const Network& net, const NumberState& sample, Digit label,
                                const SiteRegion& region);
/// Output states of `target` that lead to classification as `label`, with
/// everything outside the target's cone fixed by the sample.
ConfigurationSpace config_space(const Network& net, const NumberState& sample, Digit label, NodeId target);

/// Nonnegative integer count matrix over (input composite, output composite)
/// of one tensor.
class Environment {
 public:
  Environment() = default;
  Environment(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), counts_(rows * cols, 0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::uint64_t operator()(std::size_t r, std::size_t c) const { return counts_[r * cols_ + c]; }
  std::uint64_t& operator()(std::size_t r, std::size_t c) { return counts_[r * cols_ + c]; }
  std::span<const std::uint64_t> row(std::size_t r) const {
    return std::span<const std::uint64_t>(counts_).subspan(r * cols_, cols_);
  }
  bool row_is_zero(std::size_t r) const;

  /// Σ_r counts[r][t[r]]: the number of correct samples when the tensor is `t`.
  std::uint64_t trace_with(const UnitalTensor& t) const;

  Environment& operator+=(const Environment& other);
  friend bool operator==(const Environment&, const Environment&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint64_t> counts_;
};

enum class EnvironmentMethod {
  /// Lowering restricted to the states reachable from the target's outputs.
  reachable,
  /// Full configuration-space lowering through every cone layer.
  full_lowering,
};

/// Number of samples the network labels correctly.
std::size_t n_correct(const Network& net, std::span<const LabeledSample> samples);

/// Environment of node `u` over the samples.
Environment accumulate_environment(const Network& net, std::span<const LabeledSample> samples, NodeId u,
                                   EnvironmentMethod method = EnvironmentMethod::reachable);

/// Reusable environment evaluation for a fixed topology and dataset.
///
/// Holds the per-sample edge values of the bound network; call refresh()
/// after payloads change. Cone plans are built on first use and cached.
class EnvironmentEngine {
 public:
  EnvironmentEngine(const Network& net, std::span<const LabeledSample> samples);
  ~EnvironmentEngine();
  EnvironmentEngine(EnvironmentEngine&&) noexcept;
  EnvironmentEngine& operator=(EnvironmentEngine&&) noexcept;

  /// Re-evaluates every sample. Must be called after payload changes.
  void refresh();

  std::size_t sample_count() const noexcept { return labels_.size(); }
  std::size_t n_correct() const;
  Environment environment(NodeId u, EnvironmentMethod method = EnvironmentMethod::reachable);

 private:
  struct Plan;
  const Plan& plan_for(NodeId u);
  Environment reachable_environment(NodeId u);
  Environment full_environment(NodeId u);

  const Network* net_;
  std::vector<Digit> site_digits_;  // samples x sites
  std::vector<Digit> labels_;
  std::vector<Digit> edge_values_;  // samples x edges
  std::vector<std::unique_ptr<Plan>> plans_;
  std::vector<std::uint32_t> stamp_;
  std::vector<std::uint32_t> stamp_index_;
  std::uint32_t generation_ = 0;
};

}  // namespace nsp

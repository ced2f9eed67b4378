#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nsp/number_state.hpp"
#include "nsp/random.hpp"
#include "nsp/tensor.hpp"

namespace nsp {

using EdgeId = std::uint32_t;
using NodeId = std::uint32_t;
using GroupId = std::uint32_t;

inline constexpr NodeId kNoNode = 0xffffffffu;

enum class NetworkKind { mps, ttn, mera, custom };
enum class NodeRole { generic, chain, disentangler, isometry, top };

std::string to_string(NetworkKind kind);
NetworkKind network_kind_from_string(const std::string& name);
std::string to_string(NodeRole role);

/// An oriented edge. Network inputs have no producer; the network output has
/// no consumer.
struct Edge {
  Dim dim = 0;
  NodeId producer = kNoNode;
  std::uint32_t producer_slot = 0;
  NodeId consumer = kNoNode;
  std::uint32_t consumer_slot = 0;

  bool is_input() const noexcept { return producer == kNoNode; }
};

struct TensorNode {
  NodeId id = 0;
  std::vector<EdgeId> in_edges;
  std::vector<EdgeId> out_edges;
  /// Depth used for sweep order and cone cross-sections. Edges may connect
  /// nodes within one layer (a MERA level holds its u and w nodes).
  int layer = 0;
  std::optional<GroupId> share_group;
  NodeRole role = NodeRole::generic;
  UnitalTensor payload;
};

/// Parameters a standard builder was called with; enough to rebuild the topology.
struct BuildParams {
  NetworkKind kind = NetworkKind::custom;
  std::uint32_t sites = 0;
  Dim site_dim = 0;
  Dim labels = 0;
  Dim chi_max = 0;
  bool disentanglers_enabled = true;
  bool share_layers = false;

  friend bool operator==(const BuildParams&, const BuildParams&) = default;
};

/// A layered DAG of unital tensors mapping N input sites to one label edge.
/// Nodes are stored in topological order (node id == position).
class Network {
 public:
  const BuildParams& params() const noexcept { return params_; }
  NetworkKind kind() const noexcept { return params_.kind; }

  std::span<const TensorNode> nodes() const noexcept { return nodes_; }
  const TensorNode& node(NodeId id) const { return nodes_.at(id); }
  std::size_t node_count() const noexcept { return nodes_.size(); }

  std::span<const Edge> edges() const noexcept { return edges_; }
  const Edge& edge(EdgeId id) const { return edges_.at(id); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  /// Site i is carried by edge input_sites()[i].
  const std::vector<EdgeId>& input_sites() const noexcept { return input_sites_; }
  const std::vector<Dim>& site_bases() const noexcept { return site_bases_; }
  EdgeId output_edge() const noexcept { return output_edge_; }
  Dim label_count() const { return edges_[output_edge_].dim; }
  int max_layer() const noexcept { return max_layer_; }
  Dim max_internal_dim() const;

  /// Share groups; members carry identical payloads after every update.
  const std::vector<std::vector<NodeId>>& share_groups() const noexcept { return groups_; }

  /// Throws DomainError if the tensor dims do not match the node's edges.
  void set_payload(NodeId id, UnitalTensor payload);

  /// Fills random payloads. Disentanglers keep identity payloads when
  /// `randomize_disentanglers` is false. Share groups get one draw each.
  void randomize(Rng& rng, bool randomize_disentanglers = true);

  /// Evaluates every edge for one input. `edge_values` must have
  /// edge_count() entries; site digits are not validated.
  void evaluate_edges(std::span<const Digit> site_digits, std::span<Digit> edge_values) const;

  /// Applies one node in place on a full edge-value buffer.
  void apply_node(NodeId id, std::span<Digit> edge_values) const;

  /// Input composite of a node read from a full edge-value buffer.
  Composite node_input(NodeId id, std::span<const Digit> edge_values) const;

  /// Digits of output composite `column` of node `id`, one per out edge.
  std::span<const Digit> node_output_digits(NodeId id, std::uint32_t column) const;

  const std::vector<Composite>& node_in_strides(NodeId id) const { return in_strides_.at(id); }

 private:
  friend class NetworkBuilder;
  void compile();

  BuildParams params_;
  std::vector<TensorNode> nodes_;
  std::vector<Edge> edges_;
  std::vector<EdgeId> input_sites_;
  std::vector<Dim> site_bases_;
  EdgeId output_edge_ = 0;
  int max_layer_ = 0;
  std::vector<std::vector<NodeId>> groups_;
  std::vector<std::vector<Composite>> in_strides_;
  std::vector<std::vector<Digit>> out_decode_;
};

/// Incremental construction of arbitrary oriented networks. Builders for the
/// standard geometries are layered on top of it.
class NetworkBuilder {
 public:
  EdgeId add_site(Dim dim);

  /// Adds a node consuming `in_edges` and returns its new out edges. The
  /// payload starts as the identity when in and out dims agree, otherwise as
  /// the constant map to output 0.
  std::vector<EdgeId> add_node(std::vector<EdgeId> in_edges, std::vector<Dim> out_dims, int layer,
                               NodeRole role = NodeRole::generic,
                               std::optional<GroupId> share_group = std::nullopt);

  NodeId last_node() const;

  /// Throws ConfigError unless every edge but `output` has exactly one
  /// consumer and every share group has uniform dims.
  Network finish(EdgeId output, BuildParams params);

 private:
  Network net_;
};

/// Chain of N-1 nodes read left to right; the final bond carries the label.
Network build_mps(std::uint32_t sites, Dim site_dim, Dim labels, Dim chi_max);

/// Binary MERA (or TTN when disentanglers are disabled) on N = 3 * 2^k sites
/// with open boundaries, topped by a 3-in/1-out node.
Network build_binary_mera(std::uint32_t sites, Dim site_dim, Dim labels, Dim chi_max,
                          bool disentanglers_enabled, bool share_layers = false);

/// Rebuilds the topology recorded in `params`.
Network build_network(const BuildParams& params);

/// Label digit for one sample. Throws DomainError on a base mismatch.
Digit forward_evaluate(const Network& net, const NumberState& sample);

}  // namespace nsp

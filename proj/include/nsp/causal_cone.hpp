#pragma once

#include <optional>
#include <vector>

#include "nsp/network.hpp"

namespace nsp {

/// A set of input sites (indices into Network::input_sites()).
struct SiteRegion {
  std::vector<std::uint32_t> sites;
};

/// A non-cone edge feeding a cone node. `producer` is kNoNode for input sites.
struct BoundaryEdge {
  EdgeId edge = 0;
  NodeId producer = kNoNode;
  std::uint32_t producer_slot = 0;

  friend bool operator==(const BoundaryEdge&, const BoundaryEdge&) = default;
};

/// The tensors whose outputs can depend on a region's inputs (or on a
/// node's outputs), with the cross-sections of open edges between layers.
struct CausalCone {
  /// Edges whose values are left open: the region's site edges, or the
  /// target node's out edges.
  std::vector<EdgeId> source_edges;
  std::optional<NodeId> target_node;
  /// Topological order. Includes the target node for node cones.
  std::vector<NodeId> cone_nodes;
  /// Open edges crossing each layer boundary, ordered from the network output
  /// downward and ending with `source_edges`. Edges inside a cross-section are
  /// sorted by id.
  std::vector<std::vector<EdgeId>> cross_sections;
  /// For cross_sections[i] -> cross_sections[i + 1]: the cone nodes that are
  /// undone by lowering between them, in topological order.
  std::vector<std::vector<NodeId>> lowering_steps;
  std::vector<BoundaryEdge> boundary_edges;

  std::size_t causal_width() const;
  bool contains(NodeId id) const;
};

/// Throws DomainError for an empty or out-of-range region.
CausalCone causal_cone(const Network& net, const SiteRegion& region);
/// Cone of everything downstream of `target`; `target` itself is included.
CausalCone causal_cone(const Network& net, NodeId target);

}  // namespace nsp

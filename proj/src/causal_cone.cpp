#include "nsp/causal_cone.hpp"

#include <algorithm>

#include "nsp/errors.hpp"

namespace nsp {

std::size_t CausalCone::causal_width() const {
  std::size_t width = 0;
  for (const auto& x : cross_sections) width = std::max(width, x.size());
  return width;
}

bool CausalCone::contains(NodeId id) const {
  return std::binary_search(cone_nodes.begin(), cone_nodes.end(), id);
}

namespace {

CausalCone build_cone(const Network& net, std::vector<EdgeId> sources, std::optional<NodeId> target) {
  CausalCone cone;
  std::sort(sources.begin(), sources.end());
  cone.source_edges = sources;
  cone.target_node = target;

  std::vector<bool> open(net.edge_count(), false);
  for (EdgeId e : sources) open[e] = true;
  for (const auto& n : net.nodes()) {
    bool in_cone = target && n.id == *target;
    if (!in_cone) {
      for (EdgeId e : n.in_edges) in_cone = in_cone || open[e];
    }
    if (!in_cone) continue;
    cone.cone_nodes.push_back(n.id);
    for (EdgeId e : n.out_edges) open[e] = true;
    for (EdgeId e : n.in_edges) {
      if (open[e]) continue;
      const auto& edge = net.edge(e);
      cone.boundary_edges.push_back({e, edge.producer, edge.producer_slot});
    }
  }

  const int top = net.max_layer() + 1;
  const auto producer_layer = [&](EdgeId e) {
    const auto& edge = net.edge(e);
    return edge.is_input() ? -1 : net.node(edge.producer).layer;
  };
  const auto consumer_layer = [&](EdgeId e) {
    const auto& edge = net.edge(e);
    return edge.consumer == kNoNode ? top : net.node(edge.consumer).layer;
  };
  const auto crossing = [&](int t) {
    std::vector<EdgeId> x;
    for (EdgeId e = 0; e < net.edge_count(); ++e) {
      if (open[e] && producer_layer(e) < t && t <= consumer_layer(e)) x.push_back(e);
    }
    return x;
  };
  const auto nodes_at = [&](int layer) {
    std::vector<NodeId> step;
    for (NodeId id : cone.cone_nodes) {
      if (net.node(id).layer == layer && !(target && id == *target)) step.push_back(id);
    }
    return step;
  };

  const int bottom = target ? net.node(*target).layer + 1 : 0;
  for (int t = top; t >= bottom; --t) {
    cone.cross_sections.push_back(crossing(t));
    if (t > bottom) cone.lowering_steps.push_back(nodes_at(t - 1));
  }
  if (target) {
    cone.lowering_steps.push_back(nodes_at(bottom - 1));
    cone.cross_sections.push_back(sources);
  }
  return cone;
}

}  // namespace

CausalCone causal_cone(const Network& net, const SiteRegion& region) {
  if (region.sites.empty()) throw DomainError("causal cone region is empty");
  std::vector<EdgeId> sources;
  for (auto s : region.sites) {
    if (s >= net.input_sites().size()) throw DomainError("region site " + std::to_string(s) + " out of range");
    sources.push_back(net.input_sites()[s]);
  }
  std::sort(sources.begin(), sources.end());
  if (std::adjacent_find(sources.begin(), sources.end()) != sources.end()) {
    throw DomainError("region lists a site twice");
  }
  return build_cone(net, std::move(sources), std::nullopt);
}

CausalCone causal_cone(const Network& net, NodeId target) {
  if (target >= net.node_count()) throw DomainError("node id " + std::to_string(target) + " out of range");
  return build_cone(net, net.node(target).out_edges, target);
}

}  // namespace nsp

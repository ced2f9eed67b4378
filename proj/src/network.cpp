#include "nsp/network.hpp"

#include <algorithm>
#include <limits>

#include "nsp/errors.hpp"

namespace nsp {

std::string to_string(NetworkKind kind) {
  switch (kind) {
    case NetworkKind::mps: return "mps";
    case NetworkKind::ttn: return "ttn";
    case NetworkKind::mera: return "mera";
    case NetworkKind::custom: return "custom";
  }
  return "custom";
}

NetworkKind network_kind_from_string(const std::string& name) {
  if (name == "mps") return NetworkKind::mps;
  if (name == "ttn") return NetworkKind::ttn;
  if (name == "mera") return NetworkKind::mera;
  if (name == "custom") return NetworkKind::custom;
  throw ConfigError("unknown network kind '" + name + "'", "network");
}

std::string to_string(NodeRole role) {
  switch (role) {
    case NodeRole::generic: return "generic";
    case NodeRole::chain: return "chain";
    case NodeRole::disentangler: return "disentangler";
    case NodeRole::isometry: return "isometry";
    case NodeRole::top: return "top";
  }
  return "generic";
}

Dim Network::max_internal_dim() const {
  Dim best = 0;
  for (EdgeId e = 0; e < edges_.size(); ++e) {
    if (edges_[e].is_input() || e == output_edge_) continue;
    best = std::max(best, edges_[e].dim);
  }
  return best;
}

void Network::set_payload(NodeId id, UnitalTensor payload) {
  auto& n = nodes_.at(id);
  if (payload.in_dims() != n.payload.in_dims() || payload.out_dims() != n.payload.out_dims()) {
    throw DomainError("payload dims do not match node " + std::to_string(id));
  }
  n.payload = std::move(payload);
}

void Network::randomize(Rng& rng, bool randomize_disentanglers) {
  std::vector<bool> group_done(groups_.size(), false);
  for (auto& n : nodes_) {
    if (n.role == NodeRole::disentangler && !randomize_disentanglers) continue;
    if (n.share_group) {
      if (group_done[*n.share_group]) continue;
      group_done[*n.share_group] = true;
      auto t = random_unital(n.payload.in_dims(), n.payload.out_dims(), rng);
      for (NodeId m : groups_[*n.share_group]) nodes_[m].payload = t;
    } else {
      n.payload = random_unital(n.payload.in_dims(), n.payload.out_dims(), rng);
    }
  }
}

Composite Network::node_input(NodeId id, std::span<const Digit> edge_values) const {
  const auto& n = nodes_[id];
  const auto& strides = in_strides_[id];
  Composite in = 0;
  for (std::size_t k = 0; k < n.in_edges.size(); ++k) in += edge_values[n.in_edges[k]] * strides[k];
  return in;
}

std::span<const Digit> Network::node_output_digits(NodeId id, std::uint32_t column) const {
  const auto width = nodes_[id].out_edges.size();
  return std::span<const Digit>(out_decode_[id]).subspan(column * width, width);
}

void Network::apply_node(NodeId id, std::span<Digit> edge_values) const {
  const auto& n = nodes_[id];
  const auto column = n.payload[node_input(id, edge_values)];
  if (n.out_edges.size() == 1) {
    edge_values[n.out_edges[0]] = column;
    return;
  }
  const auto digits = node_output_digits(id, column);
  for (std::size_t k = 0; k < n.out_edges.size(); ++k) edge_values[n.out_edges[k]] = digits[k];
}

void Network::evaluate_edges(std::span<const Digit> site_digits, std::span<Digit> edge_values) const {
  for (std::size_t i = 0; i < input_sites_.size(); ++i) edge_values[input_sites_[i]] = site_digits[i];
  for (NodeId id = 0; id < nodes_.size(); ++id) apply_node(id, edge_values);
}

void Network::compile() {
  in_strides_.clear();
  out_decode_.clear();
  for (const auto& n : nodes_) {
    in_strides_.push_back(strides_of(n.payload.in_dims()));
    const auto& out_dims = n.payload.out_dims();
    const auto cols = space_size(out_dims);
    std::vector<Digit> decode(cols * out_dims.size());
    for (Composite c = 0; c < cols; ++c) {
      decompose_into(c, out_dims, std::span<Digit>(decode).subspan(c * out_dims.size(), out_dims.size()));
    }
    out_decode_.push_back(std::move(decode));
  }
}

EdgeId NetworkBuilder::add_site(Dim dim) {
  if (dim == 0) throw ConfigError("site dimension must be positive", "d");
  Edge e;
  e.dim = dim;
  const auto id = static_cast<EdgeId>(net_.edges_.size());
  net_.edges_.push_back(e);
  net_.input_sites_.push_back(id);
  net_.site_bases_.push_back(dim);
  return id;
}

std::vector<EdgeId> NetworkBuilder::add_node(std::vector<EdgeId> in_edges, std::vector<Dim> out_dims,
                                             int layer, NodeRole role,
                                             std::optional<GroupId> share_group) {
  const auto id = static_cast<NodeId>(net_.nodes_.size());
  if (in_edges.empty() || out_dims.empty()) throw ConfigError("node needs inputs and outputs");
  std::vector<Dim> in_dims;
  for (std::size_t k = 0; k < in_edges.size(); ++k) {
    const EdgeId e = in_edges[k];
    if (e >= net_.edges_.size()) throw ConfigError("unknown input edge " + std::to_string(e));
    auto& edge = net_.edges_[e];
    if (edge.consumer != kNoNode) throw ConfigError("edge " + std::to_string(e) + " consumed twice");
    if (!edge.is_input() && net_.nodes_[edge.producer].layer > layer) {
      throw ConfigError("node layer below the layer of its producer");
    }
    edge.consumer = id;
    edge.consumer_slot = static_cast<std::uint32_t>(k);
    in_dims.push_back(edge.dim);
  }
  TensorNode node;
  node.id = id;
  node.in_edges = std::move(in_edges);
  node.layer = layer;
  node.role = role;
  node.share_group = share_group;
  node.payload = in_dims == out_dims ? UnitalTensor::identity(in_dims)
                                     : UnitalTensor::constant(in_dims, out_dims, 0);
  for (std::size_t k = 0; k < out_dims.size(); ++k) {
    Edge e;
    e.dim = out_dims[k];
    e.producer = id;
    e.producer_slot = static_cast<std::uint32_t>(k);
    node.out_edges.push_back(static_cast<EdgeId>(net_.edges_.size()));
    net_.edges_.push_back(e);
  }
  if (share_group) {
    auto& groups = net_.groups_;
    if (*share_group > groups.size()) throw ConfigError("share group ids must be dense");
    if (*share_group == groups.size()) groups.emplace_back();
    groups[*share_group].push_back(id);
  }
  auto outs = node.out_edges;
  net_.nodes_.push_back(std::move(node));
  return outs;
}

NodeId NetworkBuilder::last_node() const {
  if (net_.nodes_.empty()) throw ConfigError("no nodes");
  return static_cast<NodeId>(net_.nodes_.size() - 1);
}

Network NetworkBuilder::finish(EdgeId output, BuildParams params) {
  if (output >= net_.edges_.size()) throw ConfigError("unknown output edge");
  if (net_.edges_[output].is_input()) throw ConfigError("output edge must be produced by a node");
  for (EdgeId e = 0; e < net_.edges_.size(); ++e) {
    const bool consumed = net_.edges_[e].consumer != kNoNode;
    if (e == output && consumed) throw ConfigError("output edge must not be consumed");
    if (e != output && !consumed) throw ConfigError("edge " + std::to_string(e) + " is dangling");
  }
  for (const auto& members : net_.groups_) {
    const auto& first = net_.nodes_[members.front()].payload;
    for (NodeId m : members) {
      const auto& p = net_.nodes_[m].payload;
      if (p.in_dims() != first.in_dims() || p.out_dims() != first.out_dims()) {
        throw ConfigError("share group members have different dims");
      }
    }
  }
  net_.output_edge_ = output;
  net_.params_ = params;
  net_.max_layer_ = 0;
  for (const auto& n : net_.nodes_) net_.max_layer_ = std::max(net_.max_layer_, n.layer);
  net_.compile();
  return std::move(net_);
}

namespace {

Dim capped_power(Dim base, std::uint32_t exponent, Dim cap) {
  std::uint64_t v = 1;
  for (std::uint32_t i = 0; i < exponent; ++i) {
    v *= base;
    if (v >= cap) return cap;
  }
  return static_cast<Dim>(v);
}

}  // namespace

Network build_mps(std::uint32_t sites, Dim site_dim, Dim labels, Dim chi_max) {
  if (sites < 2) throw ConfigError("MPS needs at least 2 sites", "N");
  if (site_dim < 2) throw ConfigError("site dimension must be at least 2", "d");
  if (labels < 2) throw ConfigError("need at least 2 label categories", "c");
  if (chi_max < labels) throw ConfigError("chi_max must be at least the label count", "chi_max");

  NetworkBuilder b;
  std::vector<EdgeId> site(sites);
  for (auto& s : site) s = b.add_site(site_dim);

  EdgeId bond = site[0];
  for (std::uint32_t i = 0; i + 1 < sites; ++i) {
    const bool last = i + 2 == sites;
    const Dim out = last ? labels : capped_power(site_dim, i + 2, chi_max);
    bond = b.add_node({bond, site[i + 1]}, {out}, static_cast<int>(i), NodeRole::chain).front();
  }
  BuildParams p;
  p.kind = NetworkKind::mps;
  p.sites = sites;
  p.site_dim = site_dim;
  p.labels = labels;
  p.chi_max = chi_max;
  p.disentanglers_enabled = false;
  p.share_layers = false;
  return b.finish(bond, p);
}

Network build_binary_mera(std::uint32_t sites, Dim site_dim, Dim labels, Dim chi_max,
                          bool disentanglers_enabled, bool share_layers) {
  std::uint32_t k = sites / 3;
  if (sites < 6 || sites % 3 != 0 || (k & (k - 1)) != 0) {
    throw ConfigError("binary MERA needs N = 3 * 2^k sites with k >= 1", "N");
  }
  if (site_dim < 2) throw ConfigError("site dimension must be at least 2", "d");
  if (labels < 2) throw ConfigError("need at least 2 label categories", "c");
  if (chi_max < 2) throw ConfigError("chi_max must be at least 2", "chi_max");

  NetworkBuilder b;
  std::vector<EdgeId> current(sites);
  for (auto& s : current) s = b.add_site(site_dim);

  Dim dim = site_dim;
  int level = 0;
  GroupId next_group = 0;
  while (current.size() > 3) {
    const std::size_t width = current.size();
    std::optional<GroupId> u_group;
    std::optional<GroupId> w_group;
    if (share_layers) {
      u_group = next_group++;
      w_group = next_group++;
    }
    // Disentanglers straddle the boundaries between neighbouring w blocks.
    for (std::size_t j = 0; j + 2 < width; j += 2) {
      auto outs = b.add_node({current[j + 1], current[j + 2]}, {dim, dim}, level,
                             NodeRole::disentangler, u_group);
      current[j + 1] = outs[0];
      current[j + 2] = outs[1];
    }
    const Dim coarse = static_cast<Dim>(std::min<std::uint64_t>(std::uint64_t{dim} * dim, chi_max));
    std::vector<EdgeId> next;
    for (std::size_t j = 0; j < width; j += 2) {
      next.push_back(
          b.add_node({current[j], current[j + 1]}, {coarse}, level, NodeRole::isometry, w_group).front());
    }
    current = std::move(next);
    dim = coarse;
    ++level;
  }
  const EdgeId out = b.add_node({current[0], current[1], current[2]}, {labels}, level, NodeRole::top).front();

  BuildParams p;
  p.kind = disentanglers_enabled ? NetworkKind::mera : NetworkKind::ttn;
  p.sites = sites;
  p.site_dim = site_dim;
  p.labels = labels;
  p.chi_max = chi_max;
  p.disentanglers_enabled = disentanglers_enabled;
  p.share_layers = share_layers;
  return b.finish(out, p);
}

Network build_network(const BuildParams& params) {
  switch (params.kind) {
    case NetworkKind::mps:
      return build_mps(params.sites, params.site_dim, params.labels, params.chi_max);
    case NetworkKind::ttn:
    case NetworkKind::mera:
      return build_binary_mera(params.sites, params.site_dim, params.labels, params.chi_max,
                               params.kind == NetworkKind::mera, params.share_layers);
    case NetworkKind::custom: break;
  }
  throw ConfigError("custom networks cannot be rebuilt from parameters", "network");
}

Digit forward_evaluate(const Network& net, const NumberState& sample) {
  if (sample.bases() != net.site_bases()) throw DomainError("sample bases differ from the network's sites");
  std::vector<Digit> values(net.edge_count());
  net.evaluate_edges(sample.digits(), values);
  return values[net.output_edge()];
}

}  // namespace nsp

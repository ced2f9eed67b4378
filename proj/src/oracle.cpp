#include "nsp/oracle.hpp"

#include <algorithm>

#include "nsp/causal_cone.hpp"
#include "nsp/errors.hpp"

namespace nsp::oracle {

NumberState dense_apply(const UnitalTensor& t, const NumberState& in_state) {
  if (in_state.bases() != t.in_dims()) throw DomainError("state bases differ from the tensor's input dims");
  const DenseMatrix m = t.dense();
  DenseMatrix unit(1, m.rows());
  unit(0, composite_index(in_state)) = 1.0;
  const DenseMatrix out = unit * m;
  for (std::size_t c = 0; c < out.cols(); ++c) {
    if (out(0, c) == 1.0) return decompose(c, t.out_dims());
  }
  throw InternalError("unital tensor produced no output state");
}

std::vector<Digit> dense_edge_values(const Network& net, const NumberState& sample) {
  if (sample.bases() != net.site_bases()) throw DomainError("sample bases differ from the network's sites");
  std::vector<Digit> values(net.edge_count(), 0);
  for (std::size_t i = 0; i < net.input_sites().size(); ++i) values[net.input_sites()[i]] = sample[i];
  for (const auto& n : net.nodes()) {
    std::vector<Digit> in;
    for (EdgeId e : n.in_edges) in.push_back(values[e]);
    const auto out = dense_apply(n.payload, NumberState(in, n.payload.in_dims()));
    for (std::size_t k = 0; k < n.out_edges.size(); ++k) values[n.out_edges[k]] = out[k];
  }
  return values;
}

DenseClassifier dense_forward(const Network& net) {
  const auto& bases = net.site_bases();
  std::uint64_t space = 1;
  for (Dim b : bases) {
    space *= b;
    if (space > kDenseCap) throw SizeCapError("dense classifier exceeds 2^20 inputs");
  }
  DenseClassifier out;
  out.bases = bases;
  out.labels.resize(space);
  std::vector<Digit> digits(bases.size());
  for (Composite x = 0; x < space; ++x) {
    decompose_into(x, bases, digits);
    out.labels[x] = forward_evaluate(net, NumberState(digits, bases));
  }
  return out;
}

namespace {

std::vector<Dim> dims_of(const Network& net, std::span<const EdgeId> edges) {
  std::vector<Dim> dims;
  for (EdgeId e : edges) dims.push_back(net.edge(e).dim);
  return dims;
}

std::uint64_t checked_space(std::span<const Dim> dims, std::uint64_t cap, const char* what) {
  std::uint64_t space = 1;
  for (Dim d : dims) {
    space *= d;
    if (space > cap) throw SizeCapError(what);
  }
  return space;
}

// Evaluates the network with the out edges of `forced` overwritten by `digits`.
Digit evaluate_forced(const Network& net, std::span<const Digit> site_digits, NodeId forced,
                      std::span<const Digit> digits) {
  std::vector<Digit> values(net.edge_count(), 0);
  for (std::size_t i = 0; i < net.input_sites().size(); ++i) values[net.input_sites()[i]] = site_digits[i];
  for (const auto& n : net.nodes()) {
    if (n.id == forced) {
      for (std::size_t k = 0; k < n.out_edges.size(); ++k) values[n.out_edges[k]] = digits[k];
    } else {
      net.apply_node(n.id, values);
    }
  }
  return values[net.output_edge()];
}

}  // namespace

ConfigurationSpace brute_config_space(const Network& net, const NumberState& sample, Digit label,
                                      const SiteRegion& region) {
  if (sample.bases() != net.site_bases()) throw DomainError("sample bases differ from the network's sites");
  if (region.sites.empty()) throw DomainError("region is empty");
  std::vector<std::pair<EdgeId, std::uint32_t>> order;
  for (auto s : region.sites) {
    if (s >= net.input_sites().size()) throw DomainError("region site out of range");
    order.emplace_back(net.input_sites()[s], s);
  }
  std::sort(order.begin(), order.end());
  std::vector<EdgeId> edges;
  for (const auto& [e, s] : order) edges.push_back(e);
  const auto dims = dims_of(net, edges);
  const auto space = checked_space(dims, kRegionCap, "region exceeds 2^16 states");

  std::vector<Composite> accepted;
  std::vector<Digit> digits = sample.digits();
  std::vector<Digit> sigma(edges.size());
  for (Composite x = 0; x < space; ++x) {
    decompose_into(x, dims, sigma);
    for (std::size_t k = 0; k < order.size(); ++k) digits[order[k].second] = sigma[k];
    if (forward_evaluate(net, NumberState(digits, sample.bases())) == label) accepted.push_back(x);
  }
  return ConfigurationSpace::of(edges, dims, std::move(accepted));
}

ConfigurationSpace brute_config_space(const Network& net, const NumberState& sample, Digit label, NodeId target) {
  if (sample.bases() != net.site_bases()) throw DomainError("sample bases differ from the network's sites");
  if (target >= net.node_count()) throw DomainError("node id out of range");
  const auto& outs = net.node(target).out_edges;
  std::vector<std::size_t> slot(outs.size());
  for (std::size_t k = 0; k < slot.size(); ++k) slot[k] = k;
  std::sort(slot.begin(), slot.end(), [&](std::size_t a, std::size_t b) { return outs[a] < outs[b]; });
  std::vector<EdgeId> edges;
  for (auto k : slot) edges.push_back(outs[k]);
  const auto dims = dims_of(net, edges);
  const auto space = checked_space(dims, kRegionCap, "node output space exceeds 2^16 states");

  std::vector<Composite> accepted;
  std::vector<Digit> sigma(edges.size());
  std::vector<Digit> forced(edges.size());
  for (Composite x = 0; x < space; ++x) {
    decompose_into(x, dims, sigma);
    for (std::size_t k = 0; k < slot.size(); ++k) forced[slot[k]] = sigma[k];
    if (evaluate_forced(net, sample.digits(), target, forced) == label) accepted.push_back(x);
  }
  return ConfigurationSpace::of(edges, dims, std::move(accepted));
}

Environment oracle_environment(const Network& net, std::span<const LabeledSample> samples, NodeId u) {
  if (u >= net.node_count()) throw DomainError("node id out of range");
  const auto& t = net.node(u).payload;
  Environment env(t.rows(), t.cols());
  std::vector<Digit> values(net.edge_count());
  for (const auto& s : samples) {
    if (s.state.bases() != net.site_bases()) throw DomainError("sample bases differ from the network's sites");
    net.evaluate_edges(s.state.digits(), values);
    const Composite row = net.node_input(u, values);
    for (std::uint32_t col = 0; col < t.cols(); ++col) {
      const auto digits = decompose(col, t.out_dims());
      if (evaluate_forced(net, s.state.digits(), u, digits.digits()) == s.label) ++env(row, col);
    }
  }
  return env;
}

TableSearchResult brute_optimal_tensor(const Network& net, std::span<const LabeledSample> samples, NodeId u) {
  if (u >= net.node_count()) throw DomainError("node id out of range");
  const auto& current = net.node(u).payload;
  const std::size_t rows = current.rows();
  const std::size_t cols = current.cols();
  std::uint64_t candidates = 1;
  for (std::size_t r = 0; r < rows; ++r) {
    candidates *= cols;
    if (candidates > kTableSearchCap) throw SizeCapError("table search exceeds 2^16 candidates");
  }

  Network work = net;
  std::vector<std::uint32_t> table(rows, 0);
  TableSearchResult best;
  bool first = true;
  for (std::uint64_t k = 0; k < candidates; ++k) {
    // Lexicographic odometer, first row most significant.
    if (k > 0) {
      for (std::size_t r = rows; r-- > 0;) {
        if (++table[r] < cols) break;
        table[r] = 0;
      }
    }
    UnitalTensor cand(current.in_dims(), current.out_dims(), table);
    work.set_payload(u, cand);
    std::size_t correct = 0;
    for (const auto& s : samples) correct += forward_evaluate(work, s.state) == s.label;
    if (first || correct > best.n_correct) {
      best = {std::move(cand), correct};
      first = false;
    }
  }
  return best;
}

namespace {

Dim draw_dim(Rng& rng, Dim lo, Dim hi) { return lo + static_cast<Dim>(uniform_below(rng, hi - lo + 1)); }

Network random_free_network(Rng& rng, const InstanceCaps& caps) {
  NetworkBuilder b;
  const auto sites = static_cast<std::uint32_t>(2 + uniform_below(rng, caps.max_sites - 1));
  std::vector<std::pair<EdgeId, int>> open;
  for (std::uint32_t i = 0; i < sites; ++i) open.emplace_back(b.add_site(draw_dim(rng, 2, caps.max_dim)), -1);

  const Dim labels = draw_dim(rng, 2, caps.max_dim);
  std::size_t nodes = 0;
  while (true) {
    std::size_t k = 2 + uniform_below(rng, 2);
    if (nodes < 8 && uniform_below(rng, 6) == 0) k = 1;
    k = std::min(k, open.size());
    std::vector<EdgeId> in;
    int layer = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const auto pick = uniform_below(rng, open.size());
      in.push_back(open[pick].first);
      layer = std::max(layer, open[pick].second + 1);
      open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    ++nodes;
    if (open.empty()) {
      const EdgeId out = b.add_node(in, {labels}, layer).front();
      BuildParams p;
      p.kind = NetworkKind::custom;
      p.sites = sites;
      p.labels = labels;
      return b.finish(out, p);
    }
    std::vector<Dim> out_dims{draw_dim(rng, 2, caps.max_dim)};
    if (k >= 2 && uniform_below(rng, 3) == 0) out_dims.push_back(draw_dim(rng, 2, caps.max_dim));
    for (EdgeId e : b.add_node(in, out_dims, layer)) open.emplace_back(e, layer);
  }
}

}  // namespace

Instance random_instance(Rng& rng, const InstanceCaps& caps) {
  if (caps.max_sites < 2 || caps.max_dim < 2 || caps.max_samples == 0) {
    throw ConfigError("instance caps need at least 2 sites, dim 2 and one sample");
  }
  Instance inst;
  const Dim d = draw_dim(rng, 2, caps.max_dim);
  const Dim c = draw_dim(rng, 2, caps.max_dim);
  const Dim chi = draw_dim(rng, c, caps.max_dim);
  switch (uniform_below(rng, 4)) {
    case 0: {
      const auto n = static_cast<std::uint32_t>(2 + uniform_below(rng, caps.max_sites - 1));
      inst.net = build_mps(n, d, c, chi);
      break;
    }
    case 1:
    case 2:
      if (caps.max_sites >= 6) {
        const bool mera = uniform_below(rng, 2) == 0;
        inst.net = build_binary_mera(6, d, c, chi, mera, uniform_below(rng, 2) == 0);
        break;
      }
      [[fallthrough]];
    default:
      inst.net = random_free_network(rng, caps);
      break;
  }
  inst.net.randomize(rng, inst.net.kind() != NetworkKind::ttn);

  const auto count = 1 + uniform_below(rng, caps.max_samples);
  const auto& bases = inst.net.site_bases();
  const Dim labels = inst.net.label_count();
  for (std::uint64_t i = 0; i < count; ++i) {
    std::vector<Digit> digits(bases.size());
    for (std::size_t s = 0; s < bases.size(); ++s) digits[s] = static_cast<Digit>(uniform_below(rng, bases[s]));
    NumberState state(std::move(digits), bases);
    // Half the labels agree with the network so environments are not all empty.
    const Digit label = uniform_below(rng, 2) == 0 ? forward_evaluate(inst.net, state)
                                                   : static_cast<Digit>(uniform_below(rng, labels));
    inst.samples.push_back({std::move(state), label});
  }
  return inst;
}

}  // namespace nsp::oracle

#include "nsp/contraction.hpp"

#include <algorithm>
#include <bit>
#include <unordered_map>

#include "nsp/errors.hpp"

namespace nsp {

namespace {

constexpr Composite kLoweringCap = Composite{1} << 26;
constexpr Composite kStampCap = Composite{1} << 22;

std::vector<Dim> dims_of(const Network& net, std::span<const EdgeId> edges) {
  std::vector<Dim> dims;
  dims.reserve(edges.size());
  for (EdgeId e : edges) dims.push_back(net.edge(e).dim);
  return dims;
}

}  // namespace

// ---------------------------------------------------------------------------
// ConfigurationSpace

ConfigurationSpace::ConfigurationSpace(std::vector<EdgeId> edges, std::vector<Dim> dims)
    : edges_(std::move(edges)), dims_(std::move(dims)) {
  if (edges_.size() != dims_.size()) throw DomainError("configuration space edge/dim length mismatch");
  space_ = nsp::space_size(dims_);
}

ConfigurationSpace ConfigurationSpace::full(std::vector<EdgeId> edges, std::vector<Dim> dims) {
  ConfigurationSpace s(std::move(edges), std::move(dims));
  std::vector<Composite> all(s.space_);
  for (Composite x = 0; x < s.space_; ++x) all[x] = x;
  s.choose_representation(std::move(all));
  return s;
}

ConfigurationSpace ConfigurationSpace::of(std::vector<EdgeId> edges, std::vector<Dim> dims,
                                          std::vector<Composite> accepted) {
  ConfigurationSpace s(std::move(edges), std::move(dims));
  std::sort(accepted.begin(), accepted.end());
  accepted.erase(std::unique(accepted.begin(), accepted.end()), accepted.end());
  if (!accepted.empty() && accepted.back() >= s.space_) throw DomainError("accepted composite outside the space");
  s.choose_representation(std::move(accepted));
  return s;
}

ConfigurationSpace ConfigurationSpace::from_flags(std::vector<EdgeId> edges, std::vector<Dim> dims,
                                                  const std::vector<std::uint8_t>& flags) {
  ConfigurationSpace s(std::move(edges), std::move(dims));
  if (flags.size() != s.space_) throw DomainError("flag vector length differs from the space size");
  std::vector<Composite> accepted;
  for (Composite x = 0; x < s.space_; ++x)
    if (flags[x]) accepted.push_back(x);
  s.choose_representation(std::move(accepted));
  return s;
}

void ConfigurationSpace::choose_representation(std::vector<Composite> sorted) {
  count_ = sorted.size();
  dense_ = 2 * static_cast<Composite>(count_) > space_;
  if (dense_) {
    bits_.assign((space_ + 63) / 64, 0);
    for (Composite x : sorted) bits_[x / 64] |= std::uint64_t{1} << (x % 64);
    sparse_.clear();
  } else {
    sparse_ = std::move(sorted);
    bits_.clear();
  }
}

bool ConfigurationSpace::contains(Composite x) const {
  if (x >= space_) return false;
  if (dense_) return (bits_[x / 64] >> (x % 64)) & 1u;
  return std::binary_search(sparse_.begin(), sparse_.end(), x);
}

std::vector<Composite> ConfigurationSpace::accepted() const {
  if (!dense_) return sparse_;
  std::vector<Composite> out;
  out.reserve(count_);
  for (std::size_t w = 0; w < bits_.size(); ++w) {
    std::uint64_t word = bits_[w];
    while (word) {
      out.push_back(w * 64 + static_cast<Composite>(std::countr_zero(word)));
      word &= word - 1;
    }
  }
  return out;
}

bool operator==(const ConfigurationSpace& a, const ConfigurationSpace& b) {
  if (a.edges_ != b.edges_ || a.dims_ != b.dims_ || a.count_ != b.count_) return false;
  if (a.dense_ == b.dense_) return a.dense_ ? a.bits_ == b.bits_ : a.sparse_ == b.sparse_;
  return a.accepted() == b.accepted();
}

// ---------------------------------------------------------------------------
// Lifting and lowering

BoundaryDigits lift_boundary(const Network& net, const CausalCone& cone, const NumberState& sample) {
  if (sample.bases() != net.site_bases()) throw DomainError("sample bases differ from the network's sites");
  std::vector<Digit> values(net.edge_count(), 0);
  for (std::size_t i = 0; i < net.input_sites().size(); ++i) values[net.input_sites()[i]] = sample[i];
  for (NodeId id = 0; id < net.node_count(); ++id) {
    if (!cone.contains(id)) net.apply_node(id, values);
  }
  BoundaryDigits boundary;
  for (const auto& b : cone.boundary_edges) boundary[b.edge] = values[b.edge];
  return boundary;
}

ConfigurationSpace lower_config_space(const Network& net, const ConfigurationSpace& upper,
                                      std::span<const NodeId> layer_nodes, const BoundaryDigits& boundary) {
  if (layer_nodes.empty()) return upper;

  std::vector<NodeId> nodes(layer_nodes.begin(), layer_nodes.end());
  std::sort(nodes.begin(), nodes.end());
  std::vector<bool> in_layer(net.node_count(), false);
  for (NodeId id : nodes) in_layer.at(id) = true;

  const auto& up_edges = upper.edges();
  const auto is_upper = [&](EdgeId e) { return std::find(up_edges.begin(), up_edges.end(), e) != up_edges.end(); };

  std::vector<EdgeId> lower_edges;
  for (EdgeId e : up_edges) {
    const auto& edge = net.edge(e);
    if (edge.is_input() || !in_layer[edge.producer]) lower_edges.push_back(e);
  }
  for (NodeId id : nodes) {
    const auto& n = net.node(id);
    for (EdgeId e : n.out_edges) {
      const auto& edge = net.edge(e);
      const bool internal = edge.consumer != kNoNode && in_layer[edge.consumer];
      if (!internal && !is_upper(e)) {
        throw InternalError("layer output edge " + std::to_string(e) + " missing from the upper configuration space");
      }
    }
    for (EdgeId e : n.in_edges) {
      const auto& edge = net.edge(e);
      const bool internal = !edge.is_input() && in_layer[edge.producer];
      if (!internal && !boundary.contains(e)) lower_edges.push_back(e);
    }
  }
  std::sort(lower_edges.begin(), lower_edges.end());
  const auto lower_dims = dims_of(net, lower_edges);
  const Composite lower_space = space_size(lower_dims);
  if (lower_space > kLoweringCap) throw SizeCapError("lowered configuration space exceeds the enumeration cap");

  std::vector<Digit> values(net.edge_count(), 0);
  for (const auto& [e, d] : boundary) values.at(e) = d;
  const auto up_strides = strides_of(upper.dims());

  std::vector<Digit> digits(lower_edges.size(), 0);
  std::vector<std::uint8_t> flags(lower_space, 0);
  for (Composite x = 0; x < lower_space; ++x) {
    for (std::size_t i = 0; i < lower_edges.size(); ++i) values[lower_edges[i]] = digits[i];
    for (NodeId id : nodes) net.apply_node(id, values);
    Composite y = 0;
    for (std::size_t i = 0; i < up_edges.size(); ++i) y += values[up_edges[i]] * up_strides[i];
    flags[x] = upper.contains(y) ? 1 : 0;
    for (std::size_t i = digits.size(); i-- > 0;) {
      if (++digits[i] < lower_dims[i]) break;
      digits[i] = 0;
    }
  }
  return ConfigurationSpace::from_flags(std::move(lower_edges), lower_dims, flags);
}

namespace {

ConfigurationSpace lower_through_cone(const Network& net, const CausalCone& cone, Digit label,
                                      const BoundaryDigits& boundary) {
  if (label >= net.label_count()) throw DomainError("label outside the network's label space");
  auto space = ConfigurationSpace::of({net.output_edge()}, {net.label_count()}, {label});
  if (cone.cross_sections.front() != space.edges()) throw InternalError("cone does not start at the output edge");
  for (std::size_t i = 0; i < cone.lowering_steps.size(); ++i) {
    space = lower_config_space(net, space, cone.lowering_steps[i], boundary);
    if (space.edges() != cone.cross_sections[i + 1]) {
      throw InternalError("lowered edges differ from the cone cross-section");
    }
  }
  return space;
}

}  // namespace

ConfigurationSpace config_space(const Network& net, const NumberState& sample, Digit label,
                                const SiteRegion& region) {
  const auto cone = causal_cone(net, region);
  return lower_through_cone(net, cone, label, lift_boundary(net, cone, sample));
}

ConfigurationSpace config_space(const Network& net, const NumberState& sample, Digit label, NodeId target) {
  const auto cone = causal_cone(net, target);
  return lower_through_cone(net, cone, label, lift_boundary(net, cone, sample));
}

// ---------------------------------------------------------------------------
// Environments

bool Environment::row_is_zero(std::size_t r) const {
  for (auto v : row(r))
    if (v != 0) return false;
  return true;
}

std::uint64_t Environment::trace_with(const UnitalTensor& t) const {
  if (t.rows() != rows_ || t.cols() != cols_) throw DomainError("tensor shape differs from the environment");
  std::uint64_t sum = 0;
  for (std::size_t r = 0; r < rows_; ++r) sum += (*this)(r, t[r]);
  return sum;
}

Environment& Environment::operator+=(const Environment& other) {
  if (other.rows_ != rows_ || other.cols_ != cols_) throw DomainError("environment shapes differ");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

std::size_t n_correct(const Network& net, std::span<const LabeledSample> samples) {
  std::vector<Digit> values(net.edge_count());
  std::size_t correct = 0;
  for (const auto& s : samples) {
    if (s.state.bases() != net.site_bases()) throw DomainError("sample bases differ from the network's sites");
    net.evaluate_edges(s.state.digits(), values);
    if (values[net.output_edge()] == s.label) ++correct;
  }
  return correct;
}

Environment accumulate_environment(const Network& net, std::span<const LabeledSample> samples, NodeId u,
                                   EnvironmentMethod method) {
  EnvironmentEngine engine(net, samples);
  return engine.environment(u, method);
}

// One forward-image step of the reachable lowering: a cone node applied to
// every live state tuple.
struct StepPlan {
  NodeId node = 0;
  std::vector<EdgeId> boundary_edges;
  std::vector<Composite> boundary_strides;
  std::vector<std::uint32_t> open_positions;
  std::vector<Composite> open_strides;
  // Source of each position of the next tuple: >= 0 copies an old position,
  // -(k + 1) takes output k of the node.
  std::vector<std::int32_t> next_from;
  std::vector<Composite> key_strides;
  Composite key_space = 1;
};

struct EnvironmentEngine::Plan {
  NodeId target = 0;
  CausalCone cone;
  std::vector<StepPlan> steps;
  std::size_t initial_width = 0;
  std::size_t output_position = 0;
};

EnvironmentEngine::EnvironmentEngine(const Network& net, std::span<const LabeledSample> samples) : net_(&net) {
  const auto sites = net.input_sites().size();
  site_digits_.reserve(samples.size() * sites);
  labels_.reserve(samples.size());
  for (const auto& s : samples) {
    if (s.state.bases() != net.site_bases()) throw DomainError("sample bases differ from the network's sites");
    if (s.label >= net.label_count()) throw DomainError("sample label outside the network's label space");
    site_digits_.insert(site_digits_.end(), s.state.digits().begin(), s.state.digits().end());
    labels_.push_back(s.label);
  }
  plans_.resize(net.node_count());
  refresh();
}

EnvironmentEngine::~EnvironmentEngine() = default;
EnvironmentEngine::EnvironmentEngine(EnvironmentEngine&&) noexcept = default;
EnvironmentEngine& EnvironmentEngine::operator=(EnvironmentEngine&&) noexcept = default;

void EnvironmentEngine::refresh() {
  const auto sites = net_->input_sites().size();
  const auto edges = net_->edge_count();
  edge_values_.assign(labels_.size() * edges, 0);
  for (std::size_t k = 0; k < labels_.size(); ++k) {
    net_->evaluate_edges(std::span<const Digit>(site_digits_).subspan(k * sites, sites),
                         std::span<Digit>(edge_values_).subspan(k * edges, edges));
  }
}

std::size_t EnvironmentEngine::n_correct() const {
  const auto edges = net_->edge_count();
  const auto out = net_->output_edge();
  std::size_t correct = 0;
  for (std::size_t k = 0; k < labels_.size(); ++k)
    if (edge_values_[k * edges + out] == labels_[k]) ++correct;
  return correct;
}

const EnvironmentEngine::Plan& EnvironmentEngine::plan_for(NodeId u) {
  if (u >= net_->node_count()) throw DomainError("node id " + std::to_string(u) + " out of range");
  if (plans_[u]) return *plans_[u];

  const Network& net = *net_;
  auto plan = std::make_unique<Plan>();
  plan->target = u;
  plan->cone = causal_cone(net, u);

  std::vector<EdgeId> live = net.node(u).out_edges;
  plan->initial_width = live.size();
  for (NodeId v : plan->cone.cone_nodes) {
    if (v == u) continue;
    const auto& n = net.node(v);
    const auto& strides = net.node_in_strides(v);
    StepPlan step;
    step.node = v;
    std::vector<bool> consumed(live.size(), false);
    for (std::size_t k = 0; k < n.in_edges.size(); ++k) {
      const auto it = std::find(live.begin(), live.end(), n.in_edges[k]);
      if (it == live.end()) {
        step.boundary_edges.push_back(n.in_edges[k]);
        step.boundary_strides.push_back(strides[k]);
      } else {
        const auto pos = static_cast<std::uint32_t>(it - live.begin());
        step.open_positions.push_back(pos);
        step.open_strides.push_back(strides[k]);
        consumed[pos] = true;
      }
    }
    if (step.open_positions.empty()) throw InternalError("cone node without open inputs");
    std::vector<EdgeId> next;
    for (std::size_t p = 0; p < live.size(); ++p) {
      if (consumed[p]) continue;
      next.push_back(live[p]);
      step.next_from.push_back(static_cast<std::int32_t>(p));
    }
    for (std::size_t k = 0; k < n.out_edges.size(); ++k) {
      next.push_back(n.out_edges[k]);
      step.next_from.push_back(-static_cast<std::int32_t>(k) - 1);
    }
    const auto next_dims = dims_of(net, next);
    step.key_strides = strides_of(next_dims);
    step.key_space = space_size(next_dims);
    live = std::move(next);
    plan->steps.push_back(std::move(step));
  }
  if (live.size() != 1 || live.front() != net.output_edge()) {
    throw InternalError("cone of node " + std::to_string(u) + " does not close on the output edge");
  }
  plan->output_position = 0;
  plans_[u] = std::move(plan);
  return *plans_[u];
}

Environment EnvironmentEngine::environment(NodeId u, EnvironmentMethod method) {
  return method == EnvironmentMethod::reachable ? reachable_environment(u) : full_environment(u);
}

Environment EnvironmentEngine::reachable_environment(NodeId u) {
  const Plan& plan = plan_for(u);
  const Network& net = *net_;
  const auto& target = net.node(u);
  const std::size_t cols = target.payload.cols();
  Environment env(target.payload.rows(), cols);
  const auto edges = net.edge_count();

  // Scratch reused across samples.
  std::vector<Digit> current;
  std::vector<Digit> next;
  std::vector<Digit> tuple;
  std::vector<std::vector<std::uint32_t>> transitions(plan.steps.size());
  std::vector<std::uint8_t> accepted;
  std::vector<std::uint8_t> lowered;
  std::unordered_map<Composite, std::uint32_t> spill;

  Composite widest = 0;
  for (const auto& step : plan.steps) widest = std::max(widest, std::min(step.key_space, kStampCap));
  if (stamp_.size() < widest) {
    stamp_.assign(widest, 0);
    stamp_index_.assign(widest, 0);
    generation_ = 0;
  }

  for (std::size_t k = 0; k < labels_.size(); ++k) {
    const Digit* values = edge_values_.data() + k * edges;

    // Every output column of the target is a candidate state.
    std::size_t width = plan.initial_width;
    std::size_t count = cols;
    current.resize(count * width);
    for (std::uint32_t c = 0; c < cols; ++c) {
      const auto digits = net.node_output_digits(u, c);
      std::copy(digits.begin(), digits.end(), current.begin() + c * width);
    }

    for (std::size_t j = 0; j < plan.steps.size(); ++j) {
      const auto& step = plan.steps[j];
      const auto& v = net.node(step.node);
      const auto* table = v.payload.table().data();
      const bool single_out = v.out_edges.size() == 1;
      Composite base = 0;
      for (std::size_t b = 0; b < step.boundary_edges.size(); ++b) {
        base += values[step.boundary_edges[b]] * step.boundary_strides[b];
      }
      const std::size_t next_width = step.next_from.size();
      const bool use_stamp = step.key_space <= kStampCap;
      if (use_stamp) {
        if (++generation_ == 0) {
          std::fill(stamp_.begin(), stamp_.end(), 0);
          generation_ = 1;
        }
      } else {
        spill.clear();
      }
      auto& trans = transitions[j];
      trans.resize(count);
      next.clear();
      tuple.resize(next_width);
      std::uint32_t next_count = 0;
      for (std::size_t s = 0; s < count; ++s) {
        const Digit* state = current.data() + s * width;
        Composite in = base;
        for (std::size_t i = 0; i < step.open_positions.size(); ++i) {
          in += state[step.open_positions[i]] * step.open_strides[i];
        }
        const std::uint32_t column = table[in];
        const Digit* out = single_out ? &column : net.node_output_digits(step.node, column).data();
        Composite key = 0;
        for (std::size_t p = 0; p < next_width; ++p) {
          const auto from = step.next_from[p];
          tuple[p] = from >= 0 ? state[from] : out[-from - 1];
          key += tuple[p] * step.key_strides[p];
        }
        std::uint32_t index;
        bool fresh;
        if (use_stamp) {
          fresh = stamp_[key] != generation_;
          if (fresh) {
            stamp_[key] = generation_;
            stamp_index_[key] = next_count;
          }
          index = stamp_index_[key];
        } else {
          const auto [it, inserted] = spill.try_emplace(key, next_count);
          fresh = inserted;
          index = it->second;
        }
        if (fresh) {
          next.insert(next.end(), tuple.begin(), tuple.end());
          ++next_count;
        }
        trans[s] = index;
      }
      std::swap(current, next);
      width = next_width;
      count = next_count;
    }

    // Top cross-section is the output edge alone; lower the accepted flags.
    accepted.resize(count);
    for (std::size_t s = 0; s < count; ++s) {
      accepted[s] = current[s * width + plan.output_position] == labels_[k] ? 1 : 0;
    }
    for (std::size_t j = plan.steps.size(); j-- > 0;) {
      const auto& trans = transitions[j];
      lowered.resize(trans.size());
      for (std::size_t s = 0; s < trans.size(); ++s) lowered[s] = accepted[trans[s]];
      std::swap(accepted, lowered);
    }

    const Composite row = net.node_input(u, std::span<const Digit>(values, edges));
    for (std::size_t c = 0; c < cols; ++c)
      if (accepted[c]) ++env(row, c);
  }
  return env;
}

Environment EnvironmentEngine::full_environment(NodeId u) {
  const Plan& plan = plan_for(u);
  const Network& net = *net_;
  const auto& target = net.node(u);
  Environment env(target.payload.rows(), target.payload.cols());
  const auto edges = net.edge_count();
  for (std::size_t k = 0; k < labels_.size(); ++k) {
    const std::span<const Digit> values(edge_values_.data() + k * edges, edges);
    BoundaryDigits boundary;
    for (const auto& b : plan.cone.boundary_edges) boundary[b.edge] = values[b.edge];
    const auto space = lower_through_cone(net, plan.cone, labels_[k], boundary);
    const Composite row = net.node_input(u, values);
    for (Composite c : space.accepted()) ++env(row, c);
  }
  return env;
}

}  // namespace nsp

#pragma once

#include <cstdint>
#include <vector>

#include "nsp/contraction.hpp"
#include "nsp/network.hpp"
#include "nsp/tensor.hpp"

namespace nsp::testing {

/// The 4x4 worked-example environment of a 2-in/2-out node with binary legs.
inline Environment worked_environment() {
  const std::uint64_t counts[4][4] = {{10, 12, 9, 8}, {5, 6, 9, 2}, {21, 18, 7, 22}, {12, 15, 13, 14}};
  Environment env(4, 4);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) env(r, c) = counts[r][c];
  return env;
}

/// Optimal tensor for worked_environment(): rows 0..3 map to columns 1, 2, 3, 1.
inline UnitalTensor worked_optimum() { return UnitalTensor({2, 2}, {2, 2}, {1, 2, 3, 1}); }

/// One node consuming two sites; its output composite is the label.
inline Network single_node_network(const UnitalTensor& payload) {
  NetworkBuilder b;
  const auto s0 = b.add_site(payload.in_dims()[0]);
  const auto s1 = b.add_site(payload.in_dims()[1]);
  const auto cols = static_cast<Dim>(payload.cols());
  const auto out = b.add_node({s0, s1}, {cols}, 0).front();
  auto net = b.finish(out, BuildParams{});
  net.set_payload(0, UnitalTensor(payload.in_dims(), {cols}, payload.table()));
  return net;
}

/// Samples realizing worked_environment() on single_node_network: for input
/// row r and column c, counts[r][c] samples with label c.
inline std::vector<LabeledSample> worked_samples() {
  const auto env = worked_environment();
  std::vector<LabeledSample> out;
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      for (std::uint64_t k = 0; k < env(r, c); ++k) {
        out.push_back({NumberState({static_cast<Digit>(r / 2), static_cast<Digit>(r % 2)}, {2, 2}),
                       static_cast<Digit>(c)});
      }
    }
  }
  return out;
}

/// Perfect parity MPS: every node is the XOR of its two binary inputs.
inline Network parity_automaton(std::uint32_t sites) {
  auto net = build_mps(sites, 2, 2, 2);
  for (NodeId id = 0; id < net.node_count(); ++id) net.set_payload(id, UnitalTensor({2, 2}, {2}, {0, 1, 1, 0}));
  return net;
}

}  // namespace nsp::testing

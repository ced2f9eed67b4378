#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "nsp/causal_cone.hpp"
#include "nsp/errors.hpp"
#include "nsp/network.hpp"
#include "nsp/oracle.hpp"
#include "support/fixtures.hpp"

namespace nsp {
namespace {

std::vector<Dim> out_dims_of(const Network& net) {
  std::vector<Dim> dims;
  for (const auto& n : net.nodes()) dims.push_back(net.edge(n.out_edges.front()).dim);
  return dims;
}

void expect_topological(const Network& net) {
  std::vector<bool> ready(net.edge_count(), false);
  for (EdgeId e : net.input_sites()) ready[e] = true;
  for (const auto& n : net.nodes()) {
    for (EdgeId e : n.in_edges) EXPECT_TRUE(ready[e]) << "node " << n.id << " reads edge " << e << " early";
    for (EdgeId e : n.out_edges) ready[e] = true;
  }
  EXPECT_TRUE(ready[net.output_edge()]);
}

TEST(BuildMps, BondDims) {
  const auto net = build_mps(4, 2, 2, 4);
  EXPECT_EQ(net.node_count(), 3u);
  EXPECT_EQ(out_dims_of(net), (std::vector<Dim>{4, 4, 2}));
  expect_topological(net);
}

TEST(BuildMps, SmallestChain) {
  const auto net = build_mps(2, 2, 2, 10);
  ASSERT_EQ(net.node_count(), 1u);
  EXPECT_EQ(net.node(0).payload.in_dims(), (std::vector<Dim>{2, 2}));
  EXPECT_EQ(net.node(0).payload.out_dims(), (std::vector<Dim>{2}));
}

TEST(BuildMps, DivSevenGeometry) {
  const auto net = build_mps(20, 2, 7, 12);
  EXPECT_EQ(net.node_count(), 19u);
  const auto dims = out_dims_of(net);
  EXPECT_EQ(dims.back(), 7u);
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) EXPECT_LE(dims[i], 12u);
  EXPECT_EQ(dims[0], 4u);
  EXPECT_EQ(dims[1], 8u);
  EXPECT_EQ(dims[2], 12u);
  EXPECT_EQ(net.label_count(), 7u);
  expect_topological(net);
}

TEST(BuildMps, RejectsSmallChi) {
  EXPECT_THROW(build_mps(4, 2, 7, 6), ConfigError);
  EXPECT_THROW(build_mps(1, 2, 2, 4), ConfigError);
}

TEST(BuildMera, HeightGeometry) {
  const auto net = build_binary_mera(24, 3, 3, 9, true, true);
  EXPECT_EQ(net.node_count(), 40u);
  EXPECT_EQ(net.max_internal_dim(), 9u);
  EXPECT_EQ(net.node(39).role, NodeRole::top);
  EXPECT_EQ(net.node(39).payload.in_dims().size(), 3u);
  EXPECT_EQ(net.label_count(), 3u);
  // Three halving levels, each with one u group and one w group.
  EXPECT_EQ(net.share_groups().size(), 6u);
  for (const auto& group : net.share_groups()) {
    for (NodeId m : group) EXPECT_EQ(net.node(m).payload.in_dims(), net.node(group.front()).payload.in_dims());
  }
  expect_topological(net);
}

TEST(BuildMera, SmallestTtn) {
  const auto net = build_binary_mera(6, 2, 2, 4, false);
  EXPECT_EQ(net.kind(), NetworkKind::ttn);
  std::size_t w = 0;
  for (const auto& n : net.nodes()) {
    if (n.role == NodeRole::isometry) ++w;
    if (n.role == NodeRole::disentangler) {
      EXPECT_EQ(n.payload, UnitalTensor::identity(n.payload.in_dims()));
      EXPECT_EQ(n.payload.in_dims(), n.payload.out_dims());
    }
  }
  EXPECT_EQ(w, 3u);
  EXPECT_EQ(net.node(net.node_count() - 1).role, NodeRole::top);
}

TEST(BuildMera, RejectsBadSiteCounts) {
  EXPECT_THROW(build_binary_mera(8, 2, 2, 4, true), ConfigError);
  EXPECT_THROW(build_binary_mera(3, 2, 2, 4, true), ConfigError);
  EXPECT_THROW(build_binary_mera(18, 2, 2, 4, true), ConfigError);
}

TEST(BuildMera, IdentityDisentanglersLeaveEvaluationUnchanged) {
  auto rng = make_rng(4);
  auto ttn = build_binary_mera(12, 2, 2, 4, false);
  ttn.randomize(rng, false);
  auto mera = build_binary_mera(12, 2, 2, 4, true);
  for (NodeId id = 0; id < mera.node_count(); ++id) {
    EXPECT_EQ(mera.node(id).payload.in_dims(), ttn.node(id).payload.in_dims());
    mera.set_payload(id, ttn.node(id).payload);
  }
  for (Composite x = 0; x < 4096; ++x) {
    const auto s = decompose(x, ttn.site_bases());
    EXPECT_EQ(forward_evaluate(mera, s), forward_evaluate(ttn, s));
  }
}

TEST(Randomize, SharedGroupsGetOneDrawAndFrozenUStayIdentity) {
  auto rng = make_rng(8);
  auto net = build_binary_mera(12, 2, 3, 4, true, true);
  net.randomize(rng, false);
  for (const auto& group : net.share_groups()) {
    for (NodeId m : group) EXPECT_EQ(net.node(m).payload, net.node(group.front()).payload);
  }
  for (const auto& n : net.nodes()) {
    if (n.role == NodeRole::disentangler) {
      EXPECT_EQ(n.payload, UnitalTensor::identity(n.payload.in_dims()));
    }
  }
}

TEST(ForwardEvaluate, SingleWorkedNode) {
  const auto net = testing::single_node_network(testing::worked_optimum());
  EXPECT_EQ(forward_evaluate(net, NumberState({1, 1}, {2, 2})), 1u);
  EXPECT_THROW(forward_evaluate(net, NumberState({1, 1, 0}, {2, 2, 2})), DomainError);
}

TEST(ForwardEvaluate, IdentityTtnMapsZerosToZero) {
  auto net = build_binary_mera(6, 2, 2, 4, false);
  for (const auto& n : net.nodes()) net.set_payload(n.id, UnitalTensor::constant(n.payload.in_dims(), n.payload.out_dims()));
  EXPECT_EQ(forward_evaluate(net, NumberState::with_base({0, 0, 0, 0, 0, 0}, 2)), 0u);
}

TEST(ForwardEvaluate, RandomMeraMatchesDenseContraction) {
  auto rng = make_rng(21);
  auto net = build_binary_mera(6, 3, 3, 5, true);
  net.randomize(rng);
  const auto dense = oracle::dense_forward(net);
  for (int i = 0; i < 100; ++i) {
    const auto x = uniform_below(rng, dense.size());
    const auto s = decompose(x, net.site_bases());
    EXPECT_EQ(forward_evaluate(net, s), dense(x));
    EXPECT_EQ(oracle::dense_edge_values(net, s)[net.output_edge()], dense(x));
  }
}

TEST(BuildNetwork, RebuildsFromParams) {
  const auto a = build_binary_mera(12, 3, 3, 9, true, true);
  const auto b = build_network(a.params());
  EXPECT_EQ(b.params(), a.params());
  EXPECT_EQ(b.node_count(), a.node_count());
  EXPECT_THROW(build_network(BuildParams{}), ConfigError);
}

TEST(NetworkBuilder, RejectsDanglingEdges) {
  NetworkBuilder b;
  const auto s0 = b.add_site(2);
  b.add_site(2);
  const auto out = b.add_node({s0}, {2}, 0).front();
  EXPECT_THROW(b.finish(out, BuildParams{}), ConfigError);
}

TEST(CausalCone, MpsEnds) {
  const auto net = build_mps(6, 2, 2, 4);
  const auto last = causal_cone(net, SiteRegion{{5}});
  EXPECT_EQ(last.cone_nodes, (std::vector<NodeId>{4}));
  const auto first = causal_cone(net, SiteRegion{{0}});
  EXPECT_EQ(first.cone_nodes.size(), 5u);
}

TEST(CausalCone, MeraThreeSiteRegionsHaveWidthAtMostThree) {
  const auto net = build_binary_mera(24, 3, 3, 9, true);
  for (std::uint32_t start = 0; start + 3 <= 24; ++start) {
    for (std::uint32_t len = 1; len <= 3; ++len) {
      SiteRegion region;
      for (std::uint32_t k = 0; k < len; ++k) region.sites.push_back(start + k);
      EXPECT_LE(causal_cone(net, region).causal_width(), 3u) << "start " << start << " len " << len;
    }
  }
}

TEST(CausalCone, EqualsReachabilityClosure) {
  auto rng = make_rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto inst = oracle::random_instance(rng, {8, 3, 1});
    const auto& net = inst.net;
    SiteRegion region;
    for (std::uint32_t i = 0; i < net.input_sites().size(); ++i) {
      if (uniform_below(rng, 2) == 0) region.sites.push_back(i);
    }
    if (region.sites.empty()) region.sites.push_back(0);
    std::set<EdgeId> reached;
    for (auto s : region.sites) reached.insert(net.input_sites()[s]);
    std::vector<NodeId> expected;
    for (const auto& n : net.nodes()) {
      const bool hit = std::any_of(n.in_edges.begin(), n.in_edges.end(), [&](EdgeId e) { return reached.count(e); });
      if (!hit) continue;
      expected.push_back(n.id);
      reached.insert(n.out_edges.begin(), n.out_edges.end());
    }
    const auto cone = causal_cone(net, region);
    EXPECT_EQ(cone.cone_nodes, expected);
    for (const auto& b : cone.boundary_edges) {
      EXPECT_FALSE(reached.count(b.edge));
      EXPECT_EQ(b.producer, net.edge(b.edge).producer);
    }
    EXPECT_EQ(cone.cross_sections.front(), (std::vector<EdgeId>{net.output_edge()}));
  }
}

TEST(CausalCone, RejectsBadRegions) {
  const auto net = build_mps(4, 2, 2, 4);
  EXPECT_THROW(causal_cone(net, SiteRegion{}), DomainError);
  EXPECT_THROW(causal_cone(net, SiteRegion{{4}}), DomainError);
  EXPECT_THROW(causal_cone(net, SiteRegion{{1, 1}}), DomainError);
  EXPECT_THROW(causal_cone(net, NodeId{7}), DomainError);
}

}  // namespace
}  // namespace nsp

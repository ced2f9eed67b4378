#include <gtest/gtest.h>

#include <algorithm>

#include "nsp/contraction.hpp"
#include "nsp/errors.hpp"
#include "nsp/oracle.hpp"
#include "support/fixtures.hpp"

namespace nsp {
namespace {

TEST(ConfigurationSpace, RepresentationFollowsDensity) {
  const auto sparse = ConfigurationSpace::of({3, 5}, {2, 4}, {7, 1, 1});
  EXPECT_FALSE(sparse.is_dense());
  EXPECT_EQ(sparse.count(), 2u);
  EXPECT_EQ(sparse.accepted(), (std::vector<Composite>{1, 7}));
  EXPECT_TRUE(sparse.contains(7));
  EXPECT_FALSE(sparse.contains(6));

  const auto dense = ConfigurationSpace::of({3, 5}, {2, 4}, {0, 1, 2, 3, 4});
  EXPECT_TRUE(dense.is_dense());
  EXPECT_EQ(dense.count(), 5u);

  std::vector<std::uint8_t> flags(8, 0);
  flags[1] = flags[7] = 1;
  EXPECT_EQ(ConfigurationSpace::from_flags({3, 5}, {2, 4}, flags), sparse);
  EXPECT_EQ(ConfigurationSpace::full({3}, {3}).count(), 3u);
  EXPECT_EQ(ConfigurationSpace({3}, {3}).count(), 0u);
  EXPECT_FALSE(ConfigurationSpace::of({3}, {4}, {1}) == ConfigurationSpace::of({4}, {4}, {1}));
}

TEST(LowerConfigSpace, FullAndEmptyAreFixedPoints) {
  auto rng = make_rng(2);
  auto net = build_mps(3, 3, 2, 9);
  net.randomize(rng);
  const auto cone = causal_cone(net, SiteRegion{{0, 1, 2}});
  const auto top = cone.lowering_steps.front();
  const auto& edges = cone.cross_sections[0];
  const auto full = ConfigurationSpace::full(edges, {2});
  const auto lowered_full = lower_config_space(net, full, top, {});
  EXPECT_EQ(lowered_full.count(), lowered_full.space_size());
  const auto lowered_empty = lower_config_space(net, ConfigurationSpace(edges, {2}), top, {});
  EXPECT_EQ(lowered_empty.count(), 0u);
}

TEST(LowerConfigSpace, WorkedOptimumPreimage) {
  const auto net = testing::single_node_network(testing::worked_optimum());
  const auto upper = ConfigurationSpace::of({net.output_edge()}, {4}, {1});
  const std::vector<NodeId> layer{0};
  const auto lower = lower_config_space(net, upper, layer, {});
  EXPECT_EQ(lower.accepted(), (std::vector<Composite>{0, 3}));
}

TEST(LowerConfigSpace, RejectsMismatchedEdges) {
  const auto net = build_mps(3, 2, 2, 4);
  const auto wrong = ConfigurationSpace::full({0}, {2});
  const std::vector<NodeId> layer{1};
  EXPECT_THROW(lower_config_space(net, wrong, layer, {}), InternalError);
}

TEST(ConfigSpace, WorkedOptimumSingleSiteRegion) {
  const auto net = testing::single_node_network(testing::worked_optimum());
  const auto space = config_space(net, NumberState({0, 1}, {2, 2}), 1, SiteRegion{{1}});
  EXPECT_EQ(space.accepted(), (std::vector<Composite>{0}));
  EXPECT_EQ(space, oracle::brute_config_space(net, NumberState({0, 0}, {2, 2}), 1, SiteRegion{{1}}));
}

TEST(ConfigSpace, TopNodeTargetIsTheLabel) {
  auto rng = make_rng(6);
  auto net = build_binary_mera(6, 2, 3, 4, true);
  net.randomize(rng);
  const NodeId top = static_cast<NodeId>(net.node_count() - 1);
  const auto space = config_space(net, NumberState::with_base({0, 1, 0, 1, 1, 0}, 2), 2, top);
  EXPECT_EQ(space.edges(), (std::vector<EdgeId>{net.output_edge()}));
  EXPECT_EQ(space.accepted(), (std::vector<Composite>{2}));
}

TEST(ConfigSpace, RejectsLabelOutOfRange) {
  const auto net = build_mps(3, 2, 2, 4);
  EXPECT_THROW(config_space(net, NumberState::with_base({0, 0, 0}, 2), 2, SiteRegion{{0}}), DomainError);
}

TEST(ConfigSpace, MatchesBruteForceOnRandomNetworks) {
  auto rng = make_rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = oracle::random_instance(rng);
    const auto& s = inst.samples.front();
    SiteRegion region;
    for (std::uint32_t i = 0; i < inst.net.input_sites().size(); ++i) {
      if (uniform_below(rng, 2) == 0) region.sites.push_back(i);
    }
    if (region.sites.empty()) region.sites.push_back(0);
    EXPECT_EQ(config_space(inst.net, s.state, s.label, region),
              oracle::brute_config_space(inst.net, s.state, s.label, region));
    const auto u = static_cast<NodeId>(uniform_below(rng, inst.net.node_count()));
    EXPECT_EQ(config_space(inst.net, s.state, s.label, u), oracle::brute_config_space(inst.net, s.state, s.label, u));
  }
}

TEST(ConfigSpace, MeraThreeSiteRegionsStayWithinChiCubed) {
  auto rng = make_rng(13);
  auto net = build_binary_mera(12, 2, 2, 3, true);
  net.randomize(rng);
  for (std::uint32_t start = 0; start + 3 <= 12; ++start) {
    std::vector<Digit> digits(12);
    for (auto& x : digits) x = static_cast<Digit>(uniform_below(rng, 2));
    const auto space = config_space(net, NumberState::with_base(digits, 2), static_cast<Digit>(uniform_below(rng, 2)),
                                    SiteRegion{{start, start + 1, start + 2}});
    EXPECT_LE(space.count(), 27u);
  }
}

TEST(LiftBoundary, WholeNetworkConeSeesRawDigits) {
  auto rng = make_rng(1);
  auto net = build_mps(5, 3, 2, 9);
  net.randomize(rng);
  const NumberState s = NumberState::with_base({2, 0, 1, 1, 2}, 3);
  const auto cone = causal_cone(net, SiteRegion{{0}});
  const auto boundary = lift_boundary(net, cone, s);
  ASSERT_EQ(boundary.size(), 4u);
  for (std::uint32_t i = 1; i < 5; ++i) EXPECT_EQ(boundary.at(net.input_sites()[i]), s[i]);
}

TEST(LiftBoundary, LastMpsNodeSeesPrefixBond) {
  auto rng = make_rng(7);
  auto net = build_mps(5, 2, 2, 8);
  net.randomize(rng);
  const NumberState s = NumberState::with_base({1, 0, 1, 1, 0}, 2);
  const auto cone = causal_cone(net, SiteRegion{{4}});
  const auto boundary = lift_boundary(net, cone, s);
  std::vector<Digit> values(net.edge_count());
  net.evaluate_edges(s.digits(), values);
  const EdgeId bond = net.node(3).in_edges[0];
  ASSERT_EQ(boundary.size(), 1u);
  EXPECT_EQ(boundary.at(bond), values[bond]);
}

TEST(LiftBoundary, RandomMeraAgreesWithDenseContraction) {
  auto rng = make_rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    auto net = build_binary_mera(6, 3, 3, 5, true);
    net.randomize(rng);
    const std::uint32_t start = static_cast<std::uint32_t>(uniform_below(rng, 4));
    const auto cone = causal_cone(net, SiteRegion{{start, start + 1, start + 2}});
    std::vector<Digit> digits(6);
    for (auto& x : digits) x = static_cast<Digit>(uniform_below(rng, 3));
    const NumberState s = NumberState::with_base(digits, 3);
    const auto dense = oracle::dense_edge_values(net, s);
    for (const auto& [edge, digit] : lift_boundary(net, cone, s)) EXPECT_EQ(digit, dense[edge]);
  }
}

TEST(Environment, WorkedSamplesReproduceTheCounts) {
  const auto net = testing::single_node_network(testing::worked_optimum());
  const auto samples = testing::worked_samples();
  const auto env = accumulate_environment(net, samples, 0);
  EXPECT_EQ(env, testing::worked_environment());
  EXPECT_EQ(n_correct(net, samples), 58u);
  EXPECT_EQ(env.trace_with(net.node(0).payload), 58u);
}

TEST(Environment, EmptyDatasetGivesZeroMatrix) {
  const auto net = build_mps(4, 2, 2, 4);
  const auto env = accumulate_environment(net, {}, 1);
  for (std::size_t r = 0; r < env.rows(); ++r) EXPECT_TRUE(env.row_is_zero(r));
  EXPECT_EQ(n_correct(net, {}), 0u);
}

TEST(Environment, DuplicatedSampleCountsEachCopy) {
  auto rng = make_rng(3);
  auto net = build_mps(4, 2, 2, 4);
  net.randomize(rng);
  const NumberState s = NumberState::with_base({1, 0, 0, 1}, 2);
  const std::vector<LabeledSample> samples(9, LabeledSample{s, forward_evaluate(net, s)});
  EXPECT_EQ(n_correct(net, samples), 9u);
  for (NodeId u = 0; u < net.node_count(); ++u) {
    const auto env = accumulate_environment(net, samples, u);
    EXPECT_EQ(env.trace_with(net.node(u).payload), 9u);
  }
}

TEST(Environment, TraceIdentityOnRandomNetworks) {
  auto rng = make_rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = oracle::random_instance(rng, {10, 4, 64});
    const auto correct = n_correct(inst.net, inst.samples);
    for (NodeId u = 0; u < inst.net.node_count(); ++u) {
      EXPECT_EQ(accumulate_environment(inst.net, inst.samples, u).trace_with(inst.net.node(u).payload), correct);
    }
  }
}

TEST(Environment, MethodsAgreeWithOracle) {
  auto rng = make_rng(29);
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = oracle::random_instance(rng);
    const auto u = static_cast<NodeId>(uniform_below(rng, inst.net.node_count()));
    const auto expected = oracle::oracle_environment(inst.net, inst.samples, u);
    EXPECT_EQ(accumulate_environment(inst.net, inst.samples, u, EnvironmentMethod::reachable), expected);
    EXPECT_EQ(accumulate_environment(inst.net, inst.samples, u, EnvironmentMethod::full_lowering), expected);
  }
}

TEST(Environment, SampleOrderDoesNotMatter) {
  auto rng = make_rng(37);
  auto inst = oracle::random_instance(rng);
  const auto u = static_cast<NodeId>(inst.net.node_count() / 2);
  const auto before = accumulate_environment(inst.net, inst.samples, u);
  std::reverse(inst.samples.begin(), inst.samples.end());
  EXPECT_EQ(accumulate_environment(inst.net, inst.samples, u), before);
}

TEST(EnvironmentEngine, RefreshTracksPayloadChanges) {
  auto rng = make_rng(41);
  auto net = build_binary_mera(12, 2, 2, 4, true, true);
  net.randomize(rng);
  const auto data = gen_parity(12, 200, 5);
  EnvironmentEngine engine(net, data.samples);
  EXPECT_EQ(engine.n_correct(), n_correct(net, data.samples));
  net.set_payload(3, random_unital(net.node(3).payload.in_dims(), net.node(3).payload.out_dims(), rng));
  engine.refresh();
  EXPECT_EQ(engine.n_correct(), n_correct(net, data.samples));
  for (NodeId u = 0; u < net.node_count(); ++u) {
    EXPECT_EQ(engine.environment(u), oracle::oracle_environment(net, data.samples, u)) << "node " << u;
  }
}

TEST(EnvironmentEngine, RejectsMismatchedSamples) {
  const auto net = build_mps(4, 2, 2, 4);
  const std::vector<LabeledSample> bad{{NumberState::with_base({0, 1, 0}, 2), 0}};
  EXPECT_THROW(EnvironmentEngine(net, bad), DomainError);
  const std::vector<LabeledSample> label{{NumberState::with_base({0, 1, 0, 1}, 2), 5}};
  EXPECT_THROW(EnvironmentEngine(net, label), DomainError);
}

}  // namespace
}  // namespace nsp

#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"
#include "hetedge/walks.hpp"
#include "walk_laws.hpp"

namespace hetedge {
namespace {

using namespace testing;

void expect_law(const Law& got, const Law& want) {
  for (const auto& [v, p] : want) {
    const double g = got.count(v) ? got.at(v) : 0.0;
    EXPECT_NEAR(g, p, kTol) << "node " << v;
  }
  for (const auto& [v, p] : got) EXPECT_TRUE(want.count(v)) << "unexpected node " << v << " freq " << p;
}

TEST(UniformWalk, PathGraphForcedWalk) {
  const auto g = split_by_type(graph_of({{"A", "B", "friend"}}), "friend");
  Rng rng(1);
  EXPECT_EQ(uniform_walk(g, 0, 3, rng), (Walk{0, 1, 0}));
}

TEST(UniformWalk, IsolatedNodeIsSingleton) {
  MultiGraphBuilder b;
  b.add_node("Z");
  const auto g = split_by_type(b.build(), "friend");
  Rng rng(1);
  EXPECT_EQ(uniform_walk(g, 0, 30, rng), (Walk{0}));
}

TEST(UniformWalk, StarFirstStepIsUniform) {
  const auto mg = graph_of({{"A", "B", "friend"}, {"A", "C", "friend"}, {"A", "D", "friend"}});
  const auto g = split_by_type(mg, "friend");
  const NodeId a = mg.labels().id("A");
  expect_law(empirical([&](Rng& r) { return uniform_step(g, a, r); }),
             {{mg.labels().id("B"), 1.0 / 3}, {mg.labels().id("C"), 1.0 / 3}, {mg.labels().id("D"), 1.0 / 3}});
}

TEST(Node2vecWalk, SquareGraphMatchesWeightTable) {
  // Square 0-1-2-3-0 with one diagonal 0-2 so all three weight classes occur.
  MultiGraphBuilder b;
  b.add_numbered_nodes(4);
  for (auto [u, v] : {std::pair{0u, 1u}, {1u, 2u}, {2u, 3u}, {3u, 0u}, {0u, 2u}}) b.add_edge(u, v, 1);
  const auto g = split_by_type(b.build(), 1);
  // At 2 having come from 1: x=1 weight 1/p, x=0 adjacent to 1 weight 1, x=3 weight 1/q.
  const double p = 0.25, q = 4.0;
  const Law want = {{1, 4.0 / 5.25}, {0, 1.0 / 5.25}, {3, 0.25 / 5.25}};
  EXPECT_EQ(node2vec_law(g, 1, 2, p, q), want);
  expect_law(empirical([&](Rng& r) { return node2vec_step(g, 1, 2, p, q, r); }), want);
}

TEST(Node2vecWalk, PlainSquareReturnBias) {
  MultiGraphBuilder b;
  b.add_numbered_nodes(4);
  for (auto [u, v] : {std::pair{0u, 1u}, {1u, 2u}, {2u, 3u}, {3u, 0u}}) b.add_edge(u, v, 1);
  const auto g = split_by_type(b.build(), 1);
  expect_law(empirical([&](Rng& r) { return node2vec_step(g, 0, 1, 0.25, 4.0, r); }),
             {{0, 4.0 / 4.25}, {2, 0.25 / 4.25}});
}

TEST(Node2vecWalk, LargeQExcludesOutwardNodes) {
  const auto mg = graph_of({{"A", "B", "friend"}, {"B", "C", "friend"}, {"A", "C", "friend"}, {"B", "D", "friend"}});
  const auto g = split_by_type(mg, "friend");
  const NodeId a = mg.labels().id("A"), b = mg.labels().id("B"), d = mg.labels().id("D");
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) EXPECT_NE(node2vec_step(g, a, b, 1.0, 1e15, rng), d);
}

TEST(Node2vecWalk, FirstStepIsUniform) {
  const auto mg = random_multigraph(20, 0.3, 17);
  const auto g = split_by_type(mg, 0);
  const NodeId s = busiest(mg);
  expect_law(empirical([&](Rng& r) { return node2vec_step(g, kNoNode, s, 0.25, 4.0, r); }), uniform_law(g, s));
}

TEST(Node2vecWalk, UnitParametersMatchUniform) {
  const auto mg = random_multigraph(20, 0.3, 5);
  const auto g = split_by_type(mg, 1);
  NodeId cur = 0;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (g.degree(v) > g.degree(cur)) cur = v;
  }
  const NodeId prev = g.adj(cur)[0];
  const Law n2v = empirical([&](Rng& r) { return node2vec_step(g, prev, cur, 1.0, 1.0, r); }, 1);
  const Law uni = empirical([&](Rng& r) { return uniform_step(g, cur, r); }, 2);
  expect_law(n2v, uniform_law(g, cur));
  expect_law(n2v, uni);
}

TEST(Node2vecWalk, RandomGraphSecondOrderLaw) {
  const auto mg = random_multigraph(20, 0.3, 23);
  const auto g = split_by_type(mg, 2);
  NodeId cur = 0;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (g.degree(v) > g.degree(cur)) cur = v;
  }
  const NodeId prev = g.adj(cur)[0];
  expect_law(empirical([&](Rng& r) { return node2vec_step(g, prev, cur, 0.5, 2.0, r); }),
             node2vec_law(g, prev, cur, 0.5, 2.0));
}

TEST(HeteroWalk, ThreeTypesAreThriceAsLikely) {
  const auto g = graph_of({{"A", "B", "friend"}, {"A", "B", "chat"}, {"A", "B", "contact"}, {"A", "C", "chat"}});
  const NodeId a = g.labels().id("A");
  expect_law(empirical([&](Rng& r) { return hetero_step(g, a, r); }),
             {{g.labels().id("B"), 0.75}, {g.labels().id("C"), 0.25}});
}

TEST(HeteroWalk, RandomGraphPerEdgeLaw) {
  const auto g = random_multigraph(20, 0.3, 29);
  const NodeId s = busiest(g);
  expect_law(empirical([&](Rng& r) { return hetero_step(g, s, r); }), hetero_law(g, s));
}

TEST(HeteroWalk, SingleTypePerPairEqualsFlattenedUniform) {
  const auto g = graph_of({{"A", "B", "friend"}, {"A", "C", "chat"}, {"A", "D", "contact"}, {"A", "E", "chat"}});
  const NodeId a = g.labels().id("A");
  Law flat;
  for (const char* x : {"B", "C", "D", "E"}) flat[g.labels().id(x)] = 0.25;
  expect_law(empirical([&](Rng& r) { return hetero_step(g, a, r); }), flat);
}

TEST(UniformBiasWalk, TypeThenEdge) {
  const auto g = graph_of(
      {{"A", "B", "contact"}, {"A", "C", "contact"}, {"A", "D", "contact"}, {"A", "B", "chat"}});
  const NodeId a = g.labels().id("A");
  expect_law(empirical([&](Rng& r) { return uniformbias_step(g, a, r); }),
             {{g.labels().id("B"), 2.0 / 3}, {g.labels().id("C"), 1.0 / 6}, {g.labels().id("D"), 1.0 / 6}});
}

TEST(UniformBiasWalk, RandomGraphTwoStepLaw) {
  const auto g = random_multigraph(20, 0.3, 31);
  const NodeId s = busiest(g);
  expect_law(empirical([&](Rng& r) { return uniformbias_step(g, s, r); }), uniformbias_law(g, s));
}

TEST(UniformBiasWalk, SingleTypeEqualsUniform) {
  const auto g = graph_of({{"A", "B", "friend"}, {"A", "C", "friend"}, {"A", "D", "friend"}});
  const NodeId a = g.labels().id("A");
  expect_law(empirical([&](Rng& r) { return uniformbias_step(g, a, r); }),
             uniform_law(split_by_type(g, "friend"), a));
}

TEST(Steps, DeadEndReturnsNoNode) {
  MultiGraphBuilder b;
  b.add_node("Z");
  const auto mg = b.build();
  const auto g = split_by_type(mg, 0);
  Rng rng(1);
  EXPECT_EQ(uniform_step(g, 0, rng), kNoNode);
  EXPECT_EQ(hetero_step(mg, 0, rng), kNoNode);
  EXPECT_EQ(uniformbias_step(mg, 0, rng), kNoNode);
}

void expect_valid_corpus(const WalkCorpus& c, std::size_t n, const WalkConfig& cfg,
                         const std::function<bool(NodeId, NodeId)>& adjacent) {
  ASSERT_EQ(c.walks.size(), n * cfg.walks_per_node);
  std::vector<std::size_t> starts(n, 0);
  for (const auto& w : c.walks) {
    ASSERT_GE(w.size(), 1u);
    ASSERT_LE(w.size(), cfg.walk_length);
    ++starts[w.front()];
    for (std::size_t i = 1; i < w.size(); ++i) EXPECT_TRUE(adjacent(w[i - 1], w[i]));
  }
  for (std::size_t v = 0; v < n; ++v) EXPECT_EQ(starts[v], cfg.walks_per_node);
}

class CorpusByStrategy : public ::testing::TestWithParam<WalkStrategy> {};

TEST_P(CorpusByStrategy, CountsAdjacencyAndDeterminism) {
  const auto mg = random_multigraph(100, 0.03, 37);
  WalkConfig cfg;
  cfg.strategy = GetParam();
  cfg.p = 0.5;
  cfg.q = 2.0;
  cfg.seed = 99;
  if (walks_multigraph(cfg.strategy)) {
    const auto a = generate_corpus_serial(mg, cfg);
    expect_valid_corpus(a, 100, cfg, [&](NodeId u, NodeId v) {
      for (TypeIndex t = 0; t < mg.num_types(); ++t) {
        if (mg.has_edge(u, v, t)) return true;
      }
      return false;
    });
    EXPECT_EQ(a.walks, generate_corpus_serial(mg, cfg).walks);
    EXPECT_EQ(a.walks, generate_corpus(mg, cfg, 4).walks);
  } else {
    const auto g = split_by_type(mg, 1);
    const auto a = generate_corpus_serial(g, cfg);
    expect_valid_corpus(a, 100, cfg, [&](NodeId u, NodeId v) { return g.has_edge(u, v); });
    EXPECT_EQ(a.walks, generate_corpus_serial(g, cfg).walks);
    EXPECT_EQ(a.walks, generate_corpus(g, cfg, 4).walks);
    cfg.seed = 100;
    EXPECT_NE(a.walks, generate_corpus_serial(g, cfg).walks);
  }
}

INSTANTIATE_TEST_SUITE_P(AllStrategies, CorpusByStrategy,
                         ::testing::Values(WalkStrategy::uniform, WalkStrategy::node2vec, WalkStrategy::hetero,
                                           WalkStrategy::uniformbias),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(Corpus, AllIsolatedGivesSingletons) {
  MultiGraphBuilder b;
  b.add_numbered_nodes(5);
  const auto mg = b.build();
  WalkConfig cfg;
  cfg.strategy = WalkStrategy::hetero;
  for (const auto& w : generate_corpus(mg, cfg, 1).walks) EXPECT_EQ(w.size(), 1u);
}

TEST(Corpus, StrategyMustMatchGraphKind) {
  const auto mg = random_multigraph(10, 0.3, 1);
  WalkConfig cfg;
  cfg.strategy = WalkStrategy::hetero;
  EXPECT_THROW(generate_corpus(split_by_type(mg, 0), cfg, 1), Error);
  cfg.strategy = WalkStrategy::uniform;
  EXPECT_THROW(generate_corpus(mg, cfg, 1), Error);
}

TEST(WalkConfig, Validation) {
  WalkConfig cfg;
  cfg.walk_length = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = WalkConfig{};
  cfg.p = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = WalkConfig{};
  cfg.q = -1.0;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Corpus, FileRoundTripKeepsProvenance) {
  const auto mg = random_multigraph(30, 0.1, 2);
  WalkConfig cfg;
  cfg.strategy = WalkStrategy::uniformbias;
  cfg.seed = 1234;
  auto c = generate_corpus(mg, cfg, 1);
  c.graph_hash = mg.content_hash();
  std::stringstream s;
  write_corpus(s, c, mg.labels());
  EXPECT_EQ(s.str().rfind("# HETEDGE-CORPUS v1", 0), 0u);
  const auto back = read_corpus(s, mg.labels());
  EXPECT_EQ(back.walks, c.walks);
  EXPECT_EQ(back.strategy, c.strategy);
  EXPECT_EQ(back.seed, c.seed);
  EXPECT_EQ(back.graph_hash, c.graph_hash);
  EXPECT_EQ(back.space, c.space);
}

TEST(WalkStrategy, ParseNames) {
  EXPECT_EQ(parse_walk_strategy("deepwalk"), WalkStrategy::uniform);
  EXPECT_EQ(parse_walk_strategy("uniformbias"), WalkStrategy::uniformbias);
  EXPECT_THROW(parse_walk_strategy("metapath"), Error);
}

}  // namespace
}  // namespace hetedge

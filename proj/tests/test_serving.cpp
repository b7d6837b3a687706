#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "hetedge/serving.hpp"
#include "oracles.hpp"

namespace hetedge {
namespace {

EmbeddingTable random_table(std::size_t n, std::size_t d, std::uint64_t seed) {
  EmbeddingTable t("friend", n, d);
  Rng rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (auto& x : t.input) x = nd(rng);
  t.active.assign(n, 1);
  return t;
}

// ------------------------------------------------------------------ NnIndex

TEST(NnIndex, MatchesFullScanOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto t = random_table(100, 16, seed);
    const NnIndex index(t);
    for (NodeId q = 0; q < 100; q += 7) {
      const auto want = testing::scan_neighbors(t, q, 10);
      EXPECT_EQ(index.query(q, 10), want);
      EXPECT_EQ(index.query(q, 10, 2), want);
      EXPECT_EQ(index.query_serial(q, 10), want);
    }
  }
}

TEST(NnIndex, DuplicateVectorRanksFirst) {
  auto t = random_table(30, 8, 3);
  std::copy(t.row(4).begin(), t.row(4).end(), t.row(17).begin());
  const auto r = NnIndex(t).query(4, 3);
  EXPECT_EQ(r[0].node, 17u);
  EXPECT_EQ(r[0].score, 1.0);
}

TEST(NnIndex, LargeKReturnsEveryOtherNode) {
  const auto t = random_table(12, 4, 5);
  const NnIndex index(t);
  for (std::size_t k : {std::size_t{11}, std::size_t{50}}) {
    const auto r = index.query(3, k);
    ASSERT_EQ(r.size(), 11u);
    std::set<NodeId> ids;
    for (const auto& c : r) ids.insert(c.node);
    EXPECT_EQ(ids.size(), 11u);
    EXPECT_FALSE(ids.contains(3));
  }
}

TEST(NnIndex, TiesBrokenByNodeId) {
  EmbeddingTable t("friend", 5, 2);
  for (NodeId v = 0; v < 5; ++v) t.row(v)[0] = 1.0;
  const auto r = NnIndex(t).query(2, 4);
  EXPECT_EQ(r, (std::vector<ScoredCandidate>{{0, 1.0}, {1, 1.0}, {3, 1.0}, {4, 1.0}}));
}

TEST(NnIndex, BadQueriesFail) {
  const NnIndex index(random_table(5, 2, 1));
  EXPECT_THROW(index.query(5, 1), Error);
  EXPECT_THROW(index.query(0, 0), Error);
}

// -------------------------------------------------------------- BloomFilter

TEST(BloomFilter, FreshFilterContainsNothing) {
  const BloomFilter f(1024, 5);
  for (std::uint64_t x = 0; x < 1000; ++x) EXPECT_FALSE(f.contains(x));
}

TEST(BloomFilter, NoFalseNegatives) {
  Rng rng(7);
  BloomFilter f(9585, 7);
  std::vector<std::uint64_t> inserted;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::uint64_t x = rng();
    f.insert(x);
    inserted.push_back(x);
    EXPECT_TRUE(f.contains(inserted[rng() % inserted.size()]));
    EXPECT_TRUE(f.contains(x));
  }
}

TEST(BloomFilter, FalsePositiveRateNearAnalytic) {
  BloomFilter f(9585, 7);
  for (std::uint64_t x = 0; x < 1000; ++x) f.insert(x * 2654435761ULL);
  const double analytic = bloom_false_positive_rate(9585, 7, 1000);
  EXPECT_DOUBLE_EQ(f.expected_false_positive_rate(), analytic);
  std::size_t hits = 0;
  for (std::uint64_t x = 0; x < 10000; ++x) hits += f.contains((x + 1ULL) << 40) ? 1 : 0;
  EXPECT_LE(static_cast<double>(hits) / 10000.0, 2.0 * analytic);
}

TEST(BloomFilter, CapacitySizing) {
  const auto f = BloomFilter::for_capacity(1000);
  EXPECT_EQ(f.bit_count(), 10000u);
  EXPECT_EQ(f.hash_count(), 7u);
  EXPECT_THROW(BloomFilter(0, 3), Error);
}

TEST(BloomFilter, SnapshotRoundTrip) {
  BloomFilter f(777, 4, 11, 22);
  for (std::uint64_t x = 0; x < 50; ++x) f.insert(x * 31);
  std::stringstream s;
  f.write(s);
  EXPECT_EQ(s.str().rfind("HETBLM01", 0), 0u);
  const auto back = BloomFilter::read(s);
  EXPECT_EQ(back, f);
  std::istringstream bad("HETBLM02xxxxxxxx");
  EXPECT_THROW(BloomFilter::read(bad), FormatError);
}

// -------------------------------------------------------------- Recommender

struct RecommendFixture {
  MultiGraph graph;
  EmbeddingTable table;
  FeatureAssembler assembler;
  FusionModel model;

  explicit RecommendFixture(std::size_t n = 40)
      : graph(testing::random_multigraph(n, 0.1, 2)),
        table(random_table(n, 6, 9)),
        assembler({&table}, Combiner::hadamard),
        model(make_model()) {}

  static FusionModel make_model() {
    LogRegModel m(6);
    for (std::size_t i = 0; i < 6; ++i) m.weights[i] = 0.3 * static_cast<double>(i) - 0.7;
    m.bias = 0.1;
    return m;
  }

  TypeIndex friend_type() const { return graph.schema().index_of("friend"); }
};

TEST(Recommender, NeverSelfFriendOrRepeat) {
  RecommendFixture fx;
  RecommenderConfig cfg;
  cfg.candidate_pool = 15;
  Recommender rec(fx.graph, fx.friend_type(), fx.table, fx.assembler, fx.model, cfg);
  for (NodeId u = 0; u < 40; u += 3) {
    std::set<NodeId> returned;
    for (int round = 0; round < 3; ++round) {
      const auto r = rec.recommend(u, 5);
      for (std::size_t i = 0; i < r.size(); ++i) {
        EXPECT_NE(r[i].node, u);
        EXPECT_FALSE(fx.graph.has_edge(u, r[i].node, fx.friend_type()));
        EXPECT_TRUE(returned.insert(r[i].node).second) << "repeated " << r[i].node;
        EXPECT_GT(r[i].probability, 0.0);
        EXPECT_LT(r[i].probability, 1.0);
        if (i > 0) {
          EXPECT_GE(r[i - 1].probability, r[i].probability);
        }
      }
    }
  }
}

TEST(Recommender, ScoresMatchModelOnAssembledFeatures) {
  RecommendFixture fx;
  Recommender rec(fx.graph, fx.friend_type(), fx.table, fx.assembler, fx.model);
  for (const auto& r : rec.recommend(1, 5)) {
    EXPECT_EQ(r.probability, predict(fx.model, fx.assembler.assemble(1, r.node).flatten()));
  }
}

TEST(Recommender, ExhaustedNeighborhoodGivesEmptyList) {
  RecommendFixture fx(12);
  RecommenderConfig cfg;
  cfg.candidate_pool = 4;
  Recommender rec(fx.graph, fx.friend_type(), fx.table, fx.assembler, fx.model, cfg);
  std::size_t total = 0;
  for (int round = 0; round < 10; ++round) total += rec.recommend(0, 2).size();
  EXPECT_LE(total, 4u);
  EXPECT_TRUE(rec.recommend(0, 2).empty());
}

TEST(Recommender, DeterministicForFixedState) {
  RecommendFixture fx;
  Recommender a(fx.graph, fx.friend_type(), fx.table, fx.assembler, fx.model);
  Recommender b(fx.graph, fx.friend_type(), fx.table, fx.assembler, fx.model);
  for (NodeId u = 0; u < 10; ++u) {
    const auto ra = a.recommend(u, 5);
    const auto rb = b.recommend(u, 5);
    ASSERT_EQ(ra.size(), rb.size());
    for (std::size_t i = 0; i < ra.size(); ++i) {
      EXPECT_EQ(ra[i].node, rb[i].node);
      EXPECT_EQ(ra[i].probability, rb[i].probability);
    }
  }
}

TEST(Recommender, UnknownUserFails) {
  RecommendFixture fx;
  Recommender rec(fx.graph, fx.friend_type(), fx.table, fx.assembler, fx.model);
  EXPECT_THROW(rec.recommend(40, 5), Error);
}

}  // namespace
}  // namespace hetedge

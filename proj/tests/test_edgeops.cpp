#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "hetedge/edgeops.hpp"

namespace hetedge {
namespace {

EmbeddingTable random_table(std::string space, std::size_t n, std::size_t d, std::uint64_t seed) {
  EmbeddingTable t(std::move(space), n, d);
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& x : t.input) x = u(rng);
  t.active.assign(n, 1);
  return t;
}

TEST(Combine, ClosedForms) {
  const std::vector<double> u = {1, 2}, v = {3, 4};
  EXPECT_EQ(combine(u, v, Combiner::average).values, (std::vector<double>{2, 3}));
  EXPECT_EQ(combine(u, v, Combiner::hadamard).values, (std::vector<double>{3, 8}));
  EXPECT_EQ(combine(u, v, Combiner::concatenate).values, (std::vector<double>{1, 2, 3, 4}));
}

TEST(Combine, LengthMismatchFails) {
  const std::vector<double> u = {1, 2}, v = {3};
  EXPECT_THROW(combine(u, v, Combiner::average), Error);
}

TEST(Combine, OutputLength) {
  for (auto mode : {Combiner::average, Combiner::hadamard, Combiner::concatenate}) {
    const std::vector<double> u(7, 1.0), v(7, 2.0);
    EXPECT_EQ(combine(u, v, mode).values.size(), combined_length(mode, 7));
  }
  EXPECT_EQ(combined_length(Combiner::concatenate, 128), 256u);
}

TEST(Assemble, ShapeContract) {
  std::vector<EmbeddingTable> tables;
  for (const char* s : {"contact", "friend", "chat"}) tables.push_back(random_table(s, 10, 128, 1));
  const auto f = assemble(tables, 2, 7, Combiner::concatenate);
  ASSERT_EQ(f.blocks.size(), 3u);
  for (const auto& b : f.blocks) {
    EXPECT_EQ(b.values.size(), 256u);
    EXPECT_EQ(b.combiner, Combiner::concatenate);
  }
  EXPECT_EQ(f.blocks[2].space, "chat");
  EXPECT_EQ(f.total_length(), 768u);
}

TEST(Assemble, ZeroFallbackAnnihilatesHadamard) {
  std::vector<EmbeddingTable> tables = {random_table("friend", 5, 4, 2), random_table("chat", 5, 4, 3)};
  tables[1].active[3] = 0;
  const auto f = assemble(tables, 1, 3, Combiner::hadamard);
  for (double x : f.blocks[1].values) EXPECT_EQ(x, 0.0);
  for (double x : f.blocks[0].values) EXPECT_NE(x, 0.0);
}

TEST(Assemble, InitializedFallbackUsesRow) {
  std::vector<EmbeddingTable> tables = {random_table("chat", 5, 4, 3)};
  tables[0].active[3] = 0;
  const auto f = assemble(tables, 1, 3, Combiner::hadamard, Fallback::initialized);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(f.blocks[0].values[i], tables[0].row(1)[i] * tables[0].row(3)[i]);
}

TEST(Assemble, BothIsolatedEverywhereGivesZeros) {
  std::vector<EmbeddingTable> tables = {random_table("friend", 5, 4, 2), random_table("chat", 5, 4, 3)};
  for (auto& t : tables) t.active[0] = t.active[4] = 0;
  for (auto mode : {Combiner::average, Combiner::hadamard, Combiner::concatenate}) {
    for (double x : assemble(tables, 0, 4, mode).flatten()) EXPECT_EQ(x, 0.0);
  }
}

TEST(Assemble, OrderInvariantForEveryMode) {
  std::vector<EmbeddingTable> tables = {random_table("friend", 20, 6, 4), random_table("chat", 20, 6, 5)};
  for (auto mode : {Combiner::average, Combiner::hadamard, Combiner::concatenate}) {
    for (NodeId a = 0; a < 20; ++a) {
      for (NodeId b = 0; b < 20; ++b) EXPECT_EQ(assemble(tables, a, b, mode).flatten(), assemble(tables, b, a, mode).flatten());
    }
  }
}

TEST(Assemble, ConcatenatePutsSmallerIdFirst) {
  std::vector<EmbeddingTable> tables = {random_table("friend", 4, 2, 6)};
  const auto f = assemble(tables, 3, 1, Combiner::concatenate);
  EXPECT_EQ(f.u, 1u);
  EXPECT_EQ(f.v, 3u);
  EXPECT_EQ(f.blocks[0].values[0], tables[0].row(1)[0]);
  EXPECT_EQ(f.blocks[0].values[2], tables[0].row(3)[0]);
}

TEST(Assemble, RejectsMixedDimensionsAndUnknownNodes) {
  std::vector<EmbeddingTable> mixed = {random_table("friend", 4, 2, 1), random_table("chat", 4, 3, 1)};
  EXPECT_THROW(assemble(mixed, 0, 1, Combiner::average), Error);
  std::vector<EmbeddingTable> ok = {random_table("friend", 4, 2, 1)};
  EXPECT_THROW(assemble(ok, 0, 9, Combiner::average), std::out_of_range);
}

TEST(FeatureSet, BuildMatchesAssembleAndRoundTrips) {
  std::vector<EmbeddingTable> tables = {random_table("friend", 30, 5, 7), random_table("chat", 30, 5, 8)};
  const FeatureAssembler fa({&tables[0], &tables[1]}, Combiner::concatenate);
  std::vector<LabeledPair> pairs;
  for (NodeId i = 0; i < 29; ++i) pairs.push_back({i + 1, i, static_cast<int>(i % 2)});
  auto fs = build_features(fa, pairs, 3);
  fs.provenance = 0xabcdef;
  ASSERT_EQ(fs.rows(), pairs.size());
  EXPECT_EQ(fs.width(), 20u);
  EXPECT_EQ(fs.block_offset(1), 10u);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto want = fa.assemble(pairs[i].u, pairs[i].v).flatten();
    const auto row = fs.row(i);
    EXPECT_TRUE(std::equal(row.begin(), row.end(), want.begin(), want.end()));
  }
  EXPECT_EQ(fs.data, build_features(fa, pairs, 1).data);

  std::stringstream s;
  write_features(s, fs);
  EXPECT_EQ(s.str().rfind("HETEDGE-FEAT v1\n", 0), 0u);
  const auto back = read_features(s);
  EXPECT_EQ(back.pairs, fs.pairs);
  EXPECT_EQ(back.data, fs.data);
  EXPECT_EQ(back.spaces, fs.spaces);
  EXPECT_EQ(back.block_sizes, fs.block_sizes);
  EXPECT_EQ(back.combiner, fs.combiner);
  EXPECT_EQ(back.provenance, fs.provenance);
}

TEST(FeatureSet, RejectsWrongHeader) {
  std::istringstream in("HETEDGE-FEAT v9\n");
  EXPECT_THROW(read_features(in), FormatError);
}

TEST(FeatureSet, SubsetKeepsOrder) {
  std::vector<EmbeddingTable> tables = {random_table("friend", 6, 2, 7)};
  const FeatureAssembler fa({&tables[0]}, Combiner::average);
  const std::vector<LabeledPair> pairs = {{0, 1, 1}, {2, 3, 0}, {4, 5, 1}};
  const auto fs = build_features(fa, pairs, 1);
  const std::vector<std::size_t> idx = {2, 0};
  const auto sub = fs.subset(idx);
  EXPECT_EQ(sub.pairs, (std::vector<LabeledPair>{{4, 5, 1}, {0, 1, 1}}));
  EXPECT_EQ(sub.labels(), (std::vector<int>{1, 1}));
}

}  // namespace
}  // namespace hetedge

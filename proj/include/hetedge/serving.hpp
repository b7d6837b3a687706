#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "hetedge/common.hpp"
#include "hetedge/edgeops.hpp"
#include "hetedge/eval.hpp"
#include "hetedge/fusion.hpp"
#include "hetedge/multigraph.hpp"
#include "hetedge/sgns.hpp"

namespace hetedge {

/// Exact cosine nearest-neighbor index over one embedding table. Results are
/// sorted by descending similarity with ties broken by ascending node id.
class NnIndex {
 public:
  NnIndex() = default;
  explicit NnIndex(const EmbeddingTable& table);

  std::size_t size() const noexcept { return num_nodes_; }
  std::size_t dim() const noexcept { return dim_; }

  /// Top-k neighbors of `query`, excluding `query` itself. The scan is
  /// parallel over rows (threads <= 0: OpenMP default).
  std::vector<ScoredCandidate> query(NodeId query, std::size_t k, int threads = 0) const;
  /// Single-threaded reference with identical results.
  std::vector<ScoredCandidate> query_serial(NodeId query, std::size_t k) const;

 private:
  double similarity(NodeId a, NodeId b) const;
  void check_query(NodeId query, std::size_t k) const;

  std::size_t num_nodes_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> rows_;  // snapshot of the table's input matrix
};

/// Bloom filter with k probes from double hashing of two seeded 64-bit hashes.
class BloomFilter {
 public:
  BloomFilter() = default;
  BloomFilter(std::size_t bits, std::size_t hashes, std::uint64_t seed1 = 0x5eed0001ULL,
              std::uint64_t seed2 = 0x5eed0002ULL);

  /// m = bits_per_item * expected_items, k = round(m / n * ln 2).
  static BloomFilter for_capacity(std::size_t expected_items, double bits_per_item = 10.0);

  void insert(std::uint64_t item);
  bool contains(std::uint64_t item) const;

  std::size_t bit_count() const noexcept { return bits_; }
  std::size_t hash_count() const noexcept { return hashes_; }
  std::size_t insert_count() const noexcept { return inserted_; }
  /// (1 - e^{-kn/m})^k at the current insert count.
  double expected_false_positive_rate() const;

  bool operator==(const BloomFilter&) const = default;

  /// Binary snapshot: magic, m, k, seeds, n, bit words.
  void write(std::ostream& out) const;
  static BloomFilter read(std::istream& in);

 private:
  std::uint64_t probe(std::uint64_t item, std::size_t i) const;

  std::size_t bits_ = 0;
  std::size_t hashes_ = 0;
  std::uint64_t seed1_ = 0;
  std::uint64_t seed2_ = 0;
  std::size_t inserted_ = 0;
  std::vector<std::uint64_t> words_;
};

double bloom_false_positive_rate(std::size_t bits, std::size_t hashes, std::size_t items);

struct RecommenderConfig {
  std::size_t candidate_pool = 100;
  std::size_t bloom_capacity = 1000;  // expected recommendations per user
  double bloom_bits_per_item = 10.0;
  int threads = 1;
};

struct Recommendation {
  NodeId node = 0;
  double probability = 0.0;
};

/// Candidate retrieval by embedding similarity, friend and seen filtering,
/// model re-ranking. Borrowed graph, assembler and model must outlive it.
/// Calls for one user mutate that user's filter; serialize them per user.
class Recommender {
 public:
  Recommender(const MultiGraph& graph, TypeIndex friend_type, const EmbeddingTable& index_table,
              const FeatureAssembler& assembler, const FusionModel& model, RecommenderConfig cfg = {});

  /// Top-k by predicted probability (ties by node id). The results are
  /// recorded in the user's bloom filter so later calls skip them.
  std::vector<Recommendation> recommend(NodeId user, std::size_t k);

  const NnIndex& index() const noexcept { return index_; }
  BloomFilter& seen(NodeId user);
  const std::map<NodeId, BloomFilter>& filters() const noexcept { return seen_; }

 private:
  const MultiGraph& graph_;
  TypeIndex friend_type_;
  NnIndex index_;
  const FeatureAssembler& assembler_;
  const FusionModel& model_;
  RecommenderConfig cfg_;
  std::map<NodeId, BloomFilter> seen_;
};

}  // namespace hetedge

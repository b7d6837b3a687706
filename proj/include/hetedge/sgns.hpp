#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hetedge/common.hpp"
#include "hetedge/multigraph.hpp"
#include "hetedge/walks.hpp"

namespace hetedge {

struct SgnsConfig {
  std::size_t dim = 128;
  std::size_t window = 10;
  std::size_t negatives = 5;
  double learning_rate = 0.01;
  std::size_t epochs = 5;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Unigram^0.75 noise distribution over node ids, sampled by binary search
/// on the cumulative table.
class NoiseDistribution {
 public:
  static constexpr double kPower = 0.75;

  explicit NoiseDistribution(const WalkCorpus& corpus);
  explicit NoiseDistribution(std::span<const std::uint64_t> counts);

  std::size_t size() const noexcept { return prob_.size(); }
  double probability(NodeId v) const { return prob_.at(v); }
  NodeId sample(Rng& rng) const;

 private:
  std::vector<double> prob_;
  std::vector<double> cdf_;
};

/// Per-space node vectors. `input` holds the published embedding, `context`
/// the output vectors used only during training. `active` marks nodes that
/// took part in at least one training pair (or, for loaded tables, nodes
/// the caller flags as present in the space).
struct EmbeddingTable {
  std::string space;
  std::size_t num_nodes = 0;
  std::size_t dim = 0;
  std::vector<double> input;
  std::vector<double> context;
  std::vector<std::uint8_t> active;

  EmbeddingTable() = default;
  EmbeddingTable(std::string space, std::size_t num_nodes, std::size_t dim);

  std::span<const double> row(NodeId v) const { return {input.data() + v * dim, dim}; }
  std::span<double> row(NodeId v) { return {input.data() + v * dim, dim}; }
  std::span<const double> context_row(NodeId v) const { return {context.data() + v * dim, dim}; }
  std::span<double> context_row(NodeId v) { return {context.data() + v * dim, dim}; }
  bool is_active(NodeId v) const { return active.at(v) != 0; }
};

// Single-pair objective:
//   -log sigma(center . positive) - sum_k log sigma(-center . negative_k)
double sgns_pair_loss(std::span<const double> center, std::span<const double> positive,
                      std::span<const std::span<const double>> negatives);

struct SgnsPairGradient {
  std::vector<double> center;
  std::vector<double> positive;
  std::vector<std::vector<double>> negatives;
};

SgnsPairGradient sgns_pair_gradient(std::span<const double> center, std::span<const double> positive,
                                    std::span<const std::span<const double>> negatives);

/// Mean pair loss over consecutive blocks of `block_pairs` training pairs.
struct SgnsTrace {
  std::size_t block_pairs = 10000;
  std::vector<double> block_loss;
  std::vector<std::size_t> epoch_first_block;  // index into block_loss
};

/// Trains one table from a corpus. threads == 1 is the deterministic serial
/// reference; threads != 1 runs lock-free parallel SGD whose result varies
/// run to run (threads <= 0 uses the OpenMP default).
EmbeddingTable train_sgns(const WalkCorpus& corpus, const SgnsConfig& cfg, int threads = 1,
                          SgnsTrace* trace = nullptr);

struct CosineResult {
  double value = 0.0;
  bool zero_vector = false;  // set when either row is all zeros; value is then 0
};

CosineResult cosine(std::span<const double> a, std::span<const double> b);
CosineResult cosine(const EmbeddingTable& table, NodeId a, NodeId b);

/// word2vec text format: `N d` then `label v1 ... vd` per node.
void write_embeddings(std::ostream& out, const EmbeddingTable& table, const LabelMap& labels);
/// Rows must cover every label in `labels`. All rows are marked active.
EmbeddingTable read_embeddings(std::istream& in, const LabelMap& labels, std::string space);

}  // namespace hetedge

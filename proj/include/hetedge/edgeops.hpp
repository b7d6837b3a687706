#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hetedge/common.hpp"
#include "hetedge/sgns.hpp"

namespace hetedge {

enum class Combiner { average, hadamard, concatenate };

std::string_view to_string(Combiner c) noexcept;
Combiner parse_combiner(std::string_view name);
constexpr std::size_t combined_length(Combiner c, std::size_t dim) noexcept {
  return c == Combiner::concatenate ? 2 * dim : dim;
}

/// What an untrained node (absent from a space) contributes to edge vectors.
enum class Fallback { zero, initialized };

std::string_view to_string(Fallback f) noexcept;
Fallback parse_fallback(std::string_view name);

struct EdgeVector {
  std::vector<double> values;
  Combiner combiner = Combiner::average;
  std::string space;
};

/// Average, Hadamard product, or concatenation [u || v] in the given order.
EdgeVector combine(std::span<const double> u, std::span<const double> v, Combiner mode);

/// One edge vector per embedding space, in table order, for a pair stored
/// with the smaller node id first.
struct HeteroEdgeFeatures {
  NodeId u = 0;
  NodeId v = 0;
  Combiner combiner = Combiner::average;
  std::vector<EdgeVector> blocks;

  std::size_t total_length() const;
  std::vector<double> flatten() const;
};

/// Read-only view of the per-space tables used to build pair features.
/// All tables must share one node count and one dimension.
class FeatureAssembler {
 public:
  FeatureAssembler(std::vector<const EmbeddingTable*> tables, Combiner mode, Fallback fallback = Fallback::zero);

  std::size_t num_spaces() const noexcept { return tables_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t num_nodes() const noexcept { return num_nodes_; }
  Combiner combiner() const noexcept { return mode_; }
  std::size_t block_length() const noexcept { return combined_length(mode_, dim_); }
  std::vector<std::size_t> block_sizes() const;
  std::vector<std::string> space_names() const;

  HeteroEdgeFeatures assemble(NodeId a, NodeId b) const;
  /// Flattened features written into `out` (length num_spaces * block_length).
  void assemble_into(NodeId a, NodeId b, std::span<double> out) const;

 private:
  std::span<const double> node_row(std::size_t space, NodeId v) const;

  std::vector<const EmbeddingTable*> tables_;
  Combiner mode_;
  Fallback fallback_;
  std::size_t dim_ = 0;
  std::size_t num_nodes_ = 0;
  std::vector<double> zeros_;
};

/// Convenience wrapper over FeatureAssembler for a single pair.
HeteroEdgeFeatures assemble(std::span<const EmbeddingTable> tables, NodeId a, NodeId b, Combiner mode,
                            Fallback fallback = Fallback::zero);

struct LabeledPair {
  NodeId u = 0;
  NodeId v = 0;
  int label = 0;

  bool operator==(const LabeledPair&) const = default;
};

/// Dense row-major pair features plus labels. Row i holds the flattened
/// blocks for pairs[i]; block t spans [offset(t), offset(t) + block_sizes[t]).
struct FeatureSet {
  std::vector<std::string> spaces;
  std::vector<std::size_t> block_sizes;
  Combiner combiner = Combiner::average;
  std::vector<LabeledPair> pairs;
  std::vector<double> data;
  std::uint64_t provenance = 0;  // hash of the upstream graph/embeddings

  std::size_t rows() const noexcept { return pairs.size(); }
  std::size_t width() const;
  std::size_t block_offset(std::size_t t) const;
  std::span<const double> row(std::size_t i) const { return {data.data() + i * width(), width()}; }
  std::span<double> row(std::size_t i) { return {data.data() + i * width(), width()}; }
  std::span<const double> block(std::size_t i, std::size_t t) const {
    return row(i).subspan(block_offset(t), block_sizes[t]);
  }
  std::vector<int> labels() const;
  /// Rows at `indices`, in that order.
  FeatureSet subset(std::span<const std::size_t> indices) const;
};

/// Builds features for every pair; parallel over pairs (threads <= 0: OpenMP default).
FeatureSet build_features(const FeatureAssembler& assembler, std::span<const LabeledPair> pairs, int threads = 0);

/// Binary dump with header line `HETEDGE-FEAT v1`.
void write_features(std::ostream& out, const FeatureSet& fs);
FeatureSet read_features(std::istream& in);

}  // namespace hetedge

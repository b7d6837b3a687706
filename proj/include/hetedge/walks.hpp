#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hetedge/common.hpp"
#include "hetedge/multigraph.hpp"

namespace hetedge {

enum class WalkStrategy { uniform, node2vec, hetero, uniformbias };

std::string_view to_string(WalkStrategy s) noexcept;
WalkStrategy parse_walk_strategy(std::string_view name);
/// hetero and uniformbias walk the whole multi-graph; the others walk one split.
constexpr bool walks_multigraph(WalkStrategy s) noexcept {
  return s == WalkStrategy::hetero || s == WalkStrategy::uniformbias;
}

struct WalkConfig {
  std::size_t walks_per_node = 10;
  std::size_t walk_length = 30;
  WalkStrategy strategy = WalkStrategy::uniform;
  double p = 1.0;  // return parameter
  double q = 1.0;  // in-out parameter
  std::uint64_t seed = 1;

  void validate() const;
};

using Walk = std::vector<NodeId>;

struct WalkCorpus {
  std::vector<Walk> walks;
  WalkStrategy strategy = WalkStrategy::uniform;
  std::uint64_t seed = 0;
  std::uint64_t graph_hash = 0;
  std::size_t num_nodes = 0;
  std::string space;  // edge type walked, or "multi"

  std::size_t token_count() const;
};

inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();
inline constexpr std::string_view kMultiSpace = "multi";

// Single transitions. Each returns kNoNode at a dead end.
NodeId uniform_step(const HomogeneousGraph& g, NodeId cur, Rng& rng);
/// Second-order step from `cur` having arrived from `prev`: candidate x gets
/// weight 1/p if x == prev, 1 if x is adjacent to prev, 1/q otherwise.
NodeId node2vec_step(const HomogeneousGraph& g, NodeId prev, NodeId cur, double p, double q, Rng& rng);
/// Uniform over incident multi-edges: a neighbor joined by m types has weight m.
NodeId hetero_step(const MultiGraph& g, NodeId cur, Rng& rng);
/// Uniform over the edge types present at `cur`, then uniform within that type.
NodeId uniformbias_step(const MultiGraph& g, NodeId cur, Rng& rng);

Walk uniform_walk(const HomogeneousGraph& g, NodeId start, std::size_t length, Rng& rng);
Walk node2vec_walk(const HomogeneousGraph& g, NodeId start, std::size_t length, double p, double q, Rng& rng);
Walk hetero_walk(const MultiGraph& g, NodeId start, std::size_t length, Rng& rng);
Walk uniformbias_walk(const MultiGraph& g, NodeId start, std::size_t length, Rng& rng);

/// walks_per_node walks from every node. Walk (node, i) draws from its own
/// stream derived from cfg.seed, so the result does not depend on `threads`.
/// threads <= 0 uses the OpenMP default.
WalkCorpus generate_corpus(const HomogeneousGraph& g, const WalkConfig& cfg, int threads = 0);
WalkCorpus generate_corpus(const MultiGraph& g, const WalkConfig& cfg, int threads = 0);

/// Serial reference used by tests and benchmarks.
WalkCorpus generate_corpus_serial(const HomogeneousGraph& g, const WalkConfig& cfg);
WalkCorpus generate_corpus_serial(const MultiGraph& g, const WalkConfig& cfg);

/// One walk per line (space-separated labels) after a `# HETEDGE-CORPUS v1` header.
void write_corpus(std::ostream& out, const WalkCorpus& corpus, const LabelMap& labels);
WalkCorpus read_corpus(std::istream& in, const LabelMap& labels);

}  // namespace hetedge

#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hetedge/common.hpp"

namespace hetedge {

/// Ordered edge-type enumeration. The order fixes feature layout downstream,
/// so it must not change during a pipeline run.
class EdgeSchema {
 public:
  EdgeSchema();  // contact, friend, chat; closed
  EdgeSchema(std::vector<std::string> names, bool closed);

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(TypeIndex t) const { return names_.at(t); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  bool closed() const noexcept { return closed_; }

  std::optional<TypeIndex> find(std::string_view name) const;
  TypeIndex index_of(std::string_view name) const;  // throws on undeclared
  /// Returns the index of `name`, appending it when the schema is open.
  TypeIndex intern(std::string_view name);

  bool operator==(const EdgeSchema&) const = default;

 private:
  std::vector<std::string> names_;
  bool closed_ = true;
};

/// Bijection between external string labels and dense ids 0..N-1.
class LabelMap {
 public:
  NodeId intern(std::string_view label);
  std::optional<NodeId> find(std::string_view label) const;
  NodeId id(std::string_view label) const;  // throws on unknown label
  const std::string& label(NodeId id) const { return labels_.at(id); }
  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  bool operator==(const LabelMap& o) const { return labels_ == o.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, NodeId> index_;
};

/// Compressed adjacency for one edge type. Neighbor lists are sorted,
/// duplicate-free and symmetric.
struct Csr {
  std::vector<std::size_t> offsets;  // size N+1
  std::vector<NodeId> neighbors;     // size 2 * edge count

  std::span<const NodeId> adj(NodeId u) const {
    return {neighbors.data() + offsets[u], offsets[u + 1] - offsets[u]};
  }
  std::size_t degree(NodeId u) const { return offsets[u + 1] - offsets[u]; }
  std::size_t edge_count() const noexcept { return neighbors.size() / 2; }
  bool has_edge(NodeId u, NodeId v) const;

  bool operator==(const Csr&) const = default;
};

class HomogeneousGraph {
 public:
  HomogeneousGraph() = default;
  HomogeneousGraph(std::size_t num_nodes, std::string type_name, Csr adj)
      : num_nodes_(num_nodes), type_name_(std::move(type_name)), adj_(std::move(adj)) {}

  std::size_t num_nodes() const noexcept { return num_nodes_; }
  const std::string& type_name() const noexcept { return type_name_; }
  std::span<const NodeId> adj(NodeId u) const { return adj_.adj(u); }
  std::size_t degree(NodeId u) const { return adj_.degree(u); }
  bool has_edge(NodeId u, NodeId v) const { return adj_.has_edge(u, v); }
  std::size_t edge_count() const noexcept { return adj_.edge_count(); }
  const Csr& csr() const noexcept { return adj_; }

 private:
  std::size_t num_nodes_ = 0;
  std::string type_name_;
  Csr adj_;
};

/// Undirected typed multi-graph. Immutable once built; parallel edges exist
/// only across types.
class MultiGraph {
 public:
  MultiGraph();  // empty graph over the default schema
  MultiGraph(EdgeSchema schema, LabelMap labels, std::vector<Csr> per_type);

  std::size_t num_nodes() const noexcept { return labels_.size(); }
  std::size_t num_types() const noexcept { return schema_.size(); }
  const EdgeSchema& schema() const noexcept { return schema_; }
  const LabelMap& labels() const noexcept { return labels_; }

  std::span<const NodeId> adj(NodeId u, TypeIndex t) const;
  /// Per-type neighbor count, or the multi-edge total when `t` is empty.
  std::size_t degree(NodeId u, std::optional<TypeIndex> t = std::nullopt) const;
  std::size_t edge_count(TypeIndex t) const { return per_type_.at(t).edge_count(); }
  std::size_t total_edge_count() const;
  bool has_edge(NodeId u, NodeId v, TypeIndex t) const;
  const Csr& csr(TypeIndex t) const { return per_type_.at(t); }

  /// Provenance hash over schema, labels and adjacency.
  std::uint64_t content_hash() const;

  bool operator==(const MultiGraph& o) const {
    return schema_ == o.schema_ && labels_ == o.labels_ && per_type_ == o.per_type_;
  }

 private:
  void check_node(NodeId u) const;

  EdgeSchema schema_;
  LabelMap labels_;
  std::vector<Csr> per_type_;
};

/// Accumulates typed edges and produces a MultiGraph. Self-loops are rejected
/// and repeated (u, v, type) triples collapse to one edge.
class MultiGraphBuilder {
 public:
  explicit MultiGraphBuilder(EdgeSchema schema = EdgeSchema());

  NodeId add_node(std::string_view label) { return labels_.intern(label); }
  /// Returns false for a self-loop (nothing added).
  bool add_edge(std::string_view src, std::string_view dst, std::string_view type);
  bool add_edge(NodeId u, NodeId v, TypeIndex t);
  /// Adds nodes named "0".."n-1"; convenient for fixtures and generators.
  void add_numbered_nodes(std::size_t n);

  const LabelMap& labels() const noexcept { return labels_; }
  const EdgeSchema& schema() const noexcept { return schema_; }
  MultiGraph build() const;

 private:
  EdgeSchema schema_;
  LabelMap labels_;
  std::vector<std::vector<std::pair<NodeId, NodeId>>> edges_;  // per type
};

struct RejectedLine {
  std::size_t line;
  std::string reason;
};

struct LoadResult {
  MultiGraph graph;
  std::vector<RejectedLine> rejected;
};

/// Parses `src<TAB>dst<TAB>type` lines; '#' lines and blank lines are ignored.
LoadResult load_edge_list(std::istream& in, EdgeSchema schema = EdgeSchema());
LoadResult load_edge_list_file(const std::string& path, EdgeSchema schema = EdgeSchema());

HomogeneousGraph split_by_type(const MultiGraph& g, TypeIndex t);
HomogeneousGraph split_by_type(const MultiGraph& g, std::string_view type_name);

/// Snapshot container, header `HETEDGE-GRAPH v1`.
void write_graph(std::ostream& out, const MultiGraph& g);
MultiGraph read_graph(std::istream& in);

}  // namespace hetedge

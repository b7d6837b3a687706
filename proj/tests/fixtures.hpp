#pragma once

#include <initializer_list>
#include <random>
#include <sstream>
#include <string>
#include <tuple>

#include "hetedge/multigraph.hpp"

namespace hetedge::testing {

using Triple = std::tuple<const char*, const char*, const char*>;

inline MultiGraph graph_of(std::initializer_list<Triple> edges, EdgeSchema schema = EdgeSchema()) {
  MultiGraphBuilder b(std::move(schema));
  for (const auto& [s, d, t] : edges) b.add_edge(s, d, t);
  return b.build();
}

/// Nodes 0..n-1 labelled "0".."n-1", each unordered pair carrying each type
/// independently with probability `density`.
inline MultiGraph random_multigraph(std::size_t n, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(density);
  MultiGraphBuilder b;
  b.add_numbered_nodes(n);
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      for (TypeIndex t = 0; t < 3; ++t) {
        if (coin(rng)) b.add_edge(u, v, t);
      }
    }
  }
  return b.build();
}

/// Two K5s {0..4} and {5..9} joined by the bridge 4-5, single "friend" type.
inline MultiGraph two_cliques() {
  MultiGraphBuilder b;
  b.add_numbered_nodes(10);
  const TypeIndex f = b.schema().index_of("friend");
  for (NodeId base : {0u, 5u}) {
    for (NodeId i = 0; i < 5; ++i) {
      for (NodeId j = i + 1; j < 5; ++j) b.add_edge(base + i, base + j, f);
    }
  }
  b.add_edge(4, 5, f);
  return b.build();
}

}  // namespace hetedge::testing

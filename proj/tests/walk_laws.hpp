#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "hetedge/walks.hpp"

namespace hetedge::testing {

constexpr std::size_t kSamples = 100000;
constexpr double kTol = 0.02;

using Law = std::map<NodeId, double>;

inline Law empirical(const std::function<NodeId(Rng&)>& step, std::uint64_t seed = 42) {
  Rng rng(seed);
  Law f;
  for (std::size_t i = 0; i < kSamples; ++i) f[step(rng)] += 1.0 / kSamples;
  return f;
}

// Analytic laws computed straight from adjacency.

inline Law uniform_law(const HomogeneousGraph& g, NodeId cur) {
  Law l;
  for (NodeId x : g.adj(cur)) l[x] += 1.0 / static_cast<double>(g.degree(cur));
  return l;
}

inline Law node2vec_law(const HomogeneousGraph& g, NodeId prev, NodeId cur, double p, double q) {
  Law w;
  double z = 0.0;
  for (NodeId x : g.adj(cur)) {
    const double wx = x == prev ? 1.0 / p : (g.has_edge(x, prev) ? 1.0 : 1.0 / q);
    w[x] = wx;
    z += wx;
  }
  for (auto& [x, v] : w) v /= z;
  return w;
}

inline Law hetero_law(const MultiGraph& g, NodeId cur) {
  Law l;
  const double deg = static_cast<double>(g.degree(cur));
  for (TypeIndex t = 0; t < g.num_types(); ++t) {
    for (NodeId x : g.adj(cur, t)) l[x] += 1.0 / deg;
  }
  return l;
}

inline Law uniformbias_law(const MultiGraph& g, NodeId cur) {
  std::size_t present = 0;
  for (TypeIndex t = 0; t < g.num_types(); ++t) present += g.degree(cur, t) > 0 ? 1 : 0;
  Law l;
  for (TypeIndex t = 0; t < g.num_types(); ++t) {
    const auto d = static_cast<double>(g.degree(cur, t));
    for (NodeId x : g.adj(cur, t)) l[x] += 1.0 / static_cast<double>(present) / d;
  }
  return l;
}

/// Node with the largest total degree, so laws have many outcomes.
inline NodeId busiest(const MultiGraph& g) {
  NodeId best = 0;
  for (NodeId v = 1; v < g.num_nodes(); ++v) {
    if (g.degree(v) > g.degree(best)) best = v;
  }
  return best;
}

/// Largest absolute frequency gap over the union of outcomes.
inline double max_deviation(const Law& got, const Law& want) {
  double worst = 0.0;
  for (const auto& [v, p] : want) worst = std::max(worst, std::abs((got.count(v) ? got.at(v) : 0.0) - p));
  for (const auto& [v, p] : got) worst = std::max(worst, std::abs((want.count(v) ? want.at(v) : 0.0) - p));
  return worst;
}

}  // namespace hetedge::testing

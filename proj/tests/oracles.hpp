#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "hetedge/eval.hpp"
#include "hetedge/sgns.hpp"

namespace hetedge::testing {

/// O(n^2) Mann-Whitney: share of (positive, negative) pairs ordered
/// correctly, ties worth one half.
inline double pairwise_auc(std::span<const double> scores, std::span<const int> labels) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 0) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

/// Full scan: cosine to every other row, sorted by similarity then id.
inline std::vector<ScoredCandidate> scan_neighbors(const EmbeddingTable& t, NodeId q, std::size_t k) {
  auto norm = [&](NodeId a) {
    double s = 0.0;
    for (double x : t.row(a)) s += x * x;
    return std::sqrt(s);
  };
  std::vector<ScoredCandidate> all;
  const double nq = norm(q);
  for (NodeId v = 0; v < t.num_nodes; ++v) {
    if (v == q) continue;
    const double nv = norm(v);
    double dot = 0.0;
    for (std::size_t i = 0; i < t.dim; ++i) dot += t.row(q)[i] * t.row(v)[i];
    all.push_back({v, nq == 0.0 || nv == 0.0 ? 0.0 : std::clamp(dot / (nq * nv), -1.0, 1.0)});
  }
  std::sort(all.begin(), all.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
    return a.score != b.score ? a.score > b.score : a.node < b.node;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

}  // namespace hetedge::testing

#include "hetedge/eval.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace hetedge {

std::vector<LabeledPair> TemporalSplit::labeled() const {
  std::vector<LabeledPair> out;
  out.reserve(positives.size() + negatives.size());
  for (const auto& [u, v] : positives) out.push_back({u, v, 1});
  for (const auto& [u, v] : negatives) out.push_back({u, v, 0});
  return out;
}

namespace {
std::uint64_t pair_key(NodeId a, NodeId b) {
  const NodeId u = std::min(a, b);
  const NodeId v = std::max(a, b);
  return (static_cast<std::uint64_t>(u) << 32) | v;
}
}  // namespace

TemporalSplit temporal_split(const MultiGraph& pre_graph, TypeIndex friend_type, std::span<const NodePair> post_edges,
                             std::size_t neg_count, Rng& rng) {
  const std::size_t n = pre_graph.num_nodes();
  if (friend_type >= pre_graph.num_types()) throw Error("temporal_split: undeclared friend type");

  TemporalSplit split;
  std::unordered_set<std::uint64_t> positive_keys;
  for (const auto& [a, b] : post_edges) {
    if (a >= n || b >= n) throw std::out_of_range("temporal_split: post edge references unknown node");
    if (a == b) throw Error("temporal_split: self-loop in post-period edges");
    if (pre_graph.has_edge(a, b, friend_type)) {
      throw Error("temporal_split: post-period edge " + pre_graph.labels().label(a) + "-" +
                  pre_graph.labels().label(b) + " is already a pre-period friend edge");
    }
    if (positive_keys.insert(pair_key(a, b)).second) split.positives.emplace_back(std::min(a, b), std::max(a, b));
  }

  const std::size_t all_pairs = n < 2 ? 0 : n * (n - 1) / 2;
  const std::size_t blocked = pre_graph.edge_count(friend_type) + split.positives.size();
  const std::size_t available = all_pairs - blocked;
  if (neg_count > available) {
    throw Error("temporal_split: requested " + std::to_string(neg_count) + " negatives but only " +
                std::to_string(available) + " non-friend pairs exist");
  }

  auto eligible = [&](NodeId u, NodeId v) {
    return u != v && !pre_graph.has_edge(u, v, friend_type) && !positive_keys.contains(pair_key(u, v));
  };

  if (neg_count * 2 > available) {
    // Dense regime: enumerate and take a uniform subset.
    std::vector<NodePair> pool;
    pool.reserve(available);
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = u + 1; v < n; ++v) {
        if (eligible(u, v)) pool.emplace_back(u, v);
      }
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(neg_count);
    split.negatives = std::move(pool);
    return split;
  }

  std::unordered_set<std::uint64_t> drawn;
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
  while (split.negatives.size() < neg_count) {
    const NodeId a = pick(rng);
    const NodeId b = pick(rng);
    if (!eligible(a, b)) continue;
    if (!drawn.insert(pair_key(a, b)).second) continue;
    split.negatives.emplace_back(std::min(a, b), std::max(a, b));
  }
  return split;
}

std::pair<std::vector<LabeledPair>, std::vector<LabeledPair>> split_train_test(std::vector<LabeledPair> pairs,
                                                                              double test_fraction, Rng& rng) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) throw Error("split_train_test: fraction must be in [0, 1)");
  std::vector<LabeledPair> train, test;
  for (int cls : {1, 0}) {
    std::vector<LabeledPair> group;
    for (const auto& p : pairs) {
      if ((p.label != 0) == (cls != 0)) group.push_back(p);
    }
    std::shuffle(group.begin(), group.end(), rng);
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(group.size())));
    test.insert(test.end(), group.begin(), group.begin() + static_cast<std::ptrdiff_t>(n_test));
    train.insert(train.end(), group.begin() + static_cast<std::ptrdiff_t>(n_test), group.end());
  }
  std::shuffle(train.begin(), train.end(), rng);
  std::shuffle(test.begin(), test.end(), rng);
  return {std::move(train), std::move(test)};
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw Error("auc: scores and labels differ in length");
  std::size_t n_pos = 0;
  for (int l : labels) n_pos += l != 0 ? 1 : 0;
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw Error("auc: requires both positive and negative labels (got " + std::to_string(n_pos) + " positive, " +
                std::to_string(n_neg) + " negative)");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Mid-ranks (1-based) summed over positives.
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] != 0) rank_sum += mid;
    }
    i = j + 1;
  }
  const double np = static_cast<double>(n_pos);
  const double nn = static_cast<double>(n_neg);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

void sort_candidates(std::vector<ScoredCandidate>& c) {
  std::sort(c.begin(), c.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.node < b.node;
  });
}

double precision_at_k(std::span<const UserRanking> ranked, const TruthSets& truth, std::size_t k) {
  if (ranked.empty()) throw Error("precision_at_k: empty user set");
  if (k == 0) throw Error("precision_at_k: k must be >= 1");
  double total = 0.0;
  for (const auto& r : ranked) {
    const std::size_t top = std::min(k, r.candidates.size());
    if (top == 0) continue;
    auto it = truth.find(r.user);
    std::size_t hits = 0;
    if (it != truth.end()) {
      for (std::size_t i = 0; i < top; ++i) hits += it->second.contains(r.candidates[i].node) ? 1 : 0;
    }
    total += static_cast<double>(hits) / static_cast<double>(top);
  }
  return total / static_cast<double>(ranked.size());
}

std::vector<UserRanking> rank_pairs_by_user(std::span<const LabeledPair> pairs, std::span<const double> scores,
                                            TruthSets* truth_out) {
  if (pairs.size() != scores.size()) throw Error("rank_pairs_by_user: pairs and scores differ in length");
  std::map<NodeId, std::vector<ScoredCandidate>> lists;
  TruthSets truth;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    lists[p.u].push_back({p.v, scores[i]});
    lists[p.v].push_back({p.u, scores[i]});
    if (p.label != 0) {
      truth[p.u].insert(p.v);
      truth[p.v].insert(p.u);
    }
  }
  std::vector<UserRanking> out;
  for (auto& [user, cands] : lists) {
    if (!truth.contains(user)) continue;
    sort_candidates(cands);
    out.push_back({user, std::move(cands)});
  }
  if (truth_out) *truth_out = std::move(truth);
  return out;
}

// ---------------------------------------------------------------------- I/O

void write_predictions(std::ostream& out, std::span<const Prediction> preds) {
  for (const auto& p : preds) out << p.u << ' ' << p.v << ' ' << p.label << ' ' << format_double(p.score) << '\n';
}

std::vector<Prediction> read_predictions(std::istream& in) {
  std::vector<Prediction> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    std::istringstream is(line);
    Prediction p;
    std::string score;
    if (!(is >> p.u >> p.v >> p.label >> score)) throw ParseError(lineno, "predictions: expected 'u v label score'");
    if (p.label != 0 && p.label != 1) throw ParseError(lineno, "predictions: label must be 0 or 1");
    auto [end, ec] = std::from_chars(score.data(), score.data() + score.size(), p.score);
    if (ec != std::errc{} || end != score.data() + score.size()) throw ParseError(lineno, "predictions: bad score");
    out.push_back(std::move(p));
  }
  return out;
}

void write_metrics(std::ostream& out, const MetricsReport& report) {
  for (const auto& [k, v] : report) out << k << " = " << v << '\n';
}

MetricsReport read_metrics(std::istream& in) {
  MetricsReport r;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    r[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return r;
}

}  // namespace hetedge

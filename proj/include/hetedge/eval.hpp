#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "hetedge/common.hpp"
#include "hetedge/edgeops.hpp"
#include "hetedge/multigraph.hpp"

namespace hetedge {

using NodePair = std::pair<NodeId, NodeId>;

/// Pairs for a temporal evaluation: positives are friend edges formed after
/// the embedding snapshot, negatives are sampled pairs that are not friends
/// in either period. Both lists hold pairs as (smaller id, larger id).
struct TemporalSplit {
  std::vector<NodePair> positives;
  std::vector<NodePair> negatives;

  std::vector<LabeledPair> labeled() const;
};

/// Negatives exclude friend-type edges only; contact or chat pairs are
/// eligible. Throws if `post_edges` overlaps the pre-period friend edges or
/// if fewer than `neg_count` eligible pairs exist.
TemporalSplit temporal_split(const MultiGraph& pre_graph, TypeIndex friend_type,
                             std::span<const NodePair> post_edges, std::size_t neg_count, Rng& rng);

/// Stratified split: `test_fraction` of each class goes to the second list.
std::pair<std::vector<LabeledPair>, std::vector<LabeledPair>> split_train_test(std::vector<LabeledPair> pairs,
                                                                              double test_fraction, Rng& rng);

/// Area under the ROC curve by rank summation (ties get half credit).
/// Throws if either class is missing.
double auc(std::span<const double> scores, std::span<const int> labels);

struct ScoredCandidate {
  NodeId node = 0;
  double score = 0.0;

  bool operator==(const ScoredCandidate&) const = default;
};

/// One user's candidates, sorted by descending score.
struct UserRanking {
  NodeId user = 0;
  std::vector<ScoredCandidate> candidates;
};

using TruthSets = std::unordered_map<NodeId, std::unordered_set<NodeId>>;

/// Mean over users of hits in the top min(k, list length) divided by that
/// count. A user with an empty list scores 0. Throws on an empty user set.
double precision_at_k(std::span<const UserRanking> ranked, const TruthSets& truth, std::size_t k = 5);

/// Sorts by descending score, ties by ascending node id.
void sort_candidates(std::vector<ScoredCandidate>& c);

/// Offline rankings from scored test pairs: each pair enters both endpoints'
/// lists. Only users with at least one positive pair are kept.
std::vector<UserRanking> rank_pairs_by_user(std::span<const LabeledPair> pairs, std::span<const double> scores,
                                            TruthSets* truth_out = nullptr);

struct Prediction {
  std::string u;
  std::string v;
  int label = 0;
  double score = 0.0;
};

/// `u v label score` per line.
void write_predictions(std::ostream& out, std::span<const Prediction> preds);
std::vector<Prediction> read_predictions(std::istream& in);

/// Ordered `key = value` lines.
using MetricsReport = std::map<std::string, std::string>;
void write_metrics(std::ostream& out, const MetricsReport& report);
MetricsReport read_metrics(std::istream& in);

}  // namespace hetedge

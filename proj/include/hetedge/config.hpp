#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hetedge/edgeops.hpp"
#include "hetedge/fusion.hpp"
#include "hetedge/multigraph.hpp"
#include "hetedge/sgns.hpp"
#include "hetedge/walks.hpp"

namespace hetedge {

enum class ModelKind { logreg, mtn };

std::string_view to_string(ModelKind m) noexcept;
ModelKind parse_model_kind(std::string_view name);

/// Everything a pipeline run needs. Stage seeds are derived from `seed`.
struct PipelineConfig {
  // schema
  EdgeSchema schema;
  std::string friend_type = "friend";

  // paths
  std::string edges_path;
  std::string post_edges_path;
  std::string workdir = ".";

  WalkConfig walk;
  /// Edge types to embed for split strategies; empty means every type.
  std::vector<std::string> spaces;
  SgnsConfig sgns;

  Combiner combiner = Combiner::concatenate;
  Fallback fallback = Fallback::zero;

  ModelKind model = ModelKind::mtn;
  TrainConfig train;
  std::size_t hidden = MultiTowerNet::kHidden;

  double negative_ratio = 1.0;  // negatives per positive
  double test_fraction = 0.3;

  std::size_t rec_k = 5;
  std::size_t rec_pool = 100;
  std::size_t rec_users = 0;  // 0: every user with a held-out positive
  std::string index_space;    // empty: friend space, or "multi" for multi-graph walks

  std::uint64_t seed = 1;
  int threads = 1;

  /// Embedding spaces in feature order.
  std::vector<std::string> resolved_spaces() const;
  std::string resolved_index_space() const;
  /// Per-stage configs with seeds derived from the global seed.
  WalkConfig walk_for(const std::string& space) const;
  SgnsConfig sgns_for(const std::string& space) const;
  TrainConfig train_for() const;
  std::uint64_t split_seed() const;
};

/// Flat `section.key = value` lines; '#' starts a comment. Unknown keys and
/// malformed values raise ParseError with the line number.
PipelineConfig parse_config(std::istream& in, PipelineConfig base = {});
PipelineConfig load_config_file(const std::string& path);
void write_config(std::ostream& out, const PipelineConfig& cfg);

}  // namespace hetedge

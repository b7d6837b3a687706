#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hetedge/config.hpp"
#include "hetedge/edgeops.hpp"
#include "hetedge/eval.hpp"
#include "hetedge/fusion.hpp"
#include "hetedge/multigraph.hpp"
#include "hetedge/sgns.hpp"
#include "hetedge/walks.hpp"

namespace hetedge {

/// Failure inside a named pipeline stage; what() starts with the stage name.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what) : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

// ------------------------------------------------------------ in-memory steps

WalkCorpus walk_space(const MultiGraph& g, const std::string& space, const PipelineConfig& cfg);
EmbeddingTable embed_corpus(const WalkCorpus& corpus, const PipelineConfig& cfg);
/// One trained table per resolved space, in feature order.
std::vector<EmbeddingTable> embed_spaces(const MultiGraph& g, const PipelineConfig& cfg);

/// Marks nodes with at least one edge in the table's space (any type for "multi").
void mark_active(EmbeddingTable& table, const MultiGraph& g);

/// Hash of the graph and every table's vectors.
std::uint64_t embedding_provenance(const MultiGraph& g, std::span<const EmbeddingTable> tables);

struct Dataset {
  FeatureSet train;
  FeatureSet test;
};

/// Temporal split with negative_ratio negatives per positive, then a
/// stratified train/test split.
std::vector<LabeledPair> labeled_pairs(const MultiGraph& g, std::span<const NodePair> post_edges,
                                       const PipelineConfig& cfg);
Dataset make_dataset(const MultiGraph& g, std::span<const EmbeddingTable> tables,
                     std::span<const NodePair> post_edges, const PipelineConfig& cfg);

SavedModel fit_model(const FeatureSet& train, const PipelineConfig& cfg, TrainReport* report = nullptr);

struct Evaluation {
  std::vector<double> scores;
  double auc = 0.0;
  double p_at_5 = 0.0;
};

/// Scores the test set and computes AUC and offline P@5.
Evaluation evaluate(const SavedModel& model, const FeatureSet& test, int threads = 1);

struct BenchmarkResult {
  double auc = 0.0;
  double p_at_5 = 0.0;
};

/// Every in-memory step from a graph and its post-period edges to test metrics.
BenchmarkResult run_in_memory(const MultiGraph& g, std::span<const NodePair> post_edges, const PipelineConfig& cfg);

/// Settings for the bundled synthetic benchmark: node2vec over every edge
/// type, concatenated edge vectors and the multi-tower net.
PipelineConfig synthetic_benchmark_config();
/// The same benchmark reduced to friend-only DeepWalk with logistic regression.
PipelineConfig synthetic_baseline_config();

// ------------------------------------------------------------- file stages

/// Artifact names inside the work directory.
namespace artifact {
inline constexpr const char* kGraph = "graph.txt";
inline constexpr const char* kTrainFeatures = "features.train.bin";
inline constexpr const char* kTestFeatures = "features.test.bin";
inline constexpr const char* kModel = "model.txt";
inline constexpr const char* kPredictions = "predictions.txt";
inline constexpr const char* kMetrics = "metrics.txt";
inline constexpr const char* kRecommendations = "recommendations.txt";
inline constexpr const char* kBlooms = "blooms.bin";
std::string corpus(const std::string& space);
std::string embeddings(const std::string& space);
std::string embeddings_meta(const std::string& space);
}  // namespace artifact

/// Each stage reads its inputs from and writes its outputs to cfg.workdir,
/// logging one line per artifact to `log`. Failures raise StageError.
void stage_ingest(const PipelineConfig& cfg, std::ostream& log);
void stage_walk(const PipelineConfig& cfg, std::ostream& log);
void stage_embed(const PipelineConfig& cfg, std::ostream& log);
void stage_features(const PipelineConfig& cfg, std::ostream& log);
void stage_train(const PipelineConfig& cfg, std::ostream& log);
MetricsReport stage_eval(const PipelineConfig& cfg, std::ostream& log);
void stage_recommend(const PipelineConfig& cfg, std::ostream& log);
/// All stages in order.
MetricsReport run_pipeline(const PipelineConfig& cfg, std::ostream& log);

/// AUC and P@5 from an existing predictions file.
MetricsReport eval_predictions_file(const std::filesystem::path& path);

}  // namespace hetedge

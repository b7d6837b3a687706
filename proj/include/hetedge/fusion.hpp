#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hetedge/common.hpp"
#include "hetedge/edgeops.hpp"

namespace hetedge {

struct TrainConfig {
  double learning_rate = 0.01;
  std::size_t batch_size = 256;
  std::size_t epochs = 10;
  double validation_fraction = 0.1;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Per-epoch record; `val_auc` is empty when no validation split was made.
struct TrainReport {
  std::vector<double> train_loss;
  std::vector<double> val_auc;
  std::size_t best_epoch = 0;
};

// -------------------------------------------------------- logistic regression

struct LogRegModel {
  std::vector<double> weights;
  double bias = 0.0;

  LogRegModel() = default;
  explicit LogRegModel(std::size_t width) : weights(width, 0.0) {}

  double logit(std::span<const double> x) const;
  double predict(std::span<const double> x) const { return sigmoid(logit(x)); }
};

/// Mean binary cross-entropy over all rows.
double logreg_loss(const LogRegModel& m, const FeatureSet& fs);

struct LogRegGradient {
  std::vector<double> weights;
  double bias = 0.0;
};

/// Gradient of logreg_loss.
LogRegGradient logreg_gradient(const LogRegModel& m, const FeatureSet& fs);

/// Minibatch SGD on binary cross-entropy. Throws if only one class is present.
LogRegModel train_logreg(const FeatureSet& fs, const TrainConfig& cfg, TrainReport* report = nullptr);

// --------------------------------------------------------- multi-tower network

/// Fully connected layer, `weight` is out x in row-major.
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weight;
  std::vector<double> bias;

  DenseLayer() = default;
  DenseLayer(std::size_t in_, std::size_t out_) : in(in_), out(out_), weight(in_ * out_, 0.0), bias(out_, 0.0) {}
  double& w(std::size_t o, std::size_t i) { return weight[o * in + i]; }
  double w(std::size_t o, std::size_t i) const { return weight[o * in + i]; }
  std::size_t parameter_count() const noexcept { return weight.size() + bias.size(); }

  bool operator==(const DenseLayer&) const = default;
};

/// One ReLU tower per edge-vector block, a ReLU fusion layer over the
/// concatenated tower outputs (the unified edge embedding), and a sigmoid
/// output unit.
class MultiTowerNet {
 public:
  static constexpr std::size_t kHidden = 256;

  MultiTowerNet() = default;
  /// All parameters zero.
  explicit MultiTowerNet(std::vector<std::size_t> tower_inputs, std::size_t hidden = kHidden);

  /// Glorot-uniform weights, zero biases.
  void init_glorot(std::uint64_t seed);

  std::size_t num_towers() const noexcept { return towers.size(); }
  std::size_t hidden() const noexcept { return fusion.out; }
  std::size_t input_width() const noexcept;
  std::vector<std::size_t> tower_inputs() const;
  std::size_t parameter_count() const noexcept;

  /// Layers in a fixed order: towers, fusion, output.
  std::vector<DenseLayer*> layers();
  std::vector<const DenseLayer*> layers() const;

  struct Output {
    double logit = 0.0;
    double probability = 0.5;
    std::vector<double> unified;  // fusion-layer activation
  };

  Output forward(std::span<const double> features) const;
  Output forward(const HeteroEdgeFeatures& features) const;
  double predict(std::span<const double> features) const { return forward(features).probability; }

  bool operator==(const MultiTowerNet&) const = default;

  std::vector<DenseLayer> towers;
  DenseLayer fusion;
  DenseLayer output;
};

/// Mean binary cross-entropy over `rows` (all rows when empty).
double mtn_loss(const MultiTowerNet& net, const FeatureSet& fs, std::span<const std::size_t> rows = {});

/// Backpropagated gradient of mtn_loss, shaped like the network.
MultiTowerNet mtn_gradient(const MultiTowerNet& net, const FeatureSet& fs, std::span<const std::size_t> rows = {},
                           double* loss = nullptr);

/// Minibatch SGD with backpropagation. Keeps the parameters of the epoch with
/// the best validation AUC (the last epoch when validation_fraction is 0).
MultiTowerNet train_mtn(const FeatureSet& fs, const TrainConfig& cfg, std::size_t hidden = MultiTowerNet::kHidden,
                        TrainReport* report = nullptr);

// ---------------------------------------------------------------- model file

using FusionModel = std::variant<LogRegModel, MultiTowerNet>;

double predict(const FusionModel& model, std::span<const double> features);
double predict(const FusionModel& model, const HeteroEdgeFeatures& features);
/// Scores every row; parallel over rows (threads <= 0: OpenMP default).
std::vector<double> predict_all(const FusionModel& model, const FeatureSet& fs, int threads = 0);

/// A fitted model with the feature layout it expects.
struct SavedModel {
  std::vector<std::string> spaces;
  std::vector<std::size_t> block_sizes;
  Combiner combiner = Combiner::concatenate;
  std::uint64_t provenance = 0;
  FusionModel model;
};

/// Text container `HETEDGE-MODEL v1`.
void write_model(std::ostream& out, const SavedModel& m);
SavedModel read_model(std::istream& in);

}  // namespace hetedge

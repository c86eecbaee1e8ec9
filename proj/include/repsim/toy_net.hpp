#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "repsim/analysis.hpp"

namespace repsim {

enum class Activation { relu, tanh };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

/// Fully connected feedforward net: layer_widths = input, hidden..., output.
struct MlpSpec {
  std::vector<std::size_t> layer_widths;
  Activation activation = Activation::relu;
  std::uint64_t seed = 0;
};

/// Gaussian class clusters: inputs are features x examples, one label per
/// column.
struct SyntheticDataset {
  Matrix inputs;
  std::vector<std::size_t> labels;
  std::size_t classes = 0;
  std::uint64_t seed = 0;

  std::size_t examples() const { return inputs.cols(); }
  std::size_t features() const { return inputs.rows(); }
};

enum class LabelMode { true_labels, shuffled_labels };

struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  std::size_t checkpoint_every = 100;
  LabelMode label_mode = LabelMode::true_labels;
  /// Shared across a group so every memorizing network sees the identical
  /// label permutation.
  std::uint64_t shuffle_seed = 0;
  /// Explicit checkpoint schedule (step indices); overrides
  /// checkpoint_every when set. Step 0 and the final step are always
  /// recorded either way.
  std::optional<std::vector<std::size_t>> checkpoint_steps;
};

/// Activations captured at one training step, evaluated on a fixed probe
/// set: one matrix per trainable layer (hidden layers post-nonlinearity,
/// then softmax outputs).
struct ToyNetCheckpoint {
  std::size_t step = 0;
  double train_loss = 0.0;
  std::vector<ActivationMatrix> per_layer_activations;
};

/// Plain MLP with softmax cross-entropy loss and hand-derived
/// backpropagation. Parameters are exposed so gradients can be checked
/// against finite differences.
class Mlp {
 public:
  explicit Mlp(const MlpSpec& spec);

  const MlpSpec& spec() const { return spec_; }
  std::size_t layer_count() const { return weights_.size(); }

  std::vector<Matrix>& weights() { return weights_; }
  std::vector<Matrix>& biases() { return biases_; }
  const std::vector<Matrix>& weights() const { return weights_; }
  const std::vector<Matrix>& biases() const { return biases_; }

  /// Post-nonlinearity activations per layer (softmax for the last) on
  /// inputs of shape features x batch.
  std::vector<Matrix> layer_activations(const Matrix& inputs) const;

  /// Mean cross-entropy of the softmax outputs against labels.
  double loss(const Matrix& inputs, const std::vector<std::size_t>& labels) const;

  /// Loss plus parameter gradients (mean over the batch).
  double loss_and_gradients(const Matrix& inputs,
                            const std::vector<std::size_t>& labels,
                            std::vector<Matrix>& weight_grads,
                            std::vector<Matrix>& bias_grads) const;

  void apply_gradients(const std::vector<Matrix>& weight_grads,
                       const std::vector<Matrix>& bias_grads,
                       double learning_rate);

  /// Fraction of argmax predictions matching labels.
  double accuracy(const Matrix& inputs,
                  const std::vector<std::size_t>& labels) const;

 private:
  MlpSpec spec_;
  std::vector<Matrix> weights_;  // out x in
  std::vector<Matrix> biases_;   // out x 1
};

/// Class means drawn standard normal, samples mean + spread * normal.
SyntheticDataset make_dataset(std::size_t features, std::size_t classes,
                              std::size_t per_class, double spread,
                              std::uint64_t seed);

/// Labels replaced by a seeded uniform permutation of the label multiset;
/// inputs untouched.
SyntheticDataset shuffle_labels(const SyntheticDataset& d,
                                std::uint64_t shuffle_seed);

struct TrainResult {
  std::vector<ToyNetCheckpoint> checkpoints;
  Mlp model;
};

/// Mini-batch SGD with softmax cross-entropy. Checkpoints record full-data
/// train loss and probe activations; step 0 and the final step are always
/// included. Throws DivergenceDetected when the loss becomes non-finite.
TrainResult train_mlp(const MlpSpec& spec, const SyntheticDataset& data,
                      const TrainConfig& config, const Matrix& probe);

struct GroupExperimentOptions {
  double eps = kDefaultEps;
  /// When > 0, layers wider than this are row-subsampled to this count
  /// (per network, seeded) before distances are computed.
  std::size_t subsample_rows_to = 0;
  std::uint64_t subsample_seed = 0;
  Metric metric = Metric::pwcca;
  /// When set, every layer activation goes through svcca_preprocess at
  /// this variance fraction before distances (low-variance thresholding).
  std::optional<double> preprocess_variance;
};

struct GroupExperimentResult {
  /// One pairwise distance matrix per layer index.
  std::vector<DistanceMatrix> per_layer;
  std::vector<double> final_train_losses;
  std::vector<Mlp> models;
};

/// Trains every network and computes pairwise distances of their probe
/// activations at each layer. Networks must agree on layer count; widths
/// may differ.
GroupExperimentResult run_group_experiment(
    const std::vector<std::pair<MlpSpec, TrainConfig>>& group,
    const SyntheticDataset& data, const Matrix& probe,
    const GroupExperimentOptions& options = {});

/// Seeded uniform row subsample, order preserved. Throws CountTooLarge.
ActivationMatrix subsample_rows(const ActivationMatrix& l, std::size_t count,
                                std::uint64_t seed);

}  // namespace repsim

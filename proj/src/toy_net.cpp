#include "repsim/toy_net.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "repsim/parallel.hpp"

namespace repsim {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + (stream + 1) * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p = logits;
  for (Eigen::Index c = 0; c < p.cols(); ++c) {
    p.col(c).array() -= p.col(c).maxCoeff();
    p.col(c) = p.col(c).array().exp();
    p.col(c) /= p.col(c).sum();
  }
  return p;
}

}  // namespace

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
  }
  throw InvalidArgument("activation_name: unknown activation");
}

Activation activation_from_name(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw InvalidArgument("unknown activation '" + name + "'");
}

Mlp::Mlp(const MlpSpec& spec) : spec_(spec) {
  const auto& w = spec.layer_widths;
  if (w.size() < 3) {
    throw InvalidArgument("MlpSpec: need input, >= 1 hidden, output widths");
  }
  for (std::size_t width : w) {
    if (width == 0) throw InvalidArgument("MlpSpec: widths must be >= 1");
  }

  std::mt19937_64 engine(mix_seed(spec.seed, 0));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t l = 0; l + 1 < w.size(); ++l) {
    const std::size_t fan_in = w[l];
    const std::size_t fan_out = w[l + 1];
    const double scale = spec.activation == Activation::relu
                             ? std::sqrt(2.0 / static_cast<double>(fan_in))
                             : std::sqrt(1.0 / static_cast<double>(fan_in));
    Matrix weight(fan_out, fan_in);
    for (std::size_t r = 0; r < fan_out; ++r) {
      for (std::size_t c = 0; c < fan_in; ++c) {
        weight(r, c) = scale * normal(engine);
      }
    }
    weights_.push_back(std::move(weight));
    biases_.emplace_back(fan_out, 1);
  }
}

std::vector<Matrix> Mlp::layer_activations(const Matrix& inputs) const {
  if (inputs.rows() != spec_.layer_widths.front()) {
    throw ShapeMismatch("Mlp: input has " + std::to_string(inputs.rows()) +
                        " features, expected " +
                        std::to_string(spec_.layer_widths.front()));
  }
  std::vector<Matrix> activations;
  activations.reserve(layer_count());
  Eigen::MatrixXd a = inputs.view();
  for (std::size_t l = 0; l < layer_count(); ++l) {
    Eigen::MatrixXd z = weights_[l].view() * a;
    z.colwise() += Eigen::VectorXd(biases_[l].view().col(0));
    if (l + 1 == layer_count()) {
      a = softmax_columns(z);
    } else if (spec_.activation == Activation::relu) {
      a = z.cwiseMax(0.0);
    } else {
      a = z.array().tanh();
    }
    activations.push_back(Matrix::from_eigen(a));
  }
  return activations;
}

double Mlp::loss(const Matrix& inputs,
                 const std::vector<std::size_t>& labels) const {
  const std::vector<Matrix> acts = layer_activations(inputs);
  const Matrix& p = acts.back();
  if (labels.size() != inputs.cols()) {
    throw InvalidArgument("Mlp::loss: label count mismatch");
  }
  double total = 0.0;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (labels[j] >= p.rows()) {
      throw InvalidArgument("Mlp::loss: label out of range");
    }
    total -= std::log(std::max(p(labels[j], j), 1e-300));
  }
  return total / static_cast<double>(labels.size());
}

double Mlp::loss_and_gradients(const Matrix& inputs,
                               const std::vector<std::size_t>& labels,
                               std::vector<Matrix>& weight_grads,
                               std::vector<Matrix>& bias_grads) const {
  const std::size_t batch = inputs.cols();
  if (labels.size() != batch) {
    throw InvalidArgument("Mlp::loss_and_gradients: label count mismatch");
  }
  const std::size_t layers = layer_count();

  // Forward pass, keeping pre- and post-activation values.
  std::vector<Eigen::MatrixXd> as(layers + 1);
  std::vector<Eigen::MatrixXd> zs(layers);
  as[0] = inputs.view();
  for (std::size_t l = 0; l < layers; ++l) {
    zs[l] = weights_[l].view() * as[l];
    zs[l].colwise() += Eigen::VectorXd(biases_[l].view().col(0));
    if (l + 1 == layers) {
      as[l + 1] = softmax_columns(zs[l]);
    } else if (spec_.activation == Activation::relu) {
      as[l + 1] = zs[l].cwiseMax(0.0);
    } else {
      as[l + 1] = zs[l].array().tanh();
    }
  }

  const Eigen::MatrixXd& p = as[layers];
  double total = 0.0;
  Eigen::MatrixXd delta = p;
  for (std::size_t j = 0; j < batch; ++j) {
    if (labels[j] >= static_cast<std::size_t>(p.rows())) {
      throw InvalidArgument("Mlp::loss_and_gradients: label out of range");
    }
    total -= std::log(std::max(p(static_cast<Eigen::Index>(labels[j]),
                                 static_cast<Eigen::Index>(j)),
                               1e-300));
    delta(static_cast<Eigen::Index>(labels[j]), static_cast<Eigen::Index>(j)) -=
        1.0;
  }
  delta /= static_cast<double>(batch);
  if (!std::isfinite(total)) {
    throw DivergenceDetected("Mlp: loss became non-finite");
  }

  weight_grads.resize(layers);
  bias_grads.resize(layers);
  for (std::size_t l = layers; l-- > 0;) {
    weight_grads[l] = Matrix::from_eigen(delta * as[l].transpose());
    bias_grads[l] = Matrix::from_eigen(delta.rowwise().sum());
    if (l > 0) {
      Eigen::MatrixXd upstream = weights_[l].view().transpose() * delta;
      if (spec_.activation == Activation::relu) {
        delta = (zs[l - 1].array() > 0.0).select(upstream, 0.0);
      } else {
        delta = upstream.array() * (1.0 - as[l].array().square());
      }
    }
  }
  return total / static_cast<double>(batch);
}

void Mlp::apply_gradients(const std::vector<Matrix>& weight_grads,
                          const std::vector<Matrix>& bias_grads,
                          double learning_rate) {
  for (std::size_t l = 0; l < layer_count(); ++l) {
    weights_[l].view() -= learning_rate * weight_grads[l].view();
    biases_[l].view() -= learning_rate * bias_grads[l].view();
  }
}

double Mlp::accuracy(const Matrix& inputs,
                     const std::vector<std::size_t>& labels) const {
  const std::vector<Matrix> acts = layer_activations(inputs);
  const Matrix& p = acts.back();
  std::size_t hits = 0;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    std::size_t best = 0;
    for (std::size_t r = 1; r < p.rows(); ++r) {
      if (p(r, j) > p(best, j)) best = r;
    }
    if (best == labels[j]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

SyntheticDataset make_dataset(std::size_t features, std::size_t classes,
                              std::size_t per_class, double spread,
                              std::uint64_t seed) {
  if (features == 0 || classes == 0 || per_class == 0) {
    throw InvalidArgument("make_dataset: counts must be >= 1");
  }
  if (!(spread > 0)) {
    throw InvalidArgument("make_dataset: spread must be > 0");
  }

  std::mt19937_64 means_engine(mix_seed(seed, 0));
  std::mt19937_64 samples_engine(mix_seed(seed, 1));
  std::normal_distribution<double> normal(0.0, 1.0);

  Eigen::MatrixXd means(features, classes);
  for (Eigen::Index c = 0; c < means.cols(); ++c) {
    for (Eigen::Index r = 0; r < means.rows(); ++r) {
      means(r, c) = normal(means_engine);
    }
  }

  SyntheticDataset out;
  out.classes = classes;
  out.seed = seed;
  Matrix inputs(features, classes * per_class);
  out.labels.resize(classes * per_class);
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t s = 0; s < per_class; ++s) {
      const std::size_t col = c * per_class + s;
      out.labels[col] = c;
      for (std::size_t f = 0; f < features; ++f) {
        inputs(f, col) = means(static_cast<Eigen::Index>(f),
                               static_cast<Eigen::Index>(c)) +
                         spread * normal(samples_engine);
      }
    }
  }
  out.inputs = std::move(inputs);
  return out;
}

SyntheticDataset shuffle_labels(const SyntheticDataset& d,
                                std::uint64_t shuffle_seed) {
  SyntheticDataset out = d;
  std::mt19937_64 engine(shuffle_seed);
  std::shuffle(out.labels.begin(), out.labels.end(), engine);
  return out;
}

TrainResult train_mlp(const MlpSpec& spec, const SyntheticDataset& data,
                      const TrainConfig& config, const Matrix& probe) {
  if (config.learning_rate < 0) {
    throw InvalidArgument("train_mlp: learning_rate must be >= 0");
  }
  if (config.batch_size == 0 || config.batch_size > data.examples()) {
    throw InvalidArgument("train_mlp: batch_size must be in [1, examples]");
  }
  if (probe.cols() < 2) {
    throw InvalidArgument("train_mlp: probe needs >= 2 datapoints");
  }
  if (probe.rows() != spec.layer_widths.front() ||
      data.features() != spec.layer_widths.front()) {
    throw ShapeMismatch("train_mlp: feature width mismatch");
  }
  if (spec.layer_widths.back() != data.classes) {
    throw InvalidArgument("train_mlp: output width != class count");
  }

  const std::vector<std::size_t> labels =
      config.label_mode == LabelMode::shuffled_labels
          ? shuffle_labels(data, config.shuffle_seed).labels
          : data.labels;

  const std::size_t examples = data.examples();
  const std::size_t steps_per_epoch =
      (examples + config.batch_size - 1) / config.batch_size;
  const std::size_t total_steps = config.epochs * steps_per_epoch;

  std::set<std::size_t> schedule{0, total_steps};
  if (config.checkpoint_steps) {
    for (std::size_t s : *config.checkpoint_steps) {
      if (s <= total_steps) schedule.insert(s);
    }
  } else if (config.checkpoint_every > 0) {
    for (std::size_t s = config.checkpoint_every; s < total_steps;
         s += config.checkpoint_every) {
      schedule.insert(s);
    }
  }

  Mlp model(spec);
  TrainResult result{.checkpoints = {}, .model = model};

  auto record = [&](std::size_t step) {
    const double full_loss = model.loss(data.inputs, labels);
    if (!std::isfinite(full_loss)) {
      throw DivergenceDetected("train_mlp: loss became non-finite at step " +
                               std::to_string(step));
    }
    ToyNetCheckpoint cp;
    cp.step = step;
    cp.train_loss = full_loss;
    for (Matrix& act : model.layer_activations(probe)) {
      cp.per_layer_activations.emplace_back(std::move(act));
    }
    result.checkpoints.push_back(std::move(cp));
  };

  std::mt19937_64 order_engine(mix_seed(spec.seed, 0x6f72646572));
  std::vector<std::size_t> order(examples);
  std::iota(order.begin(), order.end(), 0);

  std::vector<Matrix> weight_grads, bias_grads;
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_engine);
    for (std::size_t b = 0; b < steps_per_epoch; ++b) {
      if (schedule.contains(step)) record(step);

      const std::size_t begin = b * config.batch_size;
      const std::size_t count = std::min(config.batch_size, examples - begin);
      Matrix batch(data.features(), count);
      std::vector<std::size_t> batch_labels(count);
      for (std::size_t i = 0; i < count; ++i) {
        const std::size_t src = order[begin + i];
        for (std::size_t f = 0; f < data.features(); ++f) {
          batch(f, i) = data.inputs(f, src);
        }
        batch_labels[i] = labels[src];
      }

      const double batch_loss =
          model.loss_and_gradients(batch, batch_labels, weight_grads, bias_grads);
      if (!std::isfinite(batch_loss)) {
        throw DivergenceDetected("train_mlp: loss became non-finite at step " +
                                 std::to_string(step));
      }
      model.apply_gradients(weight_grads, bias_grads, config.learning_rate);
      ++step;
    }
  }
  record(total_steps);
  result.model = model;
  return result;
}

GroupExperimentResult run_group_experiment(
    const std::vector<std::pair<MlpSpec, TrainConfig>>& group,
    const SyntheticDataset& data, const Matrix& probe,
    const GroupExperimentOptions& options) {
  if (group.size() < 2) {
    throw InvalidArgument("run_group_experiment: need >= 2 networks");
  }
  const std::size_t layer_count = group.front().first.layer_widths.size() - 1;
  for (const auto& [spec, config] : group) {
    if (spec.layer_widths.size() - 1 != layer_count) {
      throw InvalidArgument(
          "run_group_experiment: networks disagree on layer count");
    }
  }

  std::vector<std::vector<ActivationMatrix>> final_acts(group.size());
  std::vector<double> losses(group.size());
  std::vector<Mlp> models;
  models.reserve(group.size());
  for (const auto& [spec, config] : group) models.emplace_back(spec);

  parallel_for(group.size(), [&](std::size_t i) {
    TrainResult r = train_mlp(group[i].first, data, group[i].second, probe);
    losses[i] = r.checkpoints.back().train_loss;
    final_acts[i] = std::move(r.checkpoints.back().per_layer_activations);
    models[i] = std::move(r.model);
  });

  GroupExperimentResult out;
  out.final_train_losses = std::move(losses);
  out.models = std::move(models);
  for (std::size_t l = 0; l < layer_count; ++l) {
    std::vector<ActivationMatrix> layer;
    std::vector<std::string> labels;
    layer.reserve(group.size());
    for (std::size_t i = 0; i < group.size(); ++i) {
      ActivationMatrix act = final_acts[i][l];
      if (options.subsample_rows_to > 0 &&
          act.neurons() > options.subsample_rows_to) {
        act = subsample_rows(act, options.subsample_rows_to,
                             mix_seed(options.subsample_seed, i));
      }
      if (options.preprocess_variance) {
        act = svcca_preprocess(act, *options.preprocess_variance);
      }
      layer.push_back(std::move(act));
      labels.push_back("net" + std::to_string(i));
    }
    out.per_layer.push_back(pairwise_distance_matrix(
        layer, options.metric, options.eps, std::move(labels)));
  }
  return out;
}

ActivationMatrix subsample_rows(const ActivationMatrix& l, std::size_t count,
                                std::uint64_t seed) {
  if (count == 0) {
    throw InvalidArgument("subsample_rows: count must be >= 1");
  }
  if (count > l.neurons()) {
    throw CountTooLarge("subsample_rows: " + std::to_string(count) + " > " +
                        std::to_string(l.neurons()) + " rows");
  }
  std::vector<std::size_t> all(l.neurons());
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::size_t> picked;
  picked.reserve(count);
  std::mt19937_64 engine(seed);
  std::sample(all.begin(), all.end(), std::back_inserter(picked), count, engine);

  Matrix rows(count, l.datapoints());
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t c = 0; c < l.datapoints(); ++c) {
      rows(i, c) = l.matrix(picked[i], c);
    }
    if (!l.labels.empty()) labels.push_back(l.labels[picked[i]]);
  }
  return ActivationMatrix(std::move(rows), std::move(labels));
}

}  // namespace repsim

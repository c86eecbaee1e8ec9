#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>

#include "oracles.hpp"
#include "repsim/toy_net.hpp"

using repsim::Activation;
using repsim::LabelMode;
using repsim::Matrix;
using repsim::Mlp;
using repsim::MlpSpec;
using repsim::SyntheticDataset;
using repsim::TrainConfig;
using repsim::make_dataset;
using repsim::shuffle_labels;
using repsim::train_mlp;
using repsim::run_group_experiment;
using repsim::subsample_rows;

TEST_SUITE_BEGIN("toy_net");

TEST_CASE("make_dataset") {
  SUBCASE("counts and determinism") {
    const SyntheticDataset d = make_dataset(6, 4, 10, 1.0, 5);
    CHECK(d.examples() == 40);
    CHECK(d.features() == 6);
    CHECK(d.classes == 4);
    const SyntheticDataset d2 = make_dataset(6, 4, 10, 1.0, 5);
    CHECK(d.inputs == d2.inputs);
    CHECK(d.labels == d2.labels);
    const SyntheticDataset d3 = make_dataset(6, 4, 10, 1.0, 6);
    CHECK_FALSE(d.inputs == d3.inputs);
  }
  SUBCASE("tiny spread is separable by nearest empirical mean") {
    const SyntheticDataset d = make_dataset(5, 3, 30, 1e-3, 11);
    Eigen::MatrixXd means = Eigen::MatrixXd::Zero(5, 3);
    std::vector<double> counts(3, 0.0);
    for (std::size_t j = 0; j < d.examples(); ++j) {
      counts[d.labels[j]] += 1.0;
      for (std::size_t f = 0; f < 5; ++f) {
        means(static_cast<Eigen::Index>(f),
              static_cast<Eigen::Index>(d.labels[j])) += d.inputs(f, j);
      }
    }
    for (int c = 0; c < 3; ++c) means.col(c) /= counts[static_cast<std::size_t>(c)];
    std::size_t hits = 0;
    for (std::size_t j = 0; j < d.examples(); ++j) {
      double best = 1e300;
      std::size_t arg = 0;
      for (std::size_t c = 0; c < 3; ++c) {
        double dist = 0;
        for (std::size_t f = 0; f < 5; ++f) {
          const double diff =
              d.inputs(f, j) - means(static_cast<Eigen::Index>(f),
                                     static_cast<Eigen::Index>(c));
          dist += diff * diff;
        }
        if (dist < best) {
          best = dist;
          arg = c;
        }
      }
      if (arg == d.labels[j]) ++hits;
    }
    CHECK(hits == d.examples());
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS((void)make_dataset(0, 2, 5, 1.0, 1),
                    repsim::InvalidArgument);
    CHECK_THROWS_AS((void)make_dataset(3, 2, 5, 0.0, 1),
                    repsim::InvalidArgument);
  }
}

TEST_CASE("shuffle_labels") {
  const SyntheticDataset d = make_dataset(4, 4, 250, 1.0, 21);
  const SyntheticDataset s1 = shuffle_labels(d, 77);
  const SyntheticDataset s2 = shuffle_labels(d, 77);
  SUBCASE("same seed gives bit-identical labels, inputs untouched") {
    CHECK(s1.labels == s2.labels);
    CHECK(s1.inputs == d.inputs);
    CHECK_FALSE(s1.labels == d.labels);
  }
  SUBCASE("label multiset is preserved") {
    std::map<std::size_t, int> before, after;
    for (std::size_t l : d.labels) ++before[l];
    for (std::size_t l : s1.labels) ++after[l];
    CHECK(before == after);
  }
  SUBCASE("fraction unchanged is about 1/classes") {
    double unchanged = 0;
    for (std::size_t j = 0; j < d.labels.size(); ++j) {
      if (d.labels[j] == s1.labels[j]) unchanged += 1.0;
    }
    const double fraction = unchanged / static_cast<double>(d.labels.size());
    CHECK(fraction == doctest::Approx(0.25).epsilon(0.4));  // +-0.1 absolute
    CHECK(std::abs(fraction - 0.25) < 0.1);
  }
}

TEST_CASE("mlp forward pass basics") {
  MlpSpec spec;
  spec.layer_widths = {4, 6, 3};
  spec.seed = 31;
  const Mlp net(spec);
  const Matrix probe = oracles::random_matrix(4, 10, 32);
  const auto acts = net.layer_activations(probe);
  REQUIRE(acts.size() == 2);
  CHECK(acts[0].rows() == 6);
  CHECK(acts[0].cols() == 10);
  CHECK(acts[1].rows() == 3);

  SUBCASE("softmax columns sum to one") {
    for (std::size_t j = 0; j < 10; ++j) {
      double sum = 0;
      for (std::size_t r = 0; r < 3; ++r) sum += acts[1](r, j);
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
  SUBCASE("relu activations are nonnegative") {
    for (double v : acts[0].data()) CHECK(v >= 0.0);
  }
  SUBCASE("needs at least one hidden layer") {
    MlpSpec bad;
    bad.layer_widths = {4, 3};
    CHECK_THROWS_AS(Mlp{bad}, repsim::InvalidArgument);
  }
}

TEST_CASE("backprop matches central finite differences") {
  for (const Activation activation : {Activation::tanh, Activation::relu}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      MlpSpec spec;
      spec.layer_widths = {5, 7, 6, 4};
      spec.activation = activation;
      spec.seed = seed * 13;
      Mlp net(spec);

      const Matrix inputs = oracles::random_matrix(5, 12, seed * 17);
      std::vector<std::size_t> labels(12);
      for (std::size_t j = 0; j < 12; ++j) labels[j] = (j * 7 + seed) % 4;

      std::vector<Matrix> wg, bg;
      net.loss_and_gradients(inputs, labels, wg, bg);

      const double h = 1e-5;
      double worst = 0.0;
      auto check_param = [&](double& value, double analytic) {
        const double saved = value;
        value = saved + h;
        const double up = net.loss(inputs, labels);
        value = saved - h;
        const double down = net.loss(inputs, labels);
        value = saved;
        const double fd = (up - down) / (2 * h);
        const double rel = std::abs(analytic - fd) /
                           std::max({std::abs(analytic), std::abs(fd), 1e-6});
        worst = std::max(worst, rel);
      };
      for (std::size_t l = 0; l < net.layer_count(); ++l) {
        for (std::size_t r = 0; r < wg[l].rows(); ++r) {
          for (std::size_t c = 0; c < wg[l].cols(); ++c) {
            check_param(net.weights()[l](r, c), wg[l](r, c));
          }
        }
        for (std::size_t r = 0; r < bg[l].rows(); ++r) {
          check_param(net.biases()[l](r, 0), bg[l](r, 0));
        }
      }
      CHECK(worst < 1e-4);
    }
  }
}

TEST_CASE("train_mlp") {
  const SyntheticDataset data = make_dataset(6, 2, 20, 0.5, 41);
  MlpSpec spec;
  spec.layer_widths = {6, 16, 2};
  spec.seed = 42;

  SUBCASE("zero learning rate leaves the network untouched") {
    TrainConfig config;
    config.learning_rate = 0.0;
    config.epochs = 3;
    config.batch_size = 10;
    config.checkpoint_every = 2;
    const auto result = train_mlp(spec, data, config, data.inputs);
    REQUIRE(result.checkpoints.size() >= 2);
    for (const auto& cp : result.checkpoints) {
      CHECK(cp.train_loss ==
            doctest::Approx(result.checkpoints.front().train_loss));
      for (std::size_t l = 0; l < cp.per_layer_activations.size(); ++l) {
        CHECK(cp.per_layer_activations[l].matrix ==
              result.checkpoints.front().per_layer_activations[l].matrix);
      }
    }
  }
  SUBCASE("separable two-class data trains to full accuracy") {
    TrainConfig config;
    config.learning_rate = 0.5;
    config.epochs = 300;
    config.batch_size = 10;
    config.checkpoint_every = 0;
    const auto result = train_mlp(spec, data, config, data.inputs);
    CHECK(result.checkpoints.back().train_loss < 0.01);
    CHECK(result.model.accuracy(data.inputs, data.labels) ==
          doctest::Approx(1.0));
  }
  SUBCASE("checkpoints include step zero and the final step") {
    TrainConfig config;
    config.learning_rate = 0.1;
    config.epochs = 5;
    config.batch_size = 40;  // one step per epoch
    config.checkpoint_every = 2;
    const auto result = train_mlp(spec, data, config, data.inputs);
    REQUIRE(result.checkpoints.size() == 4);  // 0, 2, 4, 5
    CHECK(result.checkpoints.front().step == 0);
    CHECK(result.checkpoints[1].step == 2);
    CHECK(result.checkpoints.back().step == 5);
  }
  SUBCASE("explicit checkpoint schedule wins over checkpoint_every") {
    TrainConfig config;
    config.learning_rate = 0.1;
    config.epochs = 5;
    config.batch_size = 40;
    config.checkpoint_every = 1;
    config.checkpoint_steps = std::vector<std::size_t>{3};
    const auto result = train_mlp(spec, data, config, data.inputs);
    REQUIRE(result.checkpoints.size() == 3);  // 0, 3, 5
    CHECK(result.checkpoints[1].step == 3);
  }
  SUBCASE("divergence is detected, not silently propagated") {
    // One update at this rate pushes both weight layers to ~1e155, so the
    // next forward pass overflows to inf and the softmax turns NaN.
    TrainConfig config;
    config.learning_rate = 1e155;
    config.epochs = 20;
    config.batch_size = 20;
    config.checkpoint_every = 0;
    CHECK_THROWS_AS((void)train_mlp(spec, data, config, data.inputs),
                    repsim::DivergenceDetected);
  }
  SUBCASE("validation") {
    TrainConfig config;
    config.batch_size = 0;
    CHECK_THROWS_AS((void)train_mlp(spec, data, config, data.inputs),
                    repsim::InvalidArgument);
    config.batch_size = 10;
    const Matrix bad_probe = oracles::random_matrix(5, 10, 43);
    CHECK_THROWS_AS((void)train_mlp(spec, data, config, bad_probe),
                    repsim::ShapeMismatch);
    MlpSpec wrong_out = spec;
    wrong_out.layer_widths.back() = 3;
    CHECK_THROWS_AS((void)train_mlp(wrong_out, data, config, data.inputs),
                    repsim::InvalidArgument);
  }
}

TEST_CASE("run_group_experiment") {
  const SyntheticDataset data = make_dataset(5, 2, 15, 0.8, 51);
  MlpSpec spec;
  spec.layer_widths = {5, 8, 2};
  spec.seed = 52;
  TrainConfig config;
  config.learning_rate = 0.3;
  config.epochs = 60;
  config.batch_size = 10;
  config.checkpoint_every = 0;

  SUBCASE("identical spec and seed trains to identical representations") {
    const auto result = run_group_experiment({{spec, config}, {spec, config}},
                                             data, data.inputs);
    REQUIRE(result.per_layer.size() == 2);
    for (const auto& layer : result.per_layer) {
      CHECK(layer.values(0, 1) < 1e-6);
      CHECK(layer.values(1, 0) < 1e-6);
    }
    CHECK(result.final_train_losses[0] ==
          doctest::Approx(result.final_train_losses[1]));
  }
  SUBCASE("distance matrices are in [0,1] with tiny diagonal") {
    MlpSpec other = spec;
    other.seed = 53;
    const auto result = run_group_experiment({{spec, config}, {other, config}},
                                             data, data.inputs);
    for (const auto& layer : result.per_layer) {
      for (std::size_t i = 0; i < 2; ++i) {
        CHECK(layer.values(i, i) < 1e-8);
        for (std::size_t j = 0; j < 2; ++j) {
          CHECK(layer.values(i, j) >= 0.0);
          CHECK(layer.values(i, j) <= 1.0);
        }
      }
    }
  }
  SUBCASE("needs two networks and equal layer counts") {
    CHECK_THROWS_AS(
        (void)run_group_experiment({{spec, config}}, data, data.inputs),
        repsim::InvalidArgument);
    MlpSpec deeper = spec;
    deeper.layer_widths = {5, 8, 8, 2};
    CHECK_THROWS_AS((void)run_group_experiment({{spec, config}, {deeper, config}},
                                               data, data.inputs),
                    repsim::InvalidArgument);
  }
}

TEST_CASE("subsample_rows") {
  const repsim::ActivationMatrix layer(oracles::random_matrix(10, 20, 61),
                                       {"n0", "n1", "n2", "n3", "n4", "n5",
                                        "n6", "n7", "n8", "n9"});
  SUBCASE("full count is the identity") {
    const auto out = subsample_rows(layer, 10, 5);
    CHECK(out.matrix == layer.matrix);
    CHECK(out.labels == layer.labels);
  }
  SUBCASE("deterministic and order preserving") {
    const auto a = subsample_rows(layer, 4, 9);
    const auto b = subsample_rows(layer, 4, 9);
    CHECK(a.matrix == b.matrix);
    CHECK(a.labels == b.labels);
    // Order preserved: labels appear in their original relative order.
    for (std::size_t i = 1; i < a.labels.size(); ++i) {
      CHECK(a.labels[i - 1] < a.labels[i]);
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS((void)subsample_rows(layer, 11, 1), repsim::CountTooLarge);
    CHECK_THROWS_AS((void)subsample_rows(layer, 0, 1),
                    repsim::InvalidArgument);
  }
}

TEST_SUITE_END();

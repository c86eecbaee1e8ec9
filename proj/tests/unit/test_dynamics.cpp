#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <set>
#include <utility>

#include "oracles.hpp"
#include "repsim/dynamics.hpp"
#include "repsim/toy_net.hpp"

using repsim::ActivationMatrix;
using repsim::CheckpointSeries;
using repsim::CurveMetric;
using repsim::Matrix;

TEST_SUITE_BEGIN("dynamics");

namespace {

// Series whose checkpoints are all invertible transforms of the same base.
CheckpointSeries transformed_series(std::size_t rows, std::size_t cols,
                                    std::size_t count, std::uint64_t seed) {
  const Matrix base = oracles::random_matrix(rows, cols, seed);
  std::vector<std::int64_t> steps;
  std::vector<ActivationMatrix> acts;
  for (std::size_t t = 0; t < count; ++t) {
    const Matrix a = oracles::random_invertible(rows, seed + 100 + t, 1e2);
    steps.push_back(static_cast<std::int64_t>(t * 10));
    acts.emplace_back(Matrix::from_eigen(a.view() * base.view()));
  }
  return CheckpointSeries(std::move(steps), std::move(acts));
}

// Two-row series: row 0 frozen across training, row 1 re-randomized.
CheckpointSeries frozen_and_noise_series(std::size_t cols, std::size_t count,
                                         std::uint64_t seed) {
  const Matrix frozen = oracles::random_matrix(1, cols, seed);
  std::vector<std::int64_t> steps;
  std::vector<ActivationMatrix> acts;
  for (std::size_t t = 0; t < count; ++t) {
    Matrix m(2, cols);
    const Matrix noise = oracles::random_matrix(1, cols, seed + 1000 + t);
    for (std::size_t c = 0; c < cols; ++c) {
      m(0, c) = frozen(0, c);
      m(1, c) = noise(0, c);
    }
    steps.push_back(static_cast<std::int64_t>(t));
    acts.emplace_back(std::move(m));
  }
  return CheckpointSeries(std::move(steps), std::move(acts));
}

// Random vectors projected off a layer's centered row space (and off the
// all-ones direction so centering cannot reintroduce overlap).
Matrix off_rowspace_vectors(const Matrix& layer, std::size_t count,
                            std::uint64_t seed) {
  const Matrix centered = repsim::center_rows(layer);
  const auto n = static_cast<Eigen::Index>(layer.cols());
  Eigen::MatrixXd basis(layer.rows() + 1, n);
  basis.topRows(static_cast<Eigen::Index>(layer.rows())) = centered.view();
  basis.bottomRows(1).setOnes();
  const Eigen::MatrixXd gram = basis * basis.transpose();

  const Matrix cand = oracles::random_matrix(count, layer.cols(), seed);
  Matrix out(count, layer.cols());
  for (std::size_t i = 0; i < count; ++i) {
    Eigen::VectorXd v = cand.row(i).transpose();
    const Eigen::VectorXd coeff = gram.ldlt().solve(basis * v);
    v -= basis.transpose() * coeff;
    for (std::size_t c = 0; c < layer.cols(); ++c) {
      out(i, c) = v(static_cast<Eigen::Index>(c));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("CheckpointSeries validation") {
  const ActivationMatrix a(oracles::random_matrix(2, 10, 1));
  const ActivationMatrix b(oracles::random_matrix(2, 10, 2));
  const ActivationMatrix other_shape(oracles::random_matrix(3, 10, 3));
  CHECK_THROWS_AS(CheckpointSeries({0}, {a}), repsim::InvalidArgument);
  CHECK_THROWS_AS(CheckpointSeries({0, 0}, {a, b}), repsim::InvalidArgument);
  CHECK_THROWS_AS(CheckpointSeries({1, 0}, {a, b}), repsim::InvalidArgument);
  CHECK_THROWS_AS(CheckpointSeries({0, 1}, {a, other_shape}),
                  repsim::ShapeMismatch);
  const CheckpointSeries ok({0, 5, 9}, {a, b, a});
  CHECK(ok.midpoint_index() == 1);
  CHECK(CheckpointSeries({0, 1}, {a, b}).midpoint_index() == 1);
  CHECK(CheckpointSeries({0, 1, 2, 3, 4}, {a, b, a, b, a}).midpoint_index() ==
        2);
}

TEST_CASE("convergence_curve") {
  SUBCASE("final entry is the self-distance") {
    const CheckpointSeries series = transformed_series(4, 50, 5, 11);
    for (const CurveMetric metric :
         {CurveMetric::pwcca, CurveMetric::mean_cca, CurveMetric::cosine,
          CurveMetric::euclidean}) {
      const auto curve = convergence_curve(series, metric);
      REQUIRE(curve.size() == 5);
      CHECK(curve.back() < 1e-8);
    }
  }
  SUBCASE("pwcca sees through invertible transforms, cosine does not") {
    const CheckpointSeries series = transformed_series(4, 60, 4, 12);
    const auto pw = convergence_curve(series, CurveMetric::pwcca);
    const auto cos = convergence_curve(series, CurveMetric::cosine);
    for (std::size_t t = 0; t + 1 < pw.size(); ++t) {
      CHECK(pw[t] < 1e-6);
      CHECK(cos[t] > 0.05);
    }
  }
}

TEST_CASE("coefficient_trajectories") {
  const CheckpointSeries series = transformed_series(3, 40, 4, 13);
  const auto rows = coefficient_trajectories(series);
  REQUIRE(rows.size() == 4);
  for (const auto& row : rows) {
    REQUIRE(row.size() == 3);
    for (std::size_t i = 1; i < row.size(); ++i) CHECK(row[i] <= row[i - 1]);
  }
  for (double rho : rows.back()) CHECK(rho == doctest::Approx(1.0));
}

TEST_CASE("split_stable_unstable") {
  SUBCASE("frozen direction lands in the stable set") {
    const std::size_t cols = 200;
    const CheckpointSeries series = frozen_and_noise_series(cols, 9, 21);
    const auto split = split_stable_unstable(series, 1, 1);
    CHECK(split.per_side == 1);
    CHECK(split.t_early == 1);
    CHECK(split.t_mid == series.steps[series.midpoint_index()]);

    const Matrix frozen_centered = repsim::center_rows(
        Matrix::from_eigen(series.activations[1].matrix.view().topRows(1)));
    const Eigen::VectorXd f =
        frozen_centered.view().row(0).transpose().normalized();
    const Eigen::VectorXd s = split.stable_vectors.view().row(0).transpose();
    CHECK(std::abs(f.dot(s)) > 0.9);
    CHECK(s.norm() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(split.unstable_vectors.view().row(0).norm() ==
          doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("midpoint anchor keeps the other side's vectors") {
    const CheckpointSeries series = frozen_and_noise_series(150, 9, 23);
    const auto split = split_stable_unstable(series, 1, 1, repsim::kDefaultEps,
                                             repsim::SplitAnchor::midpoint);
    const Matrix frozen_centered = repsim::center_rows(Matrix::from_eigen(
        series.activations[series.midpoint_index()].matrix.view().topRows(1)));
    const Eigen::VectorXd f =
        frozen_centered.view().row(0).transpose().normalized();
    const Eigen::VectorXd s = split.stable_vectors.view().row(0).transpose();
    CHECK(std::abs(f.dot(s)) > 0.9);
  }
  SUBCASE("errors") {
    const CheckpointSeries series = frozen_and_noise_series(50, 6, 22);
    CHECK_THROWS_AS((void)split_stable_unstable(series, 1, 2),
                    repsim::InsufficientRank);  // c = 2 < 2m
    CHECK_THROWS_AS((void)split_stable_unstable(series, 77, 1),
                    repsim::InvalidArgument);  // not a checkpoint step
    CHECK_THROWS_AS((void)split_stable_unstable(series, 4, 1),
                    repsim::InvalidArgument);  // not before midpoint
    CHECK_THROWS_AS((void)split_stable_unstable(series, 1, 0),
                    repsim::InvalidArgument);
  }
}

TEST_CASE("subspace_similarity") {
  const Matrix layer_m = oracles::random_matrix(6, 80, 31);
  const ActivationMatrix layer(layer_m);
  SUBCASE("vectors inside the row space score 1") {
    const Matrix mix = oracles::random_matrix(3, 6, 32);
    const Matrix centered = repsim::center_rows(layer_m);
    const Matrix vectors = Matrix::from_eigen(mix.view() * centered.view());
    CHECK(subspace_similarity(vectors, layer) ==
          doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("vectors orthogonal to the row space score 0") {
    const Matrix vectors = off_rowspace_vectors(layer_m, 3, 33);
    CHECK(subspace_similarity(vectors, layer) < 1e-6);
  }
  SUBCASE("half in-span, half orthogonal scores about one half") {
    const Matrix centered = repsim::center_rows(layer_m);
    const Matrix mix = oracles::random_matrix(2, 6, 34);
    const Matrix in_span = Matrix::from_eigen(mix.view() * centered.view());
    const Matrix off_span = off_rowspace_vectors(layer_m, 2, 35);
    Matrix vectors(4, 80);
    for (std::size_t c = 0; c < 80; ++c) {
      vectors(0, c) = in_span(0, c);
      vectors(1, c) = in_span(1, c);
      vectors(2, c) = off_span(0, c);
      vectors(3, c) = off_span(1, c);
    }
    CHECK(subspace_similarity(vectors, layer) ==
          doctest::Approx(0.5).epsilon(0.1));
  }
  SUBCASE("column mismatch") {
    CHECK_THROWS_AS(
        (void)subspace_similarity(oracles::random_matrix(2, 79, 36), layer),
        repsim::ColumnMismatch);
  }
}

TEST_CASE("stability_curves anchor at 1 for the stable set at t_early") {
  const CheckpointSeries series = frozen_and_noise_series(150, 9, 41);
  const auto split = split_stable_unstable(series, 1, 1);
  const auto [stable, unstable] = stability_curves(series, split);
  REQUIRE(stable.size() == series.size());
  REQUIRE(unstable.size() == series.size());
  CHECK(stable[1] == doctest::Approx(1.0).epsilon(1e-6));
  // The frozen direction stays recognizable at every checkpoint.
  for (double v : stable) CHECK(v > 0.9);
}

TEST_CASE("toy nets converge bottom-up: early layers stabilize first") {
  std::size_t bottom_up = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const repsim::SyntheticDataset data =
        repsim::make_dataset(12, 4, 40, 1.0, seed * 31);
    repsim::MlpSpec spec;
    spec.layer_widths = {12, 24, 24, 24, 4};
    spec.seed = seed * 77;
    repsim::TrainConfig config;
    config.learning_rate = 0.15;
    config.epochs = 600;
    config.batch_size = 32;
    config.checkpoint_every = 60;
    const repsim::TrainResult result =
        repsim::train_mlp(spec, data, config, data.inputs);

    auto series_for = [&](std::size_t layer) {
      std::vector<std::int64_t> steps;
      std::vector<ActivationMatrix> acts;
      for (const auto& cp : result.checkpoints) {
        steps.push_back(static_cast<std::int64_t>(cp.step));
        acts.push_back(cp.per_layer_activations[layer]);
      }
      return CheckpointSeries(std::move(steps), std::move(acts));
    };
    auto crossing_step = [&](std::size_t layer) {
      const CheckpointSeries series = series_for(layer);
      const auto curve = convergence_curve(series, CurveMetric::pwcca);
      for (std::size_t t = 0; t < curve.size(); ++t) {
        if (curve[t] < 0.2) return series.steps[t];
      }
      return std::numeric_limits<std::int64_t>::max();
    };
    if (crossing_step(0) < crossing_step(2)) ++bottom_up;
  }
  CHECK(bottom_up >= 4);
}

TEST_CASE("group_by_sequence_step") {
  SUBCASE("even split") {
    const ActivationMatrix out(oracles::random_matrix(3, 40, 51));
    const auto groups = group_by_sequence_step(out, 20);
    REQUIRE(groups.size() == 20);
    for (const auto& g : groups) {
      CHECK(g.neurons() == 3);
      CHECK(g.datapoints() == 2);
    }
  }
  SUBCASE("period 1 returns the input") {
    const ActivationMatrix out(oracles::random_matrix(2, 7, 52));
    const auto groups = group_by_sequence_step(out, 1);
    REQUIRE(groups.size() == 1);
    CHECK(groups[0].matrix == out.matrix);
  }
  SUBCASE("trailing partial cycle") {
    const ActivationMatrix out(oracles::random_matrix(2, 41, 53));
    const auto groups = group_by_sequence_step(out, 20);
    CHECK(groups[0].datapoints() == 3);
    for (std::size_t j = 1; j < 20; ++j) CHECK(groups[j].datapoints() == 2);
  }
  SUBCASE("partition: columns are exactly redistributed") {
    const ActivationMatrix out(oracles::random_matrix(2, 23, 54));
    const auto groups = group_by_sequence_step(out, 5);
    std::multiset<std::pair<double, double>> original, regrouped;
    for (std::size_t c = 0; c < 23; ++c) {
      original.insert({out.matrix(0, c), out.matrix(1, c)});
    }
    std::size_t total = 0;
    for (const auto& g : groups) {
      total += g.datapoints();
      for (std::size_t c = 0; c < g.datapoints(); ++c) {
        regrouped.insert({g.matrix(0, c), g.matrix(1, c)});
      }
    }
    CHECK(total == 23);
    CHECK(original == regrouped);
  }
  SUBCASE("errors") {
    const ActivationMatrix out(oracles::random_matrix(2, 10, 55));
    CHECK_THROWS_AS((void)group_by_sequence_step(out, 0),
                    repsim::InvalidArgument);
    CHECK_THROWS_AS((void)group_by_sequence_step(out, 11),
                    repsim::InvalidArgument);
  }
}

TEST_SUITE_END();

#include "repsim/dynamics.hpp"

#include <algorithm>
#include <string>

namespace repsim {

CheckpointSeries::CheckpointSeries(std::vector<std::int64_t> step_indices,
                                   std::vector<ActivationMatrix> checkpoints)
    : steps(std::move(step_indices)), activations(std::move(checkpoints)) {
  if (steps.size() < 2) {
    throw InvalidArgument("CheckpointSeries: need >= 2 checkpoints");
  }
  if (steps.size() != activations.size()) {
    throw InvalidArgument("CheckpointSeries: " + std::to_string(steps.size()) +
                          " steps vs " + std::to_string(activations.size()) +
                          " activation matrices");
  }
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (steps[i] <= steps[i - 1]) {
      throw InvalidArgument("CheckpointSeries: steps must be increasing");
    }
  }
  for (const auto& a : activations) {
    if (a.neurons() != activations.front().neurons() ||
        a.datapoints() != activations.front().datapoints()) {
      throw ShapeMismatch("CheckpointSeries: checkpoint shapes differ");
    }
  }
}

std::string curve_metric_name(CurveMetric m) {
  switch (m) {
    case CurveMetric::pwcca: return "pwcca";
    case CurveMetric::mean_cca: return "mean_cca";
    case CurveMetric::cosine: return "cosine";
    case CurveMetric::euclidean: return "euclidean";
  }
  throw InvalidArgument("curve_metric_name: unknown metric");
}

CurveMetric curve_metric_from_name(const std::string& name) {
  if (name == "pwcca") return CurveMetric::pwcca;
  if (name == "mean_cca" || name == "mean-cca") return CurveMetric::mean_cca;
  if (name == "cosine") return CurveMetric::cosine;
  if (name == "euclidean") return CurveMetric::euclidean;
  throw InvalidArgument("unknown curve metric '" + name + "'");
}

double checkpoint_distance(const ActivationMatrix& at,
                           const ActivationMatrix& reference,
                           CurveMetric metric, double eps) {
  switch (metric) {
    case CurveMetric::pwcca: return pwcca_distance(at, reference, eps).distance;
    case CurveMetric::mean_cca:
      return mean_cca_distance(at, reference, eps).distance;
    case CurveMetric::cosine: return cosine_distance(at, reference).distance;
    case CurveMetric::euclidean:
      return euclidean_distance(at, reference).distance;
  }
  throw InvalidArgument("checkpoint_distance: unknown metric");
}

std::vector<double> convergence_curve(const CheckpointSeries& series,
                                      CurveMetric metric, double eps) {
  const ActivationMatrix& final = series.activations.back();
  std::vector<double> curve(series.size());
  for (std::size_t t = 0; t < series.size(); ++t) {
    curve[t] = checkpoint_distance(series.activations[t], final, metric, eps);
  }
  return curve;
}

std::vector<std::vector<double>> coefficient_trajectories(
    const CheckpointSeries& series, double eps) {
  const ActivationMatrix& final = series.activations.back();
  std::vector<std::vector<double>> rows(series.size());
  for (std::size_t t = 0; t < series.size(); ++t) {
    rows[t] = compute_cca(series.activations[t], final, eps).rho;
  }
  return rows;
}

SubspaceSplit split_stable_unstable(const CheckpointSeries& series,
                                    std::int64_t t_early, std::size_t m,
                                    double eps, SplitAnchor anchor) {
  if (m == 0) {
    throw InvalidArgument("split_stable_unstable: m must be >= 1");
  }
  const auto it = std::find(series.steps.begin(), series.steps.end(), t_early);
  if (it == series.steps.end()) {
    throw InvalidArgument("split_stable_unstable: step " +
                          std::to_string(t_early) + " is not a checkpoint");
  }
  const std::size_t early_index =
      static_cast<std::size_t>(it - series.steps.begin());
  const std::size_t mid_index = series.midpoint_index();
  if (early_index >= mid_index) {
    throw InvalidArgument(
        "split_stable_unstable: t_early must precede the midpoint checkpoint");
  }

  const CcaResult r = compute_cca(series.activations[early_index],
                                  series.activations[mid_index], eps);
  const std::size_t c = r.coefficient_count();
  if (c < 2 * m) {
    throw InsufficientRank("split_stable_unstable: need 2m <= " +
                           std::to_string(c) + " coefficients, m = " +
                           std::to_string(m));
  }

  const Matrix& canonical =
      anchor == SplitAnchor::early ? r.left_canonical : r.right_canonical;
  const auto mm = static_cast<Eigen::Index>(m);

  SubspaceSplit split;
  split.stable_vectors = Matrix::from_eigen(canonical.view().topRows(mm));
  split.unstable_vectors = Matrix::from_eigen(canonical.view().bottomRows(mm));
  split.t_early = t_early;
  split.t_mid = series.steps[mid_index];
  split.per_side = m;
  return split;
}

double subspace_similarity(const Matrix& vectors, const ActivationMatrix& layer,
                           double eps) {
  if (vectors.cols() != layer.datapoints()) {
    throw ColumnMismatch("subspace_similarity: vectors have " +
                         std::to_string(vectors.cols()) +
                         " components, layer has " +
                         std::to_string(layer.datapoints()) + " datapoints");
  }
  const ActivationMatrix pseudo(vectors);
  const double d = mean_cca_distance(pseudo, layer, eps).distance;
  return std::clamp(1.0 - d, 0.0, 1.0);
}

std::pair<std::vector<double>, std::vector<double>> stability_curves(
    const CheckpointSeries& series, const SubspaceSplit& split, double eps) {
  std::vector<double> stable(series.size()), unstable(series.size());
  for (std::size_t t = 0; t < series.size(); ++t) {
    stable[t] =
        subspace_similarity(split.stable_vectors, series.activations[t], eps);
    unstable[t] =
        subspace_similarity(split.unstable_vectors, series.activations[t], eps);
  }
  return {std::move(stable), std::move(unstable)};
}

std::vector<ActivationMatrix> group_by_sequence_step(
    const ActivationMatrix& output, std::size_t period) {
  if (period == 0 || output.datapoints() < period) {
    throw InvalidArgument(
        "group_by_sequence_step: need cols >= period >= 1, got period " +
        std::to_string(period) + " with " +
        std::to_string(output.datapoints()) + " columns");
  }
  const auto& m = output.matrix;
  std::vector<ActivationMatrix> groups;
  groups.reserve(period);
  for (std::size_t j = 0; j < period; ++j) {
    const std::size_t count = (output.datapoints() - j + period - 1) / period;
    Matrix block(m.rows(), count);
    for (std::size_t r = 0; r < m.rows(); ++r) {
      std::size_t out_col = 0;
      for (std::size_t col = j; col < m.cols(); col += period) {
        block(r, out_col++) = m(r, col);
      }
    }
    groups.emplace_back(std::move(block), output.labels);
  }
  return groups;
}

}  // namespace repsim

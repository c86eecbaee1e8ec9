#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "repsim/similarity.hpp"

namespace repsim {

/// One layer's activations captured at increasing training steps. All
/// checkpoints share the same shape and datapoint ordering.
struct CheckpointSeries {
  std::vector<std::int64_t> steps;
  std::vector<ActivationMatrix> activations;

  CheckpointSeries(std::vector<std::int64_t> step_indices,
                   std::vector<ActivationMatrix> checkpoints);

  std::size_t size() const { return steps.size(); }
  /// Index of the midpoint checkpoint: ceil((count - 1) / 2).
  std::size_t midpoint_index() const { return steps.size() / 2; }
};

/// Stable/unstable canonical directions found by comparing an early
/// checkpoint against the midpoint. Rows are unit-norm vectors in
/// datapoint space; the two sets come from disjoint coefficient indices of
/// the same CCA.
struct SubspaceSplit {
  Matrix stable_vectors;    // m x n
  Matrix unstable_vectors;  // m x n
  std::int64_t t_early = 0;
  std::int64_t t_mid = 0;
  std::size_t per_side = 0;
};

/// Which checkpoint's data-space vectors the split keeps: the early
/// checkpoint's canonical vectors or the midpoint's.
enum class SplitAnchor { early, midpoint };

enum class CurveMetric { pwcca, mean_cca, cosine, euclidean };

std::string curve_metric_name(CurveMetric m);
CurveMetric curve_metric_from_name(const std::string& name);

/// Distance between one checkpoint and a reference under a curve metric.
double checkpoint_distance(const ActivationMatrix& at,
                           const ActivationMatrix& reference,
                           CurveMetric metric, double eps = kDefaultEps);

/// Distance of each checkpoint to the final one under the chosen metric;
/// the last entry is the self-distance.
std::vector<double> convergence_curve(const CheckpointSeries& series,
                                      CurveMetric metric,
                                      double eps = kDefaultEps);

/// Sorted canonical correlation coefficients of each checkpoint against the
/// final one, one row per step.
std::vector<std::vector<double>> coefficient_trajectories(
    const CheckpointSeries& series, double eps = kDefaultEps);

/// CCA between the checkpoint at step t_early and the midpoint checkpoint;
/// the m canonical vectors with the highest coefficients form the stable
/// set, the m lowest the unstable set. Throws InsufficientRank when fewer
/// than 2m coefficients exist and InvalidArgument when t_early is not a
/// checkpoint step strictly before the midpoint.
SubspaceSplit split_stable_unstable(const CheckpointSeries& series,
                                    std::int64_t t_early, std::size_t m,
                                    double eps = kDefaultEps,
                                    SplitAnchor anchor = SplitAnchor::early);

/// Mean CCA similarity (1 - mean_cca_distance) between a set of data-space
/// vectors, treated as pseudo-neurons, and a layer.
double subspace_similarity(const Matrix& vectors, const ActivationMatrix& layer,
                           double eps = kDefaultEps);

/// subspace_similarity of both split sets against every checkpoint:
/// first = stable curve, second = unstable curve.
std::pair<std::vector<double>, std::vector<double>> stability_curves(
    const CheckpointSeries& series, const SubspaceSplit& split,
    double eps = kDefaultEps);

/// Splits columns by index modulo period: result[j] holds the columns with
/// index == j (mod period), a partition of the input's columns.
std::vector<ActivationMatrix> group_by_sequence_step(
    const ActivationMatrix& output, std::size_t period);

}  // namespace repsim

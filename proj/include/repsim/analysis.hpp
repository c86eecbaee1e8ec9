#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "repsim/similarity.hpp"

namespace repsim {

/// Square pairwise distance table. Not required to be symmetric (PWCCA is
/// a pseudo-distance); symmetrized() gives the elementwise-mean copy used
/// for clustering.
struct DistanceMatrix {
  std::vector<std::string> labels;
  Matrix values;

  DistanceMatrix(std::vector<std::string> names, Matrix distances);

  std::size_t size() const { return labels.size(); }
  Matrix symmetrized() const;
  /// Largest |d(i,j) - d(j,i)|.
  double max_asymmetry() const;
};

/// Flat clustering cut from an agglomerative dendrogram.
struct ClusterAssignment {
  /// Cluster id per label, ids contiguous from 0 in order of first
  /// appearance.
  std::vector<std::size_t> assignments;
  /// Heights of the n-1 merges in merge order (nondecreasing for average
  /// linkage).
  std::vector<double> merge_heights;
  std::size_t chosen_k = 1;
};

/// Distance between every ordered pair of layers (diagonal computed by
/// self-comparison). Layers must share a datapoint count.
DistanceMatrix pairwise_distance_matrix(
    const std::vector<ActivationMatrix>& layers, Metric metric,
    double eps = kDefaultEps, std::vector<std::string> labels = {});

/// Average-linkage agglomerative clustering on the symmetrized matrix.
/// When k is absent, the cut maximizes the jump between consecutive merge
/// heights (invariant to rescaling the distances). Merge ties break on
/// the lowest original label index.
ClusterAssignment agglomerative_cluster(const DistanceMatrix& d,
                                        std::optional<std::size_t> k = {});

/// Standard Pearson r in [-1, 1]. Throws ZeroVariance when either input
/// is constant.
double pearson_correlation(std::span<const double> x,
                           std::span<const double> y);

}  // namespace repsim

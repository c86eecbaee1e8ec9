#include "repsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "repsim/parallel.hpp"

namespace repsim {

DistanceMatrix::DistanceMatrix(std::vector<std::string> names, Matrix distances)
    : labels(std::move(names)), values(std::move(distances)) {
  if (values.rows() != values.cols()) {
    throw InvalidArgument("DistanceMatrix: values must be square");
  }
  if (labels.size() != values.rows()) {
    throw InvalidArgument("DistanceMatrix: " + std::to_string(labels.size()) +
                          " labels for " + std::to_string(values.rows()) +
                          " rows");
  }
  for (std::size_t i = 0; i < values.rows(); ++i) {
    if (std::abs(values(i, i)) >= 1e-8) {
      throw InvalidArgument("DistanceMatrix: diagonal entry " +
                            std::to_string(i) + " is not ~0");
    }
    for (std::size_t j = 0; j < values.cols(); ++j) {
      if (values(i, j) < 0) {
        throw InvalidArgument("DistanceMatrix: negative entry");
      }
    }
  }
}

Matrix DistanceMatrix::symmetrized() const {
  return Matrix::from_eigen((values.view() + values.view().transpose()) * 0.5);
}

double DistanceMatrix::max_asymmetry() const {
  return (values.view() - values.view().transpose()).cwiseAbs().maxCoeff();
}

DistanceMatrix pairwise_distance_matrix(
    const std::vector<ActivationMatrix>& layers, Metric metric, double eps,
    std::vector<std::string> labels) {
  if (layers.size() < 2) {
    throw InvalidArgument("pairwise_distance_matrix: need >= 2 layers");
  }
  for (const auto& l : layers) {
    if (l.datapoints() != layers.front().datapoints()) {
      throw ColumnMismatch(
          "pairwise_distance_matrix: layers disagree on datapoint count");
    }
  }
  if (labels.empty()) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
      labels.push_back("layer" + std::to_string(i));
    }
  } else if (labels.size() != layers.size()) {
    throw InvalidArgument("pairwise_distance_matrix: label count mismatch");
  }

  const std::size_t n = layers.size();
  Matrix values(n, n);
  parallel_for(n * n, [&](std::size_t idx) {
    const std::size_t i = idx / n;
    const std::size_t j = idx % n;
    values(i, j) = compute_distance(layers[i], layers[j], metric, eps).distance;
  });
  // Self-comparison roundoff (~1e-15) is kept, not zeroed.
  return DistanceMatrix(std::move(labels), std::move(values));
}

ClusterAssignment agglomerative_cluster(const DistanceMatrix& d,
                                        std::optional<std::size_t> k) {
  const std::size_t n = d.size();
  if (k && (*k == 0 || *k > n)) {
    throw InvalidArgument("agglomerative_cluster: k must be in [1, n]");
  }

  const Matrix sym = d.symmetrized();

  // Active clusters: member lists plus the lowest original index for tie
  // breaking. Average-linkage distances via the Lance-Williams update.
  struct Cluster {
    std::vector<std::size_t> members;
    std::size_t lowest;
  };
  std::vector<Cluster> clusters(n);
  for (std::size_t i = 0; i < n; ++i) clusters[i] = {{i}, i};
  Matrix dist = sym;
  std::vector<bool> active(n, true);

  // Snapshot of assignments at each cluster count, so any cut is available.
  std::vector<std::size_t> membership(n);
  std::iota(membership.begin(), membership.end(), 0);
  std::vector<std::vector<std::size_t>> snapshots(n + 1);
  snapshots[n] = membership;

  std::vector<double> heights;
  heights.reserve(n - 1);

  std::size_t remaining = n;
  while (remaining > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!active[j]) continue;
        const double v = dist(i, j);
        const auto lo = std::minmax(clusters[i].lowest, clusters[j].lowest);
        const auto best_lo =
            std::minmax(clusters[bi].lowest, clusters[bj].lowest);
        if (v < best ||
            (v == best && std::make_pair(lo.first, lo.second) <
                              std::make_pair(best_lo.first, best_lo.second))) {
          best = v;
          bi = i;
          bj = j;
        }
      }
    }

    // Merge bj into bi; update average-linkage distances.
    const double si = static_cast<double>(clusters[bi].members.size());
    const double sj = static_cast<double>(clusters[bj].members.size());
    for (std::size_t t = 0; t < n; ++t) {
      if (!active[t] || t == bi || t == bj) continue;
      const double v = (si * dist(bi, t) + sj * dist(bj, t)) / (si + sj);
      dist(bi, t) = v;
      dist(t, bi) = v;
    }
    clusters[bi].members.insert(clusters[bi].members.end(),
                                clusters[bj].members.begin(),
                                clusters[bj].members.end());
    clusters[bi].lowest = std::min(clusters[bi].lowest, clusters[bj].lowest);
    active[bj] = false;
    heights.push_back(best);
    --remaining;

    for (std::size_t m : clusters[bi].members) membership[m] = bi;
    snapshots[remaining] = membership;
  }

  std::size_t chosen;
  if (k) {
    chosen = *k;
  } else if (n <= 2 || heights.empty()) {
    chosen = 1;
  } else {
    // Largest jump between consecutive merge heights; the cut falls just
    // before the jump. The argmax is invariant to rescaling all distances,
    // and unlike a ratio rule it is not destabilized by near-zero early
    // merges.
    double best_gap = -1.0;
    std::size_t best_i = heights.size() - 1;
    for (std::size_t i = 0; i + 1 < heights.size(); ++i) {
      const double gap = heights[i + 1] - heights[i];
      if (gap > best_gap) {
        best_gap = gap;
        best_i = i;
      }
    }
    chosen = n - best_i - 1;
  }

  // Contiguous ids in order of first appearance.
  const std::vector<std::size_t>& snap = snapshots[chosen];
  std::vector<std::size_t> remap(n, std::numeric_limits<std::size_t>::max());
  std::size_t next_id = 0;
  ClusterAssignment out;
  out.assignments.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (remap[snap[i]] == std::numeric_limits<std::size_t>::max()) {
      remap[snap[i]] = next_id++;
    }
    out.assignments[i] = remap[snap[i]];
  }
  out.merge_heights = std::move(heights);
  out.chosen_k = chosen;
  return out;
}

double pearson_correlation(std::span<const double> x,
                           std::span<const double> y) {
  if (x.size() != y.size()) {
    throw InvalidArgument("pearson_correlation: length mismatch");
  }
  if (x.size() < 2) {
    throw InvalidArgument("pearson_correlation: need >= 2 points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw ZeroVariance("pearson_correlation: constant input");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace repsim

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "repsim/cca.hpp"

namespace repsim {

enum class Metric { mean_cca, pwcca, bartlett_cca, cosine, euclidean };

std::string metric_name(Metric m);
Metric metric_from_name(const std::string& name);

/// Which layer the projection weights were computed from.
enum class WeightDirection { l1_weighted, l2_weighted, symmetric };

std::string weight_direction_name(WeightDirection d);

/// Which side of a CcaResult an operation refers to.
enum class Side { left, right };

/// Scalar distance between two layers plus metric-specific extras.
struct DistanceReport {
  Metric metric = Metric::mean_cca;
  double distance = 0.0;
  std::optional<std::vector<double>> weights;       // pwcca
  std::optional<std::size_t> k_significant;         // bartlett_cca
  std::optional<WeightDirection> direction;         // pwcca
  std::optional<double> raw_distance;               // unnormalized euclidean
};

/// 1 - mean of the canonical correlation coefficients.
DistanceReport mean_cca_distance(const CcaResult& r);
DistanceReport mean_cca_distance(const ActivationMatrix& l1,
                                 const ActivationMatrix& l2,
                                 double eps = kDefaultEps);

/// Per-coefficient weights: how much of the source layer's neuron output
/// each canonical vector accounts for. The canonical vectors are
/// re-orthonormalized by Gram-Schmidt first; weights are the normalized
/// column sums of |<h_i, z_j>| over the source's centered neuron rows.
/// Weights are nonnegative and sum to 1.
std::vector<double> projection_weights(const CcaResult& r,
                                       const ActivationMatrix& source,
                                       Side side = Side::left);

struct PwccaOptions {
  double eps = kDefaultEps;
  WeightDirection direction = WeightDirection::l1_weighted;
  /// When set, both layers go through svcca_preprocess(variance) first
  /// (low-variance thresholding).
  std::optional<double> preprocess_variance;
};

/// Projection-weighted CCA distance 1 - sum alpha_i rho_i. Weights come
/// from the first argument unless direction says otherwise; symmetric is
/// the mean of both single-direction distances. Asymmetric by nature
/// (a pseudo-distance): pwcca(l1, l2) need not equal pwcca(l2, l1).
DistanceReport pwcca_distance(const ActivationMatrix& l1,
                              const ActivationMatrix& l2,
                              const PwccaOptions& options = {});
DistanceReport pwcca_distance(const ActivationMatrix& l1,
                              const ActivationMatrix& l2, double eps);

/// Bartlett's statistic T_k for the hypothesis that only the first k
/// canonical correlations are significant:
///   T_k = -(n - k - (a+b+1)/2 + sum_{i<=k} rho_i^-2)
///           * log(prod_{i>k} (1 - rho_i^2))
/// rho must be sorted nonincreasing with every value in [0, 1) and
/// rho.size() == min(a, b); requires n > a + b and 0 <= k < min(a, b).
double bartlett_statistic(std::span<const double> rho, std::size_t n,
                          std::size_t a, std::size_t b, std::size_t k);

/// Smallest k whose null "k significant correlations" is not rejected at
/// alpha_level, testing T_k against chi-squared with (a-k)(b-k) degrees of
/// freedom; returns min(a, b) when every k is rejected.
std::size_t estimate_significant_correlations(std::span<const double> rho,
                                              std::size_t n, std::size_t a,
                                              std::size_t b,
                                              double alpha_level);

/// 1 - mean of the top k-hat coefficients, where k-hat comes from the
/// Bartlett estimate; k-hat = 0 yields distance 1.
DistanceReport bartlett_cca_distance(const ActivationMatrix& l1,
                                     const ActivationMatrix& l2,
                                     double alpha_level = 0.05,
                                     double eps = kDefaultEps);

/// 1 - <vec(L1), vec(L2)> / (|L1|_F |L2|_F); range [0, 2]. Baseline with no
/// invariance to linear transforms. Throws ZeroNorm on a zero matrix.
DistanceReport cosine_distance(const ActivationMatrix& l1,
                               const ActivationMatrix& l2);

/// |L1 - L2|_F / sqrt(a * n) (per-entry RMS); the raw Frobenius value is
/// reported alongside.
DistanceReport euclidean_distance(const ActivationMatrix& l1,
                                  const ActivationMatrix& l2);

/// Dispatch by metric enum (alpha_level only used by bartlett_cca).
DistanceReport compute_distance(const ActivationMatrix& l1,
                                const ActivationMatrix& l2, Metric metric,
                                double eps = kDefaultEps,
                                double alpha_level = 0.05);

}  // namespace repsim

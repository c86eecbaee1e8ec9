#include "repsim/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "repsim/special_functions.hpp"

namespace repsim {

std::string metric_name(Metric m) {
  switch (m) {
    case Metric::mean_cca: return "mean_cca";
    case Metric::pwcca: return "pwcca";
    case Metric::bartlett_cca: return "bartlett_cca";
    case Metric::cosine: return "cosine";
    case Metric::euclidean: return "euclidean";
  }
  throw InvalidArgument("metric_name: unknown metric");
}

Metric metric_from_name(const std::string& name) {
  if (name == "mean_cca" || name == "mean-cca") return Metric::mean_cca;
  if (name == "pwcca") return Metric::pwcca;
  if (name == "bartlett_cca" || name == "bartlett-cca" || name == "bartlett")
    return Metric::bartlett_cca;
  if (name == "cosine") return Metric::cosine;
  if (name == "euclidean") return Metric::euclidean;
  throw InvalidArgument("unknown metric '" + name + "'");
}

std::string weight_direction_name(WeightDirection d) {
  switch (d) {
    case WeightDirection::l1_weighted: return "l1_weighted";
    case WeightDirection::l2_weighted: return "l2_weighted";
    case WeightDirection::symmetric: return "symmetric";
  }
  throw InvalidArgument("weight_direction_name: unknown direction");
}

DistanceReport mean_cca_distance(const CcaResult& r) {
  if (r.rho.empty()) {
    throw InvalidArgument("mean_cca_distance: empty coefficient list");
  }
  const double mean =
      std::accumulate(r.rho.begin(), r.rho.end(), 0.0) /
      static_cast<double>(r.rho.size());
  DistanceReport report;
  report.metric = Metric::mean_cca;
  report.distance = std::clamp(1.0 - mean, 0.0, 1.0);
  return report;
}

DistanceReport mean_cca_distance(const ActivationMatrix& l1,
                                 const ActivationMatrix& l2, double eps) {
  return mean_cca_distance(compute_cca(l1, l2, eps));
}

std::vector<double> projection_weights(const CcaResult& r,
                                       const ActivationMatrix& source,
                                       Side side) {
  const Matrix& canonical =
      side == Side::left ? r.left_canonical : r.right_canonical;
  if (source.datapoints() != canonical.cols()) {
    throw ColumnMismatch("projection_weights: source has " +
                         std::to_string(source.datapoints()) +
                         " datapoints, canonical vectors have " +
                         std::to_string(canonical.cols()));
  }

  const GramSchmidtResult gs = gram_schmidt(canonical);
  const Matrix centered = center_rows(source.matrix);

  std::vector<double> raw(canonical.rows(), 0.0);
  if (!gs.kept.empty()) {
    // inner(i, j) = <z_i, h_j> over the source's neuron rows z_i.
    const EigenRowMajor inner = centered.view() * gs.basis.view().transpose();
    for (std::size_t j = 0; j < gs.kept.size(); ++j) {
      raw[gs.kept[j]] =
          inner.col(static_cast<Eigen::Index>(j)).cwiseAbs().sum();
    }
  }

  const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  if (total <= 0.0) {
    throw DegenerateInput(
        "projection_weights: source is orthogonal to every canonical vector");
  }
  for (double& w : raw) w /= total;
  return raw;
}

namespace {

double weighted_distance(const CcaResult& r, const std::vector<double>& w) {
  double acc = 0.0;
  for (std::size_t i = 0; i < r.rho.size(); ++i) acc += w[i] * r.rho[i];
  return std::clamp(1.0 - acc, 0.0, 1.0);
}

}  // namespace

DistanceReport pwcca_distance(const ActivationMatrix& l1,
                              const ActivationMatrix& l2,
                              const PwccaOptions& options) {
  const ActivationMatrix* a = &l1;
  const ActivationMatrix* b = &l2;
  std::optional<ActivationMatrix> pa, pb;
  if (options.preprocess_variance) {
    pa = svcca_preprocess(l1, *options.preprocess_variance);
    pb = svcca_preprocess(l2, *options.preprocess_variance);
    a = &*pa;
    b = &*pb;
  }

  const CcaResult r = compute_cca(*a, *b, options.eps);
  DistanceReport report;
  report.metric = Metric::pwcca;
  report.direction = options.direction;

  switch (options.direction) {
    case WeightDirection::l1_weighted: {
      auto w = projection_weights(r, *a, Side::left);
      report.distance = weighted_distance(r, w);
      report.weights = std::move(w);
      break;
    }
    case WeightDirection::l2_weighted: {
      auto w = projection_weights(r, *b, Side::right);
      report.distance = weighted_distance(r, w);
      report.weights = std::move(w);
      break;
    }
    case WeightDirection::symmetric: {
      const double left = weighted_distance(r, projection_weights(r, *a, Side::left));
      const double right =
          weighted_distance(r, projection_weights(r, *b, Side::right));
      report.distance = 0.5 * (left + right);
      break;
    }
  }
  return report;
}

DistanceReport pwcca_distance(const ActivationMatrix& l1,
                              const ActivationMatrix& l2, double eps) {
  PwccaOptions options;
  options.eps = eps;
  return pwcca_distance(l1, l2, options);
}

double bartlett_statistic(std::span<const double> rho, std::size_t n,
                          std::size_t a, std::size_t b, std::size_t k) {
  const std::size_t c = std::min(a, b);
  if (rho.size() != c) {
    throw InvalidArgument("bartlett_statistic: expected " + std::to_string(c) +
                          " coefficients, got " + std::to_string(rho.size()));
  }
  if (k >= c) {
    throw InvalidArgument("bartlett_statistic: k must be < min(a, b)");
  }
  if (n <= a + b) {
    throw InvalidArgument("bartlett_statistic: need n > a + b");
  }
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (!(rho[i] >= 0.0) || rho[i] >= 1.0) {
      throw InvalidArgument("bartlett_statistic: rho must lie in [0, 1)");
    }
    if (i > 0 && rho[i] > rho[i - 1]) {
      throw InvalidArgument("bartlett_statistic: rho must be nonincreasing");
    }
  }

  double correction = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (rho[i] == 0.0) {
      throw InvalidArgument(
          "bartlett_statistic: rho is zero inside the correction sum");
    }
    correction += 1.0 / (rho[i] * rho[i]);
  }
  double log_prod = 0.0;
  for (std::size_t i = k; i < c; ++i) {
    log_prod += std::log1p(-rho[i] * rho[i]);
  }
  const double factor = static_cast<double>(n) - static_cast<double>(k) -
                        0.5 * static_cast<double>(a + b + 1) + correction;
  return -factor * log_prod;
}

std::size_t estimate_significant_correlations(std::span<const double> rho,
                                              std::size_t n, std::size_t a,
                                              std::size_t b,
                                              double alpha_level) {
  if (!(alpha_level > 0.0) || !(alpha_level < 1.0)) {
    throw InvalidArgument(
        "estimate_significant_correlations: alpha_level must be in (0, 1)");
  }
  const std::size_t c = std::min(a, b);
  if (c == 0) {
    throw InvalidArgument(
        "estimate_significant_correlations: no coefficients to test");
  }
  for (std::size_t k = 0; k < c; ++k) {
    const double t = bartlett_statistic(rho, n, a, b, k);
    const double p = chi_squared_sf(t, (a - k) * (b - k));
    if (p > alpha_level) return k;
  }
  return c;
}

DistanceReport bartlett_cca_distance(const ActivationMatrix& l1,
                                     const ActivationMatrix& l2,
                                     double alpha_level, double eps) {
  const CcaResult r = compute_cca(l1, l2, eps);
  const std::size_t a = r.retained_rank_left;
  const std::size_t b = r.retained_rank_right;
  const std::size_t n = l1.datapoints();

  // The test assumes rho < 1 strictly; coefficients at exactly 1 (identical
  // layers) are nudged inside so they register as significant.
  std::vector<double> clamped(r.rho);
  for (double& v : clamped) v = std::min(v, 1.0 - 1e-12);

  const std::size_t k_hat =
      estimate_significant_correlations(clamped, n, a, b, alpha_level);

  DistanceReport report;
  report.metric = Metric::bartlett_cca;
  report.k_significant = k_hat;
  if (k_hat == 0) {
    report.distance = 1.0;
  } else {
    const double mean =
        std::accumulate(r.rho.begin(),
                        r.rho.begin() + static_cast<std::ptrdiff_t>(k_hat),
                        0.0) /
        static_cast<double>(k_hat);
    report.distance = std::clamp(1.0 - mean, 0.0, 1.0);
  }
  return report;
}

namespace {

void require_same_shape(const ActivationMatrix& l1, const ActivationMatrix& l2,
                        const char* op) {
  if (l1.neurons() != l2.neurons() || l1.datapoints() != l2.datapoints()) {
    throw ShapeMismatch(std::string(op) + ": shapes " +
                        std::to_string(l1.neurons()) + "x" +
                        std::to_string(l1.datapoints()) + " vs " +
                        std::to_string(l2.neurons()) + "x" +
                        std::to_string(l2.datapoints()));
  }
}

}  // namespace

DistanceReport cosine_distance(const ActivationMatrix& l1,
                               const ActivationMatrix& l2) {
  require_same_shape(l1, l2, "cosine_distance");
  const double n1 = l1.matrix.view().norm();
  const double n2 = l2.matrix.view().norm();
  if (n1 == 0.0 || n2 == 0.0) {
    throw ZeroNorm("cosine_distance: zero matrix");
  }
  const double dot = (l1.matrix.view().array() * l2.matrix.view().array()).sum();
  DistanceReport report;
  report.metric = Metric::cosine;
  report.distance = 1.0 - dot / (n1 * n2);
  return report;
}

DistanceReport euclidean_distance(const ActivationMatrix& l1,
                                  const ActivationMatrix& l2) {
  require_same_shape(l1, l2, "euclidean_distance");
  const double raw = (l1.matrix.view() - l2.matrix.view()).norm();
  DistanceReport report;
  report.metric = Metric::euclidean;
  report.raw_distance = raw;
  report.distance =
      raw / std::sqrt(static_cast<double>(l1.neurons() * l1.datapoints()));
  return report;
}

DistanceReport compute_distance(const ActivationMatrix& l1,
                                const ActivationMatrix& l2, Metric metric,
                                double eps, double alpha_level) {
  switch (metric) {
    case Metric::mean_cca: return mean_cca_distance(l1, l2, eps);
    case Metric::pwcca: return pwcca_distance(l1, l2, eps);
    case Metric::bartlett_cca:
      return bartlett_cca_distance(l1, l2, alpha_level, eps);
    case Metric::cosine: return cosine_distance(l1, l2);
    case Metric::euclidean: return euclidean_distance(l1, l2);
  }
  throw InvalidArgument("compute_distance: unknown metric");
}

}  // namespace repsim

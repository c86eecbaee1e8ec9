#include "repsim/synthetic.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <string>

#include "repsim/parallel.hpp"

namespace repsim {

namespace {

// splitmix64: decorrelates per-component sub-seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + (stream + 1) * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

EigenRowMajor random_normal(std::size_t rows, std::size_t cols,
                            std::uint64_t seed, double std_dev = 1.0) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, std_dev);
  EigenRowMajor m(static_cast<Eigen::Index>(rows),
                  static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = normal(engine);
    }
  }
  return m;
}

void validate(const SnrSpec& spec) {
  if (spec.signal_dims == 0 || spec.signal_dims > spec.total_dims) {
    throw InvalidArgument("SnrSpec: need 1 <= signal_dims <= total_dims");
  }
  if (!(spec.noise_std > 0)) {
    throw InvalidArgument("SnrSpec: noise_std must be > 0");
  }
  if (spec.datapoints < 2) {
    throw InvalidArgument("SnrSpec: need >= 2 datapoints");
  }
}

// SVD pruning as the reference SVCCA code applies it for the
// signal/noise comparison: the keep count comes from the cumulative
// unsquared singular values. (svcca_preprocess uses squared mass, which
// strips the noise floor entirely once the signal share passes the
// threshold and flattens the sweep.)
ActivationMatrix prune_by_singular_mass(const ActivationMatrix& l,
                                        double fraction) {
  const Matrix centered = center_rows(l.matrix);
  const SvdResult dec = svd(centered);
  double total = 0.0;
  for (double s : dec.singular_values) total += s;
  if (total == 0.0) {
    throw DegenerateInput("prune_by_singular_mass: matrix has no variance");
  }
  const double target = fraction * total * (1.0 - 1e-12);
  std::size_t keep = 0;
  double cumulative = 0.0;
  for (double s : dec.singular_values) {
    if (s == 0.0) break;
    cumulative += s;
    ++keep;
    if (cumulative >= target) break;
  }
  EigenRowMajor projected(static_cast<Eigen::Index>(keep),
                          static_cast<Eigen::Index>(l.datapoints()));
  for (std::size_t i = 0; i < keep; ++i) {
    projected.row(static_cast<Eigen::Index>(i)) =
        dec.singular_values[i] *
        dec.vt.view().row(static_cast<Eigen::Index>(i));
  }
  return ActivationMatrix(Matrix::from_eigen(projected));
}

}  // namespace

std::pair<ActivationMatrix, ActivationMatrix> make_signal_noise_pair(
    const SnrSpec& spec) {
  validate(spec);
  const std::size_t k = spec.signal_dims;
  const std::size_t total = spec.total_dims;
  const std::size_t n = spec.datapoints;

  const EigenRowMajor signal = random_normal(k, n, mix_seed(spec.seed, 0));
  const Matrix transform = random_orthogonal(k, mix_seed(spec.seed, 1));

  EigenRowMajor x(total, n), y(total, n);
  x.topRows(static_cast<Eigen::Index>(k)) = signal;
  y.topRows(static_cast<Eigen::Index>(k)) = transform.view() * signal;
  if (total > k) {
    const auto noise_rows = static_cast<Eigen::Index>(total - k);
    x.bottomRows(noise_rows) =
        random_normal(total - k, n, mix_seed(spec.seed, 2), spec.noise_std);
    y.bottomRows(noise_rows) =
        random_normal(total - k, n, mix_seed(spec.seed, 3), spec.noise_std);
  }
  return {ActivationMatrix(Matrix::from_eigen(x)),
          ActivationMatrix(Matrix::from_eigen(y))};
}

std::vector<SnrSweepRow> run_snr_sweep(const std::vector<std::size_t>& k_values,
                                       const SnrSpec& spec_template,
                                       const std::vector<std::uint64_t>& seeds) {
  if (k_values.empty()) {
    throw InvalidArgument("run_snr_sweep: k_values must be nonempty");
  }
  if (seeds.empty()) {
    throw InvalidArgument("run_snr_sweep: seeds must be nonempty");
  }

  struct Cell {
    double mean_cca = 0.0;
    double pwcca = 0.0;
    double svcca = 0.0;
  };
  std::vector<Cell> cells(k_values.size() * seeds.size());

  parallel_for(cells.size(), [&](std::size_t idx) {
    SnrSpec spec = spec_template;
    spec.signal_dims = k_values[idx / seeds.size()];
    spec.seed = seeds[idx % seeds.size()];
    const auto [x, y] = make_signal_noise_pair(spec);

    const CcaResult cca = compute_cca(x, y);
    Cell& cell = cells[idx];
    cell.mean_cca = mean_cca_distance(cca).distance;

    const std::vector<double> w = projection_weights(cca, x, Side::left);
    double weighted = 0.0;
    for (std::size_t i = 0; i < cca.rho.size(); ++i) weighted += w[i] * cca.rho[i];
    cell.pwcca = std::clamp(1.0 - weighted, 0.0, 1.0);

    cell.svcca = mean_cca_distance(prune_by_singular_mass(x, 0.99),
                                   prune_by_singular_mass(y, 0.99))
                     .distance;
  });

  std::vector<SnrSweepRow> rows;
  rows.reserve(k_values.size() * 3);
  const char* names[3] = {"mean_cca", "pwcca", "svcca"};
  for (std::size_t ki = 0; ki < k_values.size(); ++ki) {
    for (int metric = 0; metric < 3; ++metric) {
      SnrSweepRow row;
      row.signal_dims = k_values[ki];
      row.metric = names[metric];
      row.per_seed.resize(seeds.size());
      for (std::size_t si = 0; si < seeds.size(); ++si) {
        const Cell& cell = cells[ki * seeds.size() + si];
        row.per_seed[si] = metric == 0   ? cell.mean_cca
                           : metric == 1 ? cell.pwcca
                                         : cell.svcca;
      }
      double sum = 0.0;
      for (double v : row.per_seed) sum += v;
      row.mean = sum / static_cast<double>(row.per_seed.size());
      double ss = 0.0;
      for (double v : row.per_seed) ss += (v - row.mean) * (v - row.mean);
      row.stddev = row.per_seed.size() > 1
                       ? std::sqrt(ss / static_cast<double>(row.per_seed.size() - 1))
                       : 0.0;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

namespace {

void validate(const ToyRnnSpec& spec) {
  if (spec.hidden_dim == 0) {
    throw InvalidArgument("ToyRnnSpec: hidden_dim must be >= 1");
  }
  if (spec.steps == 0) {
    throw InvalidArgument("ToyRnnSpec: steps must be >= 1");
  }
  if (spec.runs < 2) {
    throw InvalidArgument("ToyRnnSpec: runs must be >= 2");
  }
  if (!spec.bias.empty() && spec.bias.size() != spec.hidden_dim) {
    throw InvalidArgument("ToyRnnSpec: bias length != hidden_dim");
  }
  if (spec.blend_alpha < 0) {
    throw InvalidArgument("ToyRnnSpec: blend_alpha must be >= 0");
  }
}

std::vector<ActivationMatrix> simulate(const ToyRnnSpec& spec) {
  validate(spec);
  const Matrix rotation = random_rotation(spec.hidden_dim, mix_seed(spec.seed, 0));
  EigenRowMajor state =
      random_normal(spec.hidden_dim, spec.runs, mix_seed(spec.seed, 1));

  const bool nonlinear = spec.blend_alpha != 0.0;
  EigenRowMajor w_rand;
  if (nonlinear) {
    w_rand = random_normal(spec.hidden_dim, spec.hidden_dim,
                           mix_seed(spec.seed, 2));
  }
  Eigen::VectorXd bias;
  if (!spec.bias.empty()) {
    bias = Eigen::Map<const Eigen::VectorXd>(
        spec.bias.data(), static_cast<Eigen::Index>(spec.bias.size()));
  }

  std::vector<ActivationMatrix> states;
  states.reserve(spec.steps + 1);
  states.emplace_back(Matrix::from_eigen(state));
  for (std::size_t t = 0; t < spec.steps; ++t) {
    EigenRowMajor next = rotation.view() * state;
    if (nonlinear) {
      const EigenRowMajor pre = w_rand * state;
      next += spec.blend_alpha *
              (1.0 / (1.0 + (-pre.array()).exp())).matrix();
    }
    if (bias.size() > 0) {
      next.colwise() += bias;
    }
    if (next.cwiseAbs().maxCoeff() > 1e12) {
      throw NumericalOverflow("toy RNN: hidden value exceeded 1e12 at step " +
                              std::to_string(t + 1));
    }
    state = std::move(next);
    states.emplace_back(Matrix::from_eigen(state));
  }
  return states;
}

}  // namespace

std::vector<ActivationMatrix> simulate_rotation_rnn(const ToyRnnSpec& spec) {
  if (spec.blend_alpha != 0.0) {
    throw InvalidArgument("simulate_rotation_rnn: blend_alpha must be 0");
  }
  return simulate(spec);
}

std::vector<ActivationMatrix> simulate_blended_rnn(const ToyRnnSpec& spec) {
  return simulate(spec);
}

std::vector<double> timestep_distance_profile(
    const std::vector<ActivationMatrix>& states, CurveMetric metric,
    double eps) {
  if (states.size() < 2) {
    throw InvalidArgument("timestep_distance_profile: need >= 2 timesteps");
  }
  const ActivationMatrix& final = states.back();
  std::vector<double> profile(states.size());
  for (std::size_t t = 0; t < states.size(); ++t) {
    profile[t] = checkpoint_distance(states[t], final, metric, eps);
  }
  return profile;
}

}  // namespace repsim

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "repsim/dynamics.hpp"
#include "repsim/similarity.hpp"

namespace repsim {

/// Signal-plus-noise pair generator: k shared signal dimensions out of
/// total_dims, the rest independent low-magnitude noise.
struct SnrSpec {
  std::size_t total_dims = 200;
  std::size_t datapoints = 2000;
  std::size_t signal_dims = 20;
  double noise_std = 0.1;
  std::uint64_t seed = 0;
};

/// X stacks k iid standard-normal signal rows over (total - k) noise rows;
/// Y applies a random orthonormal k x k transform to the same signal rows
/// and stacks fresh noise. Deterministic per seed.
std::pair<ActivationMatrix, ActivationMatrix> make_signal_noise_pair(
    const SnrSpec& spec);

/// One aggregated sweep cell: distance statistics for (k, metric) over the
/// supplied seeds.
struct SnrSweepRow {
  std::size_t signal_dims = 0;
  std::string metric;  // "mean_cca", "pwcca" or "svcca"
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<double> per_seed;
};

/// Distances for every (signal_dims, seed) cell: unweighted mean CCA,
/// projection-weighted CCA, and mean CCA after pruning both sides to the
/// directions holding 99% of the cumulative singular-value mass (svcca,
/// following the reference SVCCA code). Rows come back grouped by k in
/// the order given, metrics in the order mean_cca, pwcca, svcca.
std::vector<SnrSweepRow> run_snr_sweep(const std::vector<std::size_t>& k_values,
                                       const SnrSpec& spec_template,
                                       const std::vector<std::uint64_t>& seeds);

/// Toy recurrent simulator: h_{t+1} = W_rot h_t + alpha * sigmoid(W_rand h_t) + b
/// with W_rot a random rotation and W_rand iid standard normal.
struct ToyRnnSpec {
  std::size_t hidden_dim = 64;
  std::size_t steps = 50;
  std::size_t runs = 1000;
  double blend_alpha = 0.0;
  std::vector<double> bias;  // empty = zero vector
  std::uint64_t seed = 0;
};

/// Pure-rotation case (alpha = 0): hidden-state norms are preserved
/// exactly. Returns states h_0 .. h_steps, each hidden_dim x runs.
std::vector<ActivationMatrix> simulate_rotation_rnn(const ToyRnnSpec& spec);

/// Blended linear/nonlinear update. With alpha = 0 the trajectory is
/// bit-identical to simulate_rotation_rnn. Throws NumericalOverflow if any
/// hidden value exceeds 1e12 in magnitude.
std::vector<ActivationMatrix> simulate_blended_rnn(const ToyRnnSpec& spec);

/// distance(h_t, h_T) for every timestep under the chosen metric; the last
/// entry is the self-distance.
std::vector<double> timestep_distance_profile(
    const std::vector<ActivationMatrix>& states, CurveMetric metric,
    double eps = kDefaultEps);

}  // namespace repsim

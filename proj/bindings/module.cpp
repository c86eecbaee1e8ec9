// Python bindings for the core similarity operations. Matrices cross the
// boundary as 2-D float64 numpy arrays (rows = neurons, cols = datapoints).

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <optional>

#include "repsim/analysis.hpp"
#include "repsim/dynamics.hpp"
#include "repsim/special_functions.hpp"
#include "repsim/io.hpp"
#include "repsim/similarity.hpp"
#include "repsim/synthetic.hpp"
#include "repsim/toy_net.hpp"

namespace py = pybind11;

namespace {

using repsim::ActivationMatrix;
using repsim::Matrix;

Matrix to_matrix(const py::array& array) {
  auto buf = py::array_t<double, py::array::c_style | py::array::forcecast>::
      ensure(array);
  if (!buf || buf.ndim() != 2) {
    throw repsim::InvalidArgument("expected a 2-D real array");
  }
  const auto rows = static_cast<std::size_t>(buf.shape(0));
  const auto cols = static_cast<std::size_t>(buf.shape(1));
  std::vector<double> data(rows * cols);
  std::memcpy(data.data(), buf.data(), rows * cols * sizeof(double));
  return Matrix(rows, cols, std::move(data));
}

ActivationMatrix to_activations(const py::array& array) {
  return ActivationMatrix(to_matrix(array));
}

py::array_t<double> to_numpy(const Matrix& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  std::memcpy(out.mutable_data(), m.data().data(),
              m.data().size() * sizeof(double));
  return out;
}

std::vector<ActivationMatrix> to_activation_list(const py::list& arrays) {
  std::vector<ActivationMatrix> out;
  out.reserve(arrays.size());
  for (const auto& item : arrays) {
    out.push_back(to_activations(item.cast<py::array>()));
  }
  return out;
}

py::list to_numpy_list(const std::vector<ActivationMatrix>& mats) {
  py::list out;
  for (const auto& m : mats) out.append(to_numpy(m.matrix));
  return out;
}

repsim::Side side_from_name(const std::string& name) {
  if (name == "left") return repsim::Side::left;
  if (name == "right") return repsim::Side::right;
  throw repsim::InvalidArgument("side must be 'left' or 'right'");
}

repsim::WeightDirection direction_from_name(const std::string& name) {
  if (name == "l1" || name == "l1_weighted")
    return repsim::WeightDirection::l1_weighted;
  if (name == "l2" || name == "l2_weighted")
    return repsim::WeightDirection::l2_weighted;
  if (name == "symmetric") return repsim::WeightDirection::symmetric;
  throw repsim::InvalidArgument("direction must be l1, l2 or symmetric");
}

py::dict report_to_dict(const repsim::DistanceReport& report) {
  py::dict d;
  d["metric"] = repsim::metric_name(report.metric);
  d["distance"] = report.distance;
  if (report.weights) d["weights"] = *report.weights;
  if (report.k_significant) d["k_significant"] = *report.k_significant;
  if (report.direction) {
    d["direction"] = repsim::weight_direction_name(*report.direction);
  }
  if (report.raw_distance) d["raw_distance"] = *report.raw_distance;
  return d;
}

}  // namespace

PYBIND11_MODULE(_repsim, m) {
  m.doc() =
      "Representational similarity for neural-network activations: CCA, "
      "projection-weighted CCA, Bartlett significance testing, toy "
      "generators and clustering. Activation arrays are neurons x "
      "datapoints.";

  py::register_exception<repsim::Error>(m, "RepsimError", PyExc_ValueError);

  py::class_<repsim::CcaResult>(m, "CcaResult")
      .def_property_readonly(
          "rho",
          [](const repsim::CcaResult& r) { return py::cast(r.rho); })
      .def_property_readonly(
          "left_directions",
          [](const repsim::CcaResult& r) { return to_numpy(r.left_directions); })
      .def_property_readonly(
          "right_directions",
          [](const repsim::CcaResult& r) {
            return to_numpy(r.right_directions);
          })
      .def_property_readonly(
          "left_canonical",
          [](const repsim::CcaResult& r) { return to_numpy(r.left_canonical); })
      .def_property_readonly(
          "right_canonical",
          [](const repsim::CcaResult& r) {
            return to_numpy(r.right_canonical);
          })
      .def_readonly("retained_rank_left", &repsim::CcaResult::retained_rank_left)
      .def_readonly("retained_rank_right",
                    &repsim::CcaResult::retained_rank_right)
      .def("__repr__", [](const repsim::CcaResult& r) {
        return "<CcaResult with " + std::to_string(r.rho.size()) +
               " coefficients>";
      });

  m.def(
      "cca",
      [](const py::array& l1, const py::array& l2, double eps) {
        return repsim::compute_cca(to_activations(l1), to_activations(l2), eps);
      },
      py::arg("l1"), py::arg("l2"), py::arg("eps") = repsim::kDefaultEps,
      "Full CCA decomposition between two activation matrices.");

  m.def(
      "svcca_preprocess",
      [](const py::array& l, double variance_fraction) {
        return to_numpy(
            repsim::svcca_preprocess(to_activations(l), variance_fraction)
                .matrix);
      },
      py::arg("l"), py::arg("variance_fraction") = 0.99,
      "SVD pruning: top directions holding the given variance fraction.");

  m.def(
      "mean_cca_distance",
      [](const py::array& l1, const py::array& l2, double eps) {
        return report_to_dict(repsim::mean_cca_distance(
            to_activations(l1), to_activations(l2), eps));
      },
      py::arg("l1"), py::arg("l2"), py::arg("eps") = repsim::kDefaultEps);

  m.def(
      "pwcca_distance",
      [](const py::array& l1, const py::array& l2, double eps,
         const std::string& direction, std::optional<double> preprocess) {
        repsim::PwccaOptions options;
        options.eps = eps;
        options.direction = direction_from_name(direction);
        options.preprocess_variance = preprocess;
        return report_to_dict(
            repsim::pwcca_distance(to_activations(l1), to_activations(l2),
                                   options));
      },
      py::arg("l1"), py::arg("l2"), py::arg("eps") = repsim::kDefaultEps,
      py::arg("direction") = "l1",
      py::arg("preprocess_variance") = std::nullopt,
      "Projection-weighted CCA distance (weights from l1 by default).");

  m.def(
      "projection_weights",
      [](const repsim::CcaResult& r, const py::array& source,
         const std::string& side) {
        return repsim::projection_weights(r, to_activations(source),
                                          side_from_name(side));
      },
      py::arg("result"), py::arg("source"), py::arg("side") = "left");

  m.def(
      "bartlett_statistic",
      [](const std::vector<double>& rho, std::size_t n, std::size_t a,
         std::size_t b, std::size_t k) {
        return repsim::bartlett_statistic(rho, n, a, b, k);
      },
      py::arg("rho"), py::arg("n"), py::arg("a"), py::arg("b"), py::arg("k"));

  m.def(
      "estimate_significant_correlations",
      [](const std::vector<double>& rho, std::size_t n, std::size_t a,
         std::size_t b, double alpha_level) {
        return repsim::estimate_significant_correlations(rho, n, a, b,
                                                         alpha_level);
      },
      py::arg("rho"), py::arg("n"), py::arg("a"), py::arg("b"),
      py::arg("alpha_level") = 0.05);

  m.def(
      "bartlett_cca_distance",
      [](const py::array& l1, const py::array& l2, double alpha_level,
         double eps) {
        return report_to_dict(repsim::bartlett_cca_distance(
            to_activations(l1), to_activations(l2), alpha_level, eps));
      },
      py::arg("l1"), py::arg("l2"), py::arg("alpha_level") = 0.05,
      py::arg("eps") = repsim::kDefaultEps);

  m.def(
      "cosine_distance",
      [](const py::array& l1, const py::array& l2) {
        return report_to_dict(
            repsim::cosine_distance(to_activations(l1), to_activations(l2)));
      },
      py::arg("l1"), py::arg("l2"));

  m.def(
      "euclidean_distance",
      [](const py::array& l1, const py::array& l2) {
        return report_to_dict(
            repsim::euclidean_distance(to_activations(l1), to_activations(l2)));
      },
      py::arg("l1"), py::arg("l2"));

  m.def("chi_squared_sf", &repsim::chi_squared_sf, py::arg("x"),
        py::arg("dof"), "Chi-squared survival function P(X > x).");

  m.def(
      "random_rotation",
      [](std::size_t dim, std::uint64_t seed) {
        return to_numpy(repsim::random_rotation(dim, seed));
      },
      py::arg("dim"), py::arg("seed"));

  m.def(
      "make_signal_noise_pair",
      [](std::size_t signal_dims, std::size_t total_dims,
         std::size_t datapoints, double noise_std, std::uint64_t seed) {
        repsim::SnrSpec spec;
        spec.signal_dims = signal_dims;
        spec.total_dims = total_dims;
        spec.datapoints = datapoints;
        spec.noise_std = noise_std;
        spec.seed = seed;
        auto [x, y] = repsim::make_signal_noise_pair(spec);
        return py::make_tuple(to_numpy(x.matrix), to_numpy(y.matrix));
      },
      py::arg("signal_dims"), py::arg("total_dims") = 200,
      py::arg("datapoints") = 2000, py::arg("noise_std") = 0.1,
      py::arg("seed") = 0,
      "Shared-signal pair: X and an orthonormally transformed Y.");

  m.def(
      "simulate_rotation_rnn",
      [](std::size_t hidden_dim, std::size_t steps, std::size_t runs,
         std::uint64_t seed) {
        repsim::ToyRnnSpec spec;
        spec.hidden_dim = hidden_dim;
        spec.steps = steps;
        spec.runs = runs;
        spec.seed = seed;
        return to_numpy_list(repsim::simulate_rotation_rnn(spec));
      },
      py::arg("hidden_dim") = 64, py::arg("steps") = 50,
      py::arg("runs") = 1000, py::arg("seed") = 0);

  m.def(
      "simulate_blended_rnn",
      [](std::size_t hidden_dim, std::size_t steps, std::size_t runs,
         double alpha, std::uint64_t seed) {
        repsim::ToyRnnSpec spec;
        spec.hidden_dim = hidden_dim;
        spec.steps = steps;
        spec.runs = runs;
        spec.blend_alpha = alpha;
        spec.seed = seed;
        return to_numpy_list(repsim::simulate_blended_rnn(spec));
      },
      py::arg("hidden_dim") = 64, py::arg("steps") = 50,
      py::arg("runs") = 1000, py::arg("alpha") = 0.0, py::arg("seed") = 0);

  m.def(
      "timestep_distance_profile",
      [](const py::list& states, const std::string& metric, double eps) {
        return repsim::timestep_distance_profile(
            to_activation_list(states),
            repsim::curve_metric_from_name(metric), eps);
      },
      py::arg("states"), py::arg("metric") = "pwcca",
      py::arg("eps") = repsim::kDefaultEps);

  m.def(
      "group_by_sequence_step",
      [](const py::array& output, std::size_t period) {
        return to_numpy_list(
            repsim::group_by_sequence_step(to_activations(output), period));
      },
      py::arg("output"), py::arg("period"),
      "Partition columns by index modulo period.");

  m.def(
      "pairwise_distance_matrix",
      [](const py::list& layers, const std::string& metric, double eps) {
        const repsim::DistanceMatrix d = repsim::pairwise_distance_matrix(
            to_activation_list(layers), repsim::metric_from_name(metric), eps);
        return py::make_tuple(d.labels, to_numpy(d.values));
      },
      py::arg("layers"), py::arg("metric") = "pwcca",
      py::arg("eps") = repsim::kDefaultEps,
      "All ordered pairwise distances; returns (labels, matrix).");

  m.def(
      "agglomerative_cluster",
      [](const py::array& distances, std::optional<std::size_t> k) {
        const Matrix values = to_matrix(distances);
        std::vector<std::string> labels;
        for (std::size_t i = 0; i < values.rows(); ++i) {
          labels.push_back(std::to_string(i));
        }
        const repsim::ClusterAssignment c = repsim::agglomerative_cluster(
            repsim::DistanceMatrix(std::move(labels), values), k);
        py::dict out;
        out["assignments"] = c.assignments;
        out["merge_heights"] = c.merge_heights;
        out["chosen_k"] = c.chosen_k;
        return out;
      },
      py::arg("distances"), py::arg("k") = std::nullopt,
      "Average-linkage clustering of a square distance matrix.");

  m.def(
      "pearson_correlation",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        return repsim::pearson_correlation(x, y);
      },
      py::arg("x"), py::arg("y"));

  m.def(
      "make_dataset",
      [](std::size_t features, std::size_t classes, std::size_t per_class,
         double spread, std::uint64_t seed) {
        const repsim::SyntheticDataset d =
            repsim::make_dataset(features, classes, per_class, spread, seed);
        py::dict out;
        out["inputs"] = to_numpy(d.inputs);
        out["labels"] = d.labels;
        out["classes"] = d.classes;
        return out;
      },
      py::arg("features"), py::arg("classes"), py::arg("per_class"),
      py::arg("spread") = 1.0, py::arg("seed") = 0);

  m.def(
      "train_mlp",
      [](const std::vector<std::size_t>& layer_widths,
         const std::string& activation, std::uint64_t net_seed,
         const py::array& inputs, const std::vector<std::size_t>& labels,
         std::size_t classes, double learning_rate, std::size_t epochs,
         std::size_t batch_size, std::size_t checkpoint_every,
         const py::object& probe) {
        repsim::MlpSpec spec;
        spec.layer_widths = layer_widths;
        spec.activation = repsim::activation_from_name(activation);
        spec.seed = net_seed;
        repsim::SyntheticDataset data;
        data.inputs = to_matrix(inputs);
        data.labels = labels;
        data.classes = classes;
        repsim::TrainConfig config;
        config.learning_rate = learning_rate;
        config.epochs = epochs;
        config.batch_size = batch_size;
        config.checkpoint_every = checkpoint_every;
        const Matrix probe_m =
            probe.is_none() ? data.inputs : to_matrix(probe.cast<py::array>());
        const repsim::TrainResult result =
            repsim::train_mlp(spec, data, config, probe_m);
        py::list checkpoints;
        for (const auto& cp : result.checkpoints) {
          py::dict entry;
          entry["step"] = cp.step;
          entry["train_loss"] = cp.train_loss;
          py::list acts;
          for (const auto& a : cp.per_layer_activations) {
            acts.append(to_numpy(a.matrix));
          }
          entry["activations"] = acts;
          checkpoints.append(entry);
        }
        return checkpoints;
      },
      py::arg("layer_widths"), py::arg("activation"), py::arg("net_seed"),
      py::arg("inputs"), py::arg("labels"), py::arg("classes"),
      py::arg("learning_rate") = 0.1, py::arg("epochs") = 100,
      py::arg("batch_size") = 32, py::arg("checkpoint_every") = 0,
      py::arg("probe") = py::none(),
      "Train a toy MLP with SGD; returns the checkpoint list.");

  m.def(
      "subsample_rows",
      [](const py::array& layer, std::size_t count, std::uint64_t seed) {
        return to_numpy(
            repsim::subsample_rows(to_activations(layer), count, seed).matrix);
      },
      py::arg("layer"), py::arg("count"), py::arg("seed"));

  m.def(
      "load_activations",
      [](const std::string& path, bool transpose) {
        return to_numpy(repsim::load_activations(path, transpose).matrix);
      },
      py::arg("path"), py::arg("transpose") = false,
      "Load a .npy (v1.0, 2-D real) or CSV activation file.");

  m.def(
      "save_activations",
      [](const std::string& path, const py::array& activations) {
        repsim::save_activations(path, to_activations(activations));
      },
      py::arg("path"), py::arg("activations"));
}

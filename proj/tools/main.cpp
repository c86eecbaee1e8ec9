// repsim command line: representational-similarity experiments backed by
// canonical correlation analysis. One subcommand per experiment recipe;
// see README.md for the file formats.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "repsim/errors.hpp"
#include "repsim/recipes.hpp"

namespace {

using nlohmann::json;

// Flags land here only when the user passed them, so precedence is
// flags > config file > recipe defaults.
struct OptionBag {
  json values = json::object();
  std::string config_path;
  std::vector<std::uint64_t> seeds{1};
  std::string output_dir;
  CLI::Option* seeds_option = nullptr;
  CLI::Option* output_option = nullptr;

  json merged() const {
    json base = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) {
        throw repsim::UsageError("cannot open config file " + config_path);
      }
      try {
        base = json::parse(in);
      } catch (const json::parse_error& e) {
        throw repsim::UsageError("config file " + config_path + ": " +
                                 e.what());
      }
      if (!base.is_object()) {
        throw repsim::UsageError("config file must hold a JSON object");
      }
    }
    for (const auto& [key, value] : values.items()) {
      base[key] = value;
    }
    return base;
  }
};

void add_common_flags(CLI::App* cmd, OptionBag& bag,
                      const std::string& default_out) {
  bag.output_dir = default_out;
  cmd->add_option("--config", bag.config_path,
                  "JSON config file; explicit flags override its values");
  bag.seeds_option =
      cmd->add_option("--seeds", bag.seeds, "Seeds (one run per seed)")
          ->expected(-1);
  bag.output_option =
      cmd->add_option("-o,--output-dir", bag.output_dir, "Output directory")
          ->capture_default_str();
}

// Registers a flag that writes into the parameter bag when given.
template <class T>
void param_option(CLI::App* cmd, OptionBag& bag, const std::string& flag,
                  const std::string& key, const std::string& help) {
  auto holder = std::make_shared<T>();
  cmd->add_option_function<T>(
         flag,
         [&bag, key](const T& value) { bag.values[key] = value; }, help)
      ->expected(std::is_same_v<T, std::vector<double>> ||
                         std::is_same_v<T, std::vector<std::size_t>> ||
                         std::is_same_v<T, std::vector<std::string>>
                     ? -1
                     : 1);
}

void param_flag(CLI::App* cmd, OptionBag& bag, const std::string& flag,
                const std::string& key, const std::string& help) {
  cmd->add_flag_callback(
      flag, [&bag, key]() { bag.values[key] = true; }, help);
}

int run(repsim::Recipe recipe, const OptionBag& bag) {
  repsim::ExperimentSpec spec;
  spec.recipe = recipe;
  spec.parameters = bag.merged();
  // Config may also carry seeds / output_dir; explicit flags win.
  spec.seeds = bag.seeds;
  if (spec.parameters.contains("seeds")) {
    if (bag.seeds_option == nullptr || bag.seeds_option->count() == 0) {
      spec.seeds = spec.parameters["seeds"].get<std::vector<std::uint64_t>>();
    }
    spec.parameters.erase("seeds");
  }
  spec.output_dir = bag.output_dir;
  if (spec.parameters.contains("output_dir")) {
    if (bag.output_option == nullptr || bag.output_option->count() == 0) {
      spec.output_dir = spec.parameters["output_dir"].get<std::string>();
    }
    spec.parameters.erase("output_dir");
  }
  return repsim::run_recipe(spec);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "repsim: compare neural-network representations with CCA-based "
      "distances (PWCCA, mean CCA, Bartlett-truncated CCA) plus cosine and "
      "Euclidean baselines. REPSIM_THREADS caps worker threads."};
  app.name("repsim");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Print help for every subcommand");

  // ---- compare ----
  OptionBag compare_bag;
  auto* compare = app.add_subcommand(
      "compare", "Distance between two activation files (.npy or .csv)");
  std::string compare_left, compare_right;
  compare->add_option("left", compare_left, "First activation file")
      ->required();
  compare->add_option("right", compare_right, "Second activation file")
      ->required();
  add_common_flags(compare, compare_bag, "repsim_out/compare");
  param_option<std::string>(compare, compare_bag, "--metric", "metric",
                            "pwcca | mean_cca | bartlett | cosine | euclidean");
  param_flag(compare, compare_bag, "--transpose", "transpose",
             "Treat file rows as datapoints instead of neurons");
  param_option<double>(compare, compare_bag, "--eps", "eps",
                       "Relative eigenvalue cutoff for whitening");
  param_option<double>(compare, compare_bag, "--alpha-level", "alpha_level",
                       "Significance level for the Bartlett test");
  param_option<double>(compare, compare_bag, "--preprocess-variance",
                       "preprocess_variance",
                       "SVD-threshold both layers at this variance fraction "
                       "before PWCCA (0 = off)");

  // ---- pairwise ----
  OptionBag pairwise_bag;
  auto* pairwise = app.add_subcommand(
      "pairwise", "Pairwise distance matrix over many activation files");
  std::vector<std::string> pairwise_inputs;
  pairwise->add_option("inputs", pairwise_inputs, "Activation files (>= 2)")
      ->required()
      ->expected(-1);
  add_common_flags(pairwise, pairwise_bag, "repsim_out/pairwise");
  param_option<std::string>(pairwise, pairwise_bag, "--metric", "metric",
                            "pwcca | mean_cca | bartlett | cosine | euclidean");
  param_flag(pairwise, pairwise_bag, "--transpose", "transpose",
             "Treat file rows as datapoints instead of neurons");
  param_option<double>(pairwise, pairwise_bag, "--eps", "eps",
                       "Relative eigenvalue cutoff for whitening");
  param_option<std::vector<std::string>>(pairwise, pairwise_bag, "--labels",
                                         "labels", "Labels per input file");

  // ---- snr-sweep ----
  OptionBag snr_bag;
  auto* snr = app.add_subcommand(
      "snr-sweep",
      "Signal/noise sweep: mean CCA vs PWCCA vs SVCCA distance as the "
      "shared-signal dimensionality varies");
  add_common_flags(snr, snr_bag, "repsim_out/snr_sweep");
  param_option<std::vector<std::size_t>>(snr, snr_bag, "--k-values",
                                         "k_values",
                                         "Signal dimensionalities to sweep");
  param_option<std::size_t>(snr, snr_bag, "--total-dims", "total_dims",
                            "Rows per generated layer");
  param_option<std::size_t>(snr, snr_bag, "--datapoints", "datapoints",
                            "Columns per generated layer");
  param_option<double>(snr, snr_bag, "--noise-std", "noise_std",
                       "Stddev of the noise rows");

  // ---- rnn-toy ----
  OptionBag rnn_bag;
  auto* rnn = app.add_subcommand(
      "rnn-toy",
      "Rotation / blended toy RNN: distance of each hidden state to the "
      "final state per metric");
  add_common_flags(rnn, rnn_bag, "repsim_out/rnn_toy");
  param_option<std::size_t>(rnn, rnn_bag, "--hidden-dim", "hidden_dim",
                            "Hidden units");
  param_option<std::size_t>(rnn, rnn_bag, "--steps", "steps", "Timesteps");
  param_option<std::size_t>(rnn, rnn_bag, "--runs", "runs",
                            "Independent runs (datapoints)");
  param_option<double>(rnn, rnn_bag, "--alpha", "alpha",
                       "Nonlinear blend factor (0 = pure rotation)");
  param_option<std::vector<std::string>>(rnn, rnn_bag, "--metrics", "metrics",
                                         "Metrics to profile");

  // ---- train-group ----
  OptionBag group_bag;
  auto* group = app.add_subcommand(
      "train-group",
      "Train groups of toy MLPs and compare representations (gen-mem, "
      "width-sweep or lr-sweep)");
  std::string group_experiment = "gen-mem";
  group
      ->add_option("--experiment", group_experiment,
                   "gen-mem | width-sweep | lr-sweep")
      ->capture_default_str();
  add_common_flags(group, group_bag, "repsim_out/train_group");
  param_option<std::size_t>(group, group_bag, "--features", "features",
                            "Input features");
  param_option<std::size_t>(group, group_bag, "--classes", "classes",
                            "Class count");
  param_option<std::size_t>(group, group_bag, "--per-class", "per_class",
                            "Training examples per class");
  param_option<std::size_t>(group, group_bag, "--test-per-class",
                            "test_per_class", "Held-out examples per class");
  param_option<double>(group, group_bag, "--spread", "spread",
                       "Within-class stddev");
  param_option<std::vector<std::size_t>>(group, group_bag, "--hidden",
                                         "hidden", "Hidden layer widths");
  param_option<std::string>(group, group_bag, "--activation", "activation",
                            "relu | tanh");
  param_option<double>(group, group_bag, "--learning-rate", "learning_rate",
                       "SGD learning rate");
  param_option<std::size_t>(group, group_bag, "--epochs", "epochs",
                            "Training epochs");
  param_option<std::size_t>(group, group_bag, "--batch-size", "batch_size",
                            "Mini-batch size");
  param_option<std::size_t>(group, group_bag, "--group-size", "group_size",
                            "Networks per group");
  param_option<std::string>(group, group_bag, "--probe", "probe",
                            "Probe data: train | test (gen-mem)");
  param_option<std::vector<double>>(group, group_bag, "--lambdas", "lambdas",
                                    "Width multipliers (width-sweep)");
  param_option<std::size_t>(group, group_bag, "--subsample", "subsample",
                            "Row subsample size for distances (width-sweep)");
  param_option<double>(group, group_bag, "--preprocess-variance",
                       "preprocess_variance",
                       "SVD-threshold activations at this variance fraction "
                       "before distances (0 = off)");
  param_option<std::vector<double>>(group, group_bag, "--learning-rates",
                                    "learning_rates",
                                    "Learning rates (lr-sweep)");
  param_option<std::size_t>(group, group_bag, "--nets-per-rate",
                            "nets_per_rate", "Networks per rate (lr-sweep)");
  param_option<std::size_t>(group, group_bag, "--cluster-k", "cluster_k",
                            "Cluster count for lr-sweep (0 = auto)");

  // ---- convergence ----
  OptionBag conv_bag;
  auto* conv = app.add_subcommand(
      "convergence",
      "Per-layer distance of checkpoints to the final representation, from "
      "a fresh toy-net training or a checkpoint directory");
  add_common_flags(conv, conv_bag, "repsim_out/convergence");
  param_option<std::string>(conv, conv_bag, "--checkpoint-dir",
                            "checkpoint_dir",
                            "Load checkpoints instead of training");
  param_option<std::string>(conv, conv_bag, "--checkpoint-out",
                            "checkpoint_out",
                            "Also persist training checkpoints here");
  param_option<std::string>(conv, conv_bag, "--metric", "metric",
                            "pwcca | mean_cca | cosine | euclidean");
  param_option<std::size_t>(conv, conv_bag, "--checkpoints", "checkpoints",
                            "How many log-spaced checkpoints to record");
  param_option<std::size_t>(conv, conv_bag, "--features", "features",
                            "Input features");
  param_option<std::size_t>(conv, conv_bag, "--classes", "classes",
                            "Class count");
  param_option<std::size_t>(conv, conv_bag, "--per-class", "per_class",
                            "Training examples per class");
  param_option<double>(conv, conv_bag, "--spread", "spread",
                       "Within-class stddev");
  param_option<std::vector<std::size_t>>(conv, conv_bag, "--hidden", "hidden",
                                         "Hidden layer widths");
  param_option<std::string>(conv, conv_bag, "--activation", "activation",
                            "relu | tanh");
  param_option<double>(conv, conv_bag, "--learning-rate", "learning_rate",
                       "SGD learning rate");
  param_option<std::size_t>(conv, conv_bag, "--epochs", "epochs",
                            "Training epochs");
  param_option<std::size_t>(conv, conv_bag, "--batch-size", "batch_size",
                            "Mini-batch size");

  // ---- stability ----
  OptionBag stab_bag;
  auto* stab = app.add_subcommand(
      "stability",
      "Stable/unstable subspace split: similarity of both sets to every "
      "checkpoint");
  add_common_flags(stab, stab_bag, "repsim_out/stability");
  param_option<std::string>(stab, stab_bag, "--checkpoint-dir",
                            "checkpoint_dir",
                            "Load checkpoints instead of training");
  param_option<std::size_t>(stab, stab_bag, "--layer", "layer",
                            "Layer index to analyze");
  param_option<std::int64_t>(stab, stab_bag, "--t-early", "t_early",
                             "Early checkpoint step (default: second "
                             "checkpoint)");
  param_option<std::size_t>(stab, stab_bag, "--m", "m",
                            "Vectors per side (0 = auto)");
  param_option<std::string>(stab, stab_bag, "--anchor", "anchor",
                            "early | midpoint (which side's vectors to keep)");
  param_option<std::size_t>(stab, stab_bag, "--features", "features",
                            "Input features");
  param_option<std::size_t>(stab, stab_bag, "--classes", "classes",
                            "Class count");
  param_option<std::size_t>(stab, stab_bag, "--per-class", "per_class",
                            "Training examples per class");
  param_option<std::vector<std::size_t>>(stab, stab_bag, "--hidden", "hidden",
                                         "Hidden layer widths");
  param_option<double>(stab, stab_bag, "--learning-rate", "learning_rate",
                       "SGD learning rate");
  param_option<std::size_t>(stab, stab_bag, "--epochs", "epochs",
                            "Training epochs");

  // ---- cluster ----
  auto* cluster = app.add_subcommand(
      "cluster",
      "Average-linkage clustering of a saved distance matrix (.json or "
      "square CSV)");
  std::string cluster_matrix;
  std::size_t cluster_k = 0;
  std::string cluster_out = "repsim_out/cluster";
  cluster->add_option("matrix", cluster_matrix, "Distance matrix file")
      ->required();
  cluster->add_option("-k,--clusters", cluster_k,
                      "Cluster count (0 = choose by largest height gap)");
  cluster->add_option("-o,--output-dir", cluster_out, "Output directory")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (compare->parsed()) {
      compare_bag.values["left"] = compare_left;
      compare_bag.values["right"] = compare_right;
      return run(repsim::Recipe::compare, compare_bag);
    }
    if (pairwise->parsed()) {
      pairwise_bag.values["inputs"] = pairwise_inputs;
      return run(repsim::Recipe::pairwise, pairwise_bag);
    }
    if (snr->parsed()) return run(repsim::Recipe::snr_sweep, snr_bag);
    if (rnn->parsed()) return run(repsim::Recipe::rnn_toy, rnn_bag);
    if (group->parsed()) {
      repsim::Recipe recipe;
      if (group_experiment == "gen-mem" || group_experiment == "gen_mem") {
        recipe = repsim::Recipe::gen_mem;
      } else if (group_experiment == "width-sweep" ||
                 group_experiment == "width_sweep") {
        recipe = repsim::Recipe::width_sweep;
      } else if (group_experiment == "lr-sweep" ||
                 group_experiment == "lr_sweep") {
        recipe = repsim::Recipe::lr_sweep;
      } else {
        std::cerr << "usage error: unknown experiment '" << group_experiment
                  << "'\n";
        return 2;
      }
      return run(recipe, group_bag);
    }
    if (conv->parsed()) return run(repsim::Recipe::convergence, conv_bag);
    if (stab->parsed()) return run(repsim::Recipe::stability_split, stab_bag);
    if (cluster->parsed()) {
      return repsim::run_cluster_command(
          cluster_matrix,
          cluster_k > 0 ? std::optional<std::size_t>(cluster_k) : std::nullopt,
          cluster_out);
    }
  } catch (const repsim::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const repsim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

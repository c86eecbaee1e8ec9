#include "repsim/recipes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "repsim/io.hpp"
#include "repsim/parallel.hpp"
#include "repsim/synthetic.hpp"

namespace repsim {

std::string recipe_name(Recipe r) {
  switch (r) {
    case Recipe::snr_sweep: return "snr_sweep";
    case Recipe::rnn_toy: return "rnn_toy";
    case Recipe::gen_mem: return "gen_mem";
    case Recipe::width_sweep: return "width_sweep";
    case Recipe::lr_sweep: return "lr_sweep";
    case Recipe::convergence: return "convergence";
    case Recipe::stability_split: return "stability_split";
    case Recipe::pairwise: return "pairwise";
    case Recipe::compare: return "compare";
  }
  throw InvalidArgument("recipe_name: unknown recipe");
}

Recipe recipe_from_name(const std::string& name) {
  static const std::map<std::string, Recipe> table = {
      {"snr_sweep", Recipe::snr_sweep},   {"snr-sweep", Recipe::snr_sweep},
      {"rnn_toy", Recipe::rnn_toy},       {"rnn-toy", Recipe::rnn_toy},
      {"gen_mem", Recipe::gen_mem},       {"gen-mem", Recipe::gen_mem},
      {"width_sweep", Recipe::width_sweep},
      {"width-sweep", Recipe::width_sweep},
      {"lr_sweep", Recipe::lr_sweep},     {"lr-sweep", Recipe::lr_sweep},
      {"convergence", Recipe::convergence},
      {"stability_split", Recipe::stability_split},
      {"stability", Recipe::stability_split},
      {"pairwise", Recipe::pairwise},
      {"compare", Recipe::compare},
  };
  const auto it = table.find(name);
  if (it == table.end()) {
    throw UsageError("unknown recipe '" + name + "'");
  }
  return it->second;
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + (stream + 1) * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Reads recipe parameters with defaults, recording every resolved value
// for provenance.
class Params {
 public:
  explicit Params(const nlohmann::json& in) : in_(in) {
    if (!in.is_object() && !in.is_null()) {
      throw UsageError("parameters must be a JSON object");
    }
  }

  template <class T>
  T get(const std::string& key, const T& fallback) {
    T value = fallback;
    if (in_.contains(key)) {
      try {
        value = in_.at(key).get<T>();
      } catch (const nlohmann::json::exception&) {
        throw UsageError("parameter '" + key + "' has the wrong type");
      }
    }
    resolved_[key] = value;
    return value;
  }

  template <class T>
  T require(const std::string& key) {
    if (!in_.contains(key)) {
      throw UsageError("missing required parameter '" + key + "'");
    }
    try {
      T value = in_.at(key).get<T>();
      resolved_[key] = value;
      return value;
    } catch (const nlohmann::json::exception&) {
      throw UsageError("parameter '" + key + "' has the wrong type");
    }
  }

  bool has(const std::string& key) const { return in_.contains(key); }
  const nlohmann::json& resolved() const { return resolved_; }

 private:
  nlohmann::json in_;
  nlohmann::json resolved_ = nlohmann::json::object();
};

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
  out << text;
  if (!out.good()) throw IoFailure("write error on " + path.string());
}

// Plot-ready CSV: x, mean, std.
void write_plot_csv(const std::filesystem::path& path,
                    const std::string& x_name,
                    const std::vector<std::array<double, 3>>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << x_name << ",mean,std\n";
  for (const auto& r : rows) out << r[0] << ',' << r[1] << ',' << r[2] << '\n';
  write_text(path, out.str());
}

void save_resolved_spec(const ExperimentSpec& spec, const Params& params) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["recipe"] = recipe_name(spec.recipe);
  j["parameters"] = params.resolved();
  j["seeds"] = spec.seeds;
  write_text(spec.output_dir / "resolved_spec.json", j.dump(2) + "\n");
}

nlohmann::json provenance_of(const ExperimentSpec& spec, const Params& params) {
  nlohmann::json j;
  j["recipe"] = recipe_name(spec.recipe);
  j["parameters"] = params.resolved();
  j["seeds"] = spec.seeds;
  return j;
}

// ---------------------------------------------------------------------------
// snr_sweep
// ---------------------------------------------------------------------------

void run_snr_sweep_recipe(const ExperimentSpec& spec) {
  Params params(spec.parameters);
  SnrSpec tpl;
  tpl.total_dims = params.get<std::size_t>("total_dims", 200);
  tpl.datapoints = params.get<std::size_t>("datapoints", 2000);
  tpl.noise_std = params.get<double>("noise_std", 0.1);
  const auto k_values = params.get<std::vector<std::size_t>>(
      "k_values", {20, 50, 70, 80, 100, 120, 140, 160, 180, 199});

  const std::vector<SnrSweepRow> rows =
      run_snr_sweep(k_values, tpl, spec.seeds);

  std::ostringstream raw;
  raw.precision(17);
  raw << "k,metric,seed,distance\n";
  for (const auto& row : rows) {
    for (std::size_t si = 0; si < spec.seeds.size(); ++si) {
      raw << row.signal_dims << ',' << row.metric << ',' << spec.seeds[si]
          << ',' << row.per_seed[si] << '\n';
    }
  }
  write_text(spec.output_dir / "snr_sweep_raw.csv", raw.str());

  std::ostringstream summary;
  summary.precision(17);
  summary << "k,metric,mean,std\n";
  for (const auto& row : rows) {
    summary << row.signal_dims << ',' << row.metric << ',' << row.mean << ','
            << row.stddev << '\n';
  }
  write_text(spec.output_dir / "snr_sweep_summary.csv", summary.str());

  for (const char* metric : {"mean_cca", "pwcca", "svcca"}) {
    std::vector<std::array<double, 3>> plot;
    for (const auto& row : rows) {
      if (row.metric == metric) {
        plot.push_back({static_cast<double>(row.signal_dims), row.mean,
                        row.stddev});
      }
    }
    write_plot_csv(spec.output_dir /
                       ("snr_sweep_" + std::string(metric) + ".csv"),
                   "k", plot);
  }
  save_resolved_spec(spec, params);
  std::cout << "snr_sweep: wrote " << rows.size() << " summary rows to "
            << spec.output_dir.string() << "\n";
}

// ---------------------------------------------------------------------------
// rnn_toy
// ---------------------------------------------------------------------------

void run_rnn_toy_recipe(const ExperimentSpec& spec) {
  Params params(spec.parameters);
  ToyRnnSpec tpl;
  tpl.hidden_dim = params.get<std::size_t>("hidden_dim", 64);
  tpl.steps = params.get<std::size_t>("steps", 50);
  tpl.runs = params.get<std::size_t>("runs", 1000);
  tpl.blend_alpha = params.get<double>("alpha", 0.0);
  const double eps = params.get<double>("eps", kDefaultEps);
  const auto metric_names = params.get<std::vector<std::string>>(
      "metrics", {"pwcca", "mean_cca", "cosine", "euclidean"});

  std::vector<CurveMetric> metrics;
  for (const auto& name : metric_names) {
    metrics.push_back(curve_metric_from_name(name));
  }

  // profiles[metric][seed] = distance per timestep.
  std::vector<std::vector<std::vector<double>>> profiles(
      metrics.size(), std::vector<std::vector<double>>(spec.seeds.size()));
  parallel_for(spec.seeds.size(), [&](std::size_t si) {
    ToyRnnSpec s = tpl;
    s.seed = spec.seeds[si];
    const std::vector<ActivationMatrix> states = simulate_blended_rnn(s);
    for (std::size_t mi = 0; mi < metrics.size(); ++mi) {
      profiles[mi][si] = timestep_distance_profile(states, metrics[mi], eps);
    }
  });

  for (std::size_t mi = 0; mi < metrics.size(); ++mi) {
    std::vector<std::array<double, 3>> plot;
    const std::size_t timesteps = profiles[mi][0].size();
    for (std::size_t t = 0; t < timesteps; ++t) {
      std::vector<double> at;
      at.reserve(spec.seeds.size());
      for (const auto& per_seed : profiles[mi]) at.push_back(per_seed[t]);
      plot.push_back({static_cast<double>(t), mean_of(at), stddev_of(at)});
    }
    write_plot_csv(spec.output_dir /
                       ("rnn_toy_" + curve_metric_name(metrics[mi]) + ".csv"),
                   "t", plot);
  }
  save_resolved_spec(spec, params);
  std::cout << "rnn_toy: wrote " << metrics.size() << " profiles to "
            << spec.output_dir.string() << "\n";
}

// ---------------------------------------------------------------------------
// shared toy-net helpers
// ---------------------------------------------------------------------------

struct DatasetSplit {
  SyntheticDataset train;
  SyntheticDataset test;
};

// One generator call so train and test share the class means; columns are
// split per class.
DatasetSplit make_split_dataset(std::size_t features, std::size_t classes,
                                std::size_t train_per_class,
                                std::size_t test_per_class, double spread,
                                std::uint64_t seed) {
  const SyntheticDataset all = make_dataset(
      features, classes, train_per_class + test_per_class, spread, seed);
  const std::size_t per_class = train_per_class + test_per_class;

  auto take = [&](std::size_t offset, std::size_t count) {
    SyntheticDataset out;
    out.classes = classes;
    out.seed = seed;
    Matrix inputs(features, classes * count);
    out.labels.resize(classes * count);
    for (std::size_t c = 0; c < classes; ++c) {
      for (std::size_t s = 0; s < count; ++s) {
        const std::size_t src = c * per_class + offset + s;
        const std::size_t dst = c * count + s;
        out.labels[dst] = all.labels[src];
        for (std::size_t f = 0; f < features; ++f) {
          inputs(f, dst) = all.inputs(f, src);
        }
      }
    }
    out.inputs = std::move(inputs);
    return out;
  };

  return {take(0, train_per_class), take(train_per_class, test_per_class)};
}

std::vector<std::size_t> scaled_widths(const std::vector<std::size_t>& base,
                                       double lambda) {
  std::vector<std::size_t> out;
  out.reserve(base.size());
  for (std::size_t w : base) {
    out.push_back(std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(lambda * static_cast<double>(w)))));
  }
  return out;
}

std::vector<std::size_t> log_spaced_steps(std::size_t total, std::size_t count) {
  std::set<std::size_t> steps;
  if (total == 0 || count == 0) return {};
  const double lo = 0.0;
  const double hi = std::log(static_cast<double>(total));
  for (std::size_t i = 0; i < count; ++i) {
    const double f = count == 1 ? 1.0
                                : static_cast<double>(i) /
                                      static_cast<double>(count - 1);
    steps.insert(static_cast<std::size_t>(
        std::lround(std::exp(lo + f * (hi - lo)))));
  }
  return {steps.begin(), steps.end()};
}

// Mean over ordered pairs (i, j), i != j, i in rows, j in cols.
std::vector<double> block_entries(const Matrix& values,
                                  const std::vector<std::size_t>& rows,
                                  const std::vector<std::size_t>& cols) {
  std::vector<double> out;
  for (std::size_t i : rows) {
    for (std::size_t j : cols) {
      if (i != j) out.push_back(values(i, j));
    }
  }
  return out;
}

struct MlpRecipeConfig {
  std::size_t features;
  std::size_t classes;
  std::size_t per_class;
  std::size_t test_per_class;
  double spread;
  std::vector<std::size_t> hidden;
  Activation activation;
  double learning_rate;
  std::size_t epochs;
  std::size_t batch_size;
  double eps;
};

struct MlpRecipeDefaults {
  std::size_t features = 20;
  std::size_t classes = 4;
  std::size_t per_class = 50;
  std::size_t test_per_class = 50;
  double spread = 1.0;
  std::vector<std::size_t> hidden = {64, 64};
  double learning_rate = 0.2;
};

MlpRecipeConfig read_mlp_config(Params& params,
                                const MlpRecipeDefaults& defaults = {}) {
  MlpRecipeConfig c;
  c.features = params.get<std::size_t>("features", defaults.features);
  c.classes = params.get<std::size_t>("classes", defaults.classes);
  c.per_class = params.get<std::size_t>("per_class", defaults.per_class);
  c.test_per_class =
      params.get<std::size_t>("test_per_class", defaults.test_per_class);
  c.spread = params.get<double>("spread", defaults.spread);
  c.hidden = params.get<std::vector<std::size_t>>("hidden", defaults.hidden);
  c.activation =
      activation_from_name(params.get<std::string>("activation", "relu"));
  c.learning_rate = params.get<double>("learning_rate", defaults.learning_rate);
  c.epochs = params.get<std::size_t>("epochs", 1500);
  c.batch_size = params.get<std::size_t>("batch_size", 32);
  c.eps = params.get<double>("eps", kDefaultEps);
  return c;
}

std::vector<std::size_t> full_widths(const MlpRecipeConfig& c,
                                     const std::vector<std::size_t>& hidden) {
  std::vector<std::size_t> widths{c.features};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(c.classes);
  return widths;
}

// ---------------------------------------------------------------------------
// gen_mem
// ---------------------------------------------------------------------------

void run_gen_mem_recipe(const ExperimentSpec& spec) {
  Params params(spec.parameters);
  const MlpRecipeConfig cfg = read_mlp_config(params);
  const auto group_size = params.get<std::size_t>("group_size", 5);
  const std::string probe_mode = params.get<std::string>("probe", "train");
  const double threshold = params.get<double>("preprocess_variance", 0.0);
  if (probe_mode != "train" && probe_mode != "test") {
    throw UsageError("gen_mem: probe must be 'train' or 'test'");
  }

  const std::size_t layer_count = cfg.hidden.size() + 1;
  // results[rep][layer][group(0=gen,1=mem,2=inter)] = entries.
  std::vector<std::vector<std::array<std::vector<double>, 3>>> results(
      spec.seeds.size());

  for (std::size_t rep = 0; rep < spec.seeds.size(); ++rep) {
    const std::uint64_t seed = spec.seeds[rep];
    const DatasetSplit data =
        make_split_dataset(cfg.features, cfg.classes, cfg.per_class,
                           cfg.test_per_class, cfg.spread, mix_seed(seed, 0));
    const Matrix& probe =
        probe_mode == "train" ? data.train.inputs : data.test.inputs;

    std::vector<std::pair<MlpSpec, TrainConfig>> group;
    std::vector<std::size_t> gen_idx, mem_idx;
    for (std::size_t i = 0; i < group_size; ++i) {
      MlpSpec net;
      net.layer_widths = full_widths(cfg, cfg.hidden);
      net.activation = cfg.activation;
      net.seed = mix_seed(seed, 100 + i);
      TrainConfig train;
      train.learning_rate = cfg.learning_rate;
      train.epochs = cfg.epochs;
      train.batch_size = cfg.batch_size;
      train.checkpoint_every = 0;
      gen_idx.push_back(group.size());
      group.emplace_back(net, train);
    }
    for (std::size_t i = 0; i < group_size; ++i) {
      MlpSpec net;
      net.layer_widths = full_widths(cfg, cfg.hidden);
      net.activation = cfg.activation;
      net.seed = mix_seed(seed, 200 + i);
      TrainConfig train;
      train.learning_rate = cfg.learning_rate;
      train.epochs = cfg.epochs;
      train.batch_size = cfg.batch_size;
      train.checkpoint_every = 0;
      train.label_mode = LabelMode::shuffled_labels;
      train.shuffle_seed = mix_seed(seed, 1);  // shared across the group
      mem_idx.push_back(group.size());
      group.emplace_back(net, train);
    }

    GroupExperimentOptions options;
    options.eps = cfg.eps;
    if (threshold > 0.0) options.preprocess_variance = threshold;
    const GroupExperimentResult result =
        run_group_experiment(group, data.train, probe, options);

    results[rep].resize(layer_count);
    for (std::size_t l = 0; l < layer_count; ++l) {
      const Matrix& v = result.per_layer[l].values;
      results[rep][l][0] = block_entries(v, gen_idx, gen_idx);
      results[rep][l][1] = block_entries(v, mem_idx, mem_idx);
      auto inter = block_entries(v, gen_idx, mem_idx);
      const auto back = block_entries(v, mem_idx, gen_idx);
      inter.insert(inter.end(), back.begin(), back.end());
      results[rep][l][2] = std::move(inter);
      save_distance_matrix(
          result.per_layer[l],
          spec.output_dir / ("gen_mem_rep" + std::to_string(rep) + "_layer" +
                             std::to_string(l) + ".json"),
          provenance_of(spec, params));
    }

    nlohmann::json losses;
    losses["final_train_losses"] = result.final_train_losses;
    write_text(spec.output_dir / ("gen_mem_rep" + std::to_string(rep) +
                                  "_losses.json"),
               losses.dump(2) + "\n");
  }

  std::ostringstream out;
  out.precision(17);
  out << "layer,group,mean,std\n";
  const char* group_names[3] = {"generalizing", "memorizing", "inter"};
  for (std::size_t l = 0; l < layer_count; ++l) {
    for (int g = 0; g < 3; ++g) {
      std::vector<double> pooled;
      for (std::size_t rep = 0; rep < spec.seeds.size(); ++rep) {
        const auto& e = results[rep][l][g];
        pooled.insert(pooled.end(), e.begin(), e.end());
      }
      out << l << ',' << group_names[g] << ',' << mean_of(pooled) << ','
          << stddev_of(pooled) << '\n';
    }
  }
  write_text(spec.output_dir / "gen_mem_layerwise.csv", out.str());
  save_resolved_spec(spec, params);
  std::cout << "gen_mem: wrote layerwise distances to "
            << spec.output_dir.string() << "\n";
}

// ---------------------------------------------------------------------------
// width_sweep
// ---------------------------------------------------------------------------

void run_width_sweep_recipe(const ExperimentSpec& spec) {
  Params params(spec.parameters);
  MlpRecipeDefaults defaults;
  defaults.features = 24;
  defaults.classes = 10;
  defaults.per_class = 30;
  defaults.test_per_class = 30;
  defaults.spread = 1.1;
  defaults.hidden = {16, 16};
  defaults.learning_rate = 0.25;
  MlpRecipeConfig cfg = read_mlp_config(params, defaults);
  const auto lambdas =
      params.get<std::vector<double>>("lambdas", {0.5, 1.0, 2.0, 4.0});
  const auto group_size = params.get<std::size_t>("group_size", 5);
  // 0 compares full layers; a positive value row-subsamples wider layers
  // to that count first (the fixed-filter-count control).
  const auto subsample = params.get<std::size_t>("subsample", 0);
  const double threshold = params.get<double>("preprocess_variance", 0.8);
  if (lambdas.empty()) throw UsageError("width_sweep: lambdas is empty");

  std::ostringstream raw;
  raw.precision(17);
  raw << "seed,lambda,last_hidden_width,mean_distance,std_distance,"
         "mean_test_accuracy,mean_final_loss\n";
  // Aggregates across seeds, indexed by lambda.
  std::vector<std::vector<double>> dist_by_lambda(lambdas.size());
  std::vector<std::vector<double>> acc_by_lambda(lambdas.size());
  std::vector<double> correlations;

  for (std::size_t rep = 0; rep < spec.seeds.size(); ++rep) {
    const std::uint64_t seed = spec.seeds[rep];
    const DatasetSplit data =
        make_split_dataset(cfg.features, cfg.classes, cfg.per_class,
                           cfg.test_per_class, cfg.spread, mix_seed(seed, 0));

    std::vector<double> group_distance(lambdas.size());
    std::vector<double> group_accuracy(lambdas.size());
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
      const std::vector<std::size_t> hidden =
          scaled_widths(cfg.hidden, lambdas[li]);
      std::vector<std::pair<MlpSpec, TrainConfig>> group;
      for (std::size_t i = 0; i < group_size; ++i) {
        MlpSpec net;
        net.layer_widths = full_widths(cfg, hidden);
        net.activation = cfg.activation;
        net.seed = mix_seed(seed, 1000 + li * 100 + i);
        TrainConfig train;
        train.learning_rate = cfg.learning_rate;
        train.epochs = cfg.epochs;
        train.batch_size = cfg.batch_size;
        train.checkpoint_every = 0;
        group.emplace_back(net, train);
      }

      GroupExperimentOptions options;
      options.eps = cfg.eps;
      options.subsample_rows_to = subsample;
      options.subsample_seed = mix_seed(seed, 2000 + li);
      if (threshold > 0.0) options.preprocess_variance = threshold;
      const GroupExperimentResult result =
          run_group_experiment(group, data.train, data.train.inputs, options);

      const std::size_t last_hidden = cfg.hidden.size() - 1;
      std::vector<std::size_t> all(group_size);
      std::iota(all.begin(), all.end(), 0);
      const std::vector<double> entries =
          block_entries(result.per_layer[last_hidden].values, all, all);

      std::vector<double> accs;
      for (const Mlp& model : result.models) {
        accs.push_back(model.accuracy(data.test.inputs, data.test.labels));
      }

      group_distance[li] = mean_of(entries);
      group_accuracy[li] = mean_of(accs);
      dist_by_lambda[li].push_back(group_distance[li]);
      acc_by_lambda[li].push_back(group_accuracy[li]);
      raw << seed << ',' << lambdas[li] << ',' << hidden.back() << ','
          << mean_of(entries) << ',' << stddev_of(entries) << ','
          << mean_of(accs) << ',' << mean_of(result.final_train_losses)
          << '\n';
    }
    correlations.push_back(
        pearson_correlation(group_accuracy, group_distance));
  }
  write_text(spec.output_dir / "width_sweep_raw.csv", raw.str());

  std::vector<std::array<double, 3>> plot;
  for (std::size_t li = 0; li < lambdas.size(); ++li) {
    plot.push_back({lambdas[li], mean_of(dist_by_lambda[li]),
                    stddev_of(dist_by_lambda[li])});
  }
  write_plot_csv(spec.output_dir / "width_sweep_distance.csv", "lambda", plot);

  nlohmann::json summary;
  summary["accuracy_distance_correlation_per_seed"] = correlations;
  summary["lambdas"] = lambdas;
  summary["subsample"] = subsample;
  write_text(spec.output_dir / "width_sweep_summary.json",
             summary.dump(2) + "\n");
  save_resolved_spec(spec, params);
  std::cout << "width_sweep: wrote sweep over " << lambdas.size()
            << " widths to " << spec.output_dir.string() << "\n";
}

// ---------------------------------------------------------------------------
// lr_sweep
// ---------------------------------------------------------------------------

void run_lr_sweep_recipe(const ExperimentSpec& spec) {
  Params params(spec.parameters);
  MlpRecipeConfig cfg = read_mlp_config(params);
  const auto rates = params.get<std::vector<double>>(
      "learning_rates", {0.02, 0.1, 0.5});
  const auto nets_per_rate = params.get<std::size_t>("nets_per_rate", 4);
  const auto cluster_k = params.get<std::size_t>("cluster_k", 0);  // 0 = auto
  if (rates.empty()) throw UsageError("lr_sweep: learning_rates is empty");

  const std::uint64_t seed = spec.seeds.front();
  const DatasetSplit data =
      make_split_dataset(cfg.features, cfg.classes, cfg.per_class,
                         cfg.test_per_class, cfg.spread, mix_seed(seed, 0));

  std::vector<std::pair<MlpSpec, TrainConfig>> group;
  std::vector<std::string> labels;
  for (std::size_t ri = 0; ri < rates.size(); ++ri) {
    for (std::size_t i = 0; i < nets_per_rate; ++i) {
      MlpSpec net;
      net.layer_widths = full_widths(cfg, cfg.hidden);
      net.activation = cfg.activation;
      net.seed = mix_seed(seed, 100 + ri * 1000 + i);
      TrainConfig train;
      train.learning_rate = rates[ri];
      train.epochs = cfg.epochs;
      train.batch_size = cfg.batch_size;
      train.checkpoint_every = 0;
      group.emplace_back(net, train);
      labels.push_back("lr" + std::to_string(rates[ri]) + "_net" +
                       std::to_string(i));
    }
  }

  GroupExperimentOptions options;
  options.eps = cfg.eps;
  GroupExperimentResult result =
      run_group_experiment(group, data.train, data.train.inputs, options);

  const std::size_t last_hidden = cfg.hidden.size() - 1;
  DistanceMatrix matrix(labels, result.per_layer[last_hidden].values);
  save_distance_matrix(matrix, spec.output_dir / "lr_sweep_matrix.json",
                       provenance_of(spec, params));
  save_distance_matrix_csv(matrix, spec.output_dir / "lr_sweep_matrix.csv");

  const ClusterAssignment clusters = agglomerative_cluster(
      matrix, cluster_k > 0 ? std::optional<std::size_t>(cluster_k)
                            : std::nullopt);
  nlohmann::json cj;
  cj["schema_version"] = kSchemaVersion;
  cj["labels"] = labels;
  cj["assignments"] = clusters.assignments;
  cj["merge_heights"] = clusters.merge_heights;
  cj["chosen_k"] = clusters.chosen_k;
  cj["provenance"] = provenance_of(spec, params);
  write_text(spec.output_dir / "lr_sweep_clusters.json", cj.dump(2) + "\n");
  save_resolved_spec(spec, params);
  std::cout << "lr_sweep: " << clusters.chosen_k << " clusters over "
            << labels.size() << " networks\n";
}

// ---------------------------------------------------------------------------
// convergence + stability_split
// ---------------------------------------------------------------------------

std::vector<CheckpointSeries> training_series(Params& params,
                                              const MlpRecipeConfig& cfg,
                                              std::uint64_t seed) {
  const auto checkpoints = params.get<std::size_t>("checkpoints", 20);
  const DatasetSplit data =
      make_split_dataset(cfg.features, cfg.classes, cfg.per_class,
                         cfg.test_per_class, cfg.spread, mix_seed(seed, 0));
  MlpSpec net;
  net.layer_widths = full_widths(cfg, cfg.hidden);
  net.activation = cfg.activation;
  net.seed = mix_seed(seed, 1);
  TrainConfig train;
  train.learning_rate = cfg.learning_rate;
  train.epochs = cfg.epochs;
  train.batch_size = cfg.batch_size;
  const std::size_t steps_per_epoch =
      (data.train.examples() + cfg.batch_size - 1) / cfg.batch_size;
  train.checkpoint_steps =
      log_spaced_steps(cfg.epochs * steps_per_epoch, checkpoints);

  const TrainResult result =
      train_mlp(net, data.train, train, data.train.inputs);
  if (params.has("checkpoint_out")) {
    save_checkpoints(params.get<std::string>("checkpoint_out", ""),
                     result.checkpoints);
  }

  std::vector<CheckpointSeries> series;
  const std::size_t layer_count = net.layer_widths.size() - 1;
  for (std::size_t l = 0; l < layer_count; ++l) {
    std::vector<std::int64_t> steps;
    std::vector<ActivationMatrix> acts;
    for (const auto& cp : result.checkpoints) {
      steps.push_back(static_cast<std::int64_t>(cp.step));
      acts.push_back(cp.per_layer_activations[l]);
    }
    series.emplace_back(std::move(steps), std::move(acts));
  }
  return series;
}

void run_convergence_recipe(const ExperimentSpec& spec) {
  Params params(spec.parameters);
  const CurveMetric metric =
      curve_metric_from_name(params.get<std::string>("metric", "pwcca"));
  const double eps = params.get<double>("eps", kDefaultEps);

  if (params.has("checkpoint_dir")) {
    const std::filesystem::path dir =
        params.get<std::string>("checkpoint_dir", "");
    const std::size_t layers = checkpoint_layer_count(dir);
    for (std::size_t l = 0; l < layers; ++l) {
      const CheckpointSeries series = load_checkpoint_series(dir, l);
      const std::vector<double> curve = convergence_curve(series, metric, eps);
      std::vector<std::array<double, 3>> plot;
      for (std::size_t t = 0; t < curve.size(); ++t) {
        plot.push_back({static_cast<double>(series.steps[t]), curve[t], 0.0});
      }
      write_plot_csv(spec.output_dir /
                         ("convergence_layer" + std::to_string(l) + ".csv"),
                     "step", plot);
    }
    save_resolved_spec(spec, params);
    std::cout << "convergence: wrote curves for " << layers << " layers\n";
    return;
  }

  const MlpRecipeConfig cfg = read_mlp_config(params);
  // curves[seed] = per-layer curve; steps identical across seeds.
  std::vector<std::vector<std::vector<double>>> curves(spec.seeds.size());
  std::vector<std::int64_t> steps;
  for (std::size_t si = 0; si < spec.seeds.size(); ++si) {
    const std::vector<CheckpointSeries> series =
        training_series(params, cfg, spec.seeds[si]);
    if (si == 0) steps = series.front().steps;
    for (const auto& s : series) {
      curves[si].push_back(convergence_curve(s, metric, eps));
    }
  }

  const std::size_t layer_count = curves[0].size();
  for (std::size_t l = 0; l < layer_count; ++l) {
    std::vector<std::array<double, 3>> plot;
    for (std::size_t t = 0; t < steps.size(); ++t) {
      std::vector<double> at;
      for (std::size_t si = 0; si < spec.seeds.size(); ++si) {
        at.push_back(curves[si][l][t]);
      }
      plot.push_back(
          {static_cast<double>(steps[t]), mean_of(at), stddev_of(at)});
    }
    write_plot_csv(spec.output_dir /
                       ("convergence_layer" + std::to_string(l) + ".csv"),
                   "step", plot);
  }
  save_resolved_spec(spec, params);
  std::cout << "convergence: wrote curves for " << layer_count << " layers\n";
}

void run_stability_recipe(const ExperimentSpec& spec) {
  Params params(spec.parameters);
  const double eps = params.get<double>("eps", kDefaultEps);
  const auto m_param = params.get<std::size_t>("m", 0);  // 0 = auto
  const auto layer = params.get<std::size_t>("layer", 0);
  const std::string anchor_name =
      params.get<std::string>("anchor", "early");
  const SplitAnchor anchor = anchor_name == "midpoint"
                                 ? SplitAnchor::midpoint
                                 : SplitAnchor::early;

  std::vector<CheckpointSeries> series_list;
  if (params.has("checkpoint_dir")) {
    const std::filesystem::path dir =
        params.get<std::string>("checkpoint_dir", "");
    series_list.push_back(load_checkpoint_series(dir, layer));
  } else {
    const MlpRecipeConfig cfg = read_mlp_config(params);
    for (const std::uint64_t seed : spec.seeds) {
      auto series = training_series(params, cfg, seed);
      if (layer >= series.size()) {
        throw UsageError("stability: layer index out of range");
      }
      series_list.push_back(std::move(series[layer]));
    }
  }

  // One curve pair per series; aggregate when several seeds are given.
  std::vector<std::vector<double>> stable_all, unstable_all;
  std::vector<std::int64_t> steps = series_list.front().steps;
  for (const auto& series : series_list) {
    std::int64_t t_early = params.has("t_early")
                               ? params.get<std::int64_t>("t_early", 0)
                               : series.steps[1];
    std::size_t m = m_param;
    if (m == 0) {
      const CcaResult probe =
          compute_cca(series.activations[1],
                      series.activations[series.midpoint_index()], eps);
      m = std::max<std::size_t>(
          1, std::min<std::size_t>(100, probe.coefficient_count() / 2));
    }
    const SubspaceSplit split =
        split_stable_unstable(series, t_early, m, eps, anchor);
    auto [stable, unstable] = stability_curves(series, split, eps);
    stable_all.push_back(std::move(stable));
    unstable_all.push_back(std::move(unstable));
  }

  std::ostringstream out;
  out.precision(17);
  out << "step,stable_mean,stable_std,unstable_mean,unstable_std\n";
  for (std::size_t t = 0; t < steps.size(); ++t) {
    std::vector<double> s, u;
    for (std::size_t i = 0; i < stable_all.size(); ++i) {
      s.push_back(stable_all[i][t]);
      u.push_back(unstable_all[i][t]);
    }
    out << steps[t] << ',' << mean_of(s) << ',' << stddev_of(s) << ','
        << mean_of(u) << ',' << stddev_of(u) << '\n';
  }
  write_text(spec.output_dir / "stability_curves.csv", out.str());
  save_resolved_spec(spec, params);
  std::cout << "stability: wrote curves to " << spec.output_dir.string()
            << "\n";
}

// ---------------------------------------------------------------------------
// pairwise + compare
// ---------------------------------------------------------------------------

void run_pairwise_recipe(const ExperimentSpec& spec) {
  Params params(spec.parameters);
  const auto inputs = params.require<std::vector<std::string>>("inputs");
  const Metric metric =
      metric_from_name(params.get<std::string>("metric", "pwcca"));
  const bool transpose = params.get<bool>("transpose", false);
  const double eps = params.get<double>("eps", kDefaultEps);
  auto labels = params.get<std::vector<std::string>>("labels", {});
  if (inputs.size() < 2) {
    throw UsageError("pairwise: need at least two input files");
  }

  std::vector<ActivationMatrix> layers;
  layers.reserve(inputs.size());
  for (const auto& path : inputs) {
    layers.push_back(load_activations(path, transpose));
  }
  if (labels.empty()) {
    for (const auto& path : inputs) {
      labels.push_back(std::filesystem::path(path).stem().string());
    }
  }
  const DistanceMatrix matrix =
      pairwise_distance_matrix(layers, metric, eps, labels);
  save_distance_matrix(matrix, spec.output_dir / "pairwise_matrix.json",
                       provenance_of(spec, params));
  save_distance_matrix_csv(matrix, spec.output_dir / "pairwise_matrix.csv");
  save_resolved_spec(spec, params);
  std::cout << "pairwise: wrote " << matrix.size() << "x" << matrix.size()
            << " matrix (max asymmetry " << matrix.max_asymmetry() << ")\n";
}

void run_compare_recipe(const ExperimentSpec& spec) {
  Params params(spec.parameters);
  const auto left = params.require<std::string>("left");
  const auto right = params.require<std::string>("right");
  const Metric metric =
      metric_from_name(params.get<std::string>("metric", "pwcca"));
  const bool transpose = params.get<bool>("transpose", false);
  const double eps = params.get<double>("eps", kDefaultEps);
  const double alpha_level = params.get<double>("alpha_level", 0.05);
  const double preprocess = params.get<double>("preprocess_variance", 0.0);

  const ActivationMatrix l1 = load_activations(left, transpose);
  const ActivationMatrix l2 = load_activations(right, transpose);

  DistanceReport report;
  if (metric == Metric::pwcca && preprocess > 0.0) {
    PwccaOptions options;
    options.eps = eps;
    options.preprocess_variance = preprocess;
    report = pwcca_distance(l1, l2, options);
  } else {
    report = compute_distance(l1, l2, metric, eps, alpha_level);
  }
  save_report(report, spec.output_dir / "compare_report.json",
              provenance_of(spec, params));
  save_resolved_spec(spec, params);
  std::cout.precision(17);
  std::cout << metric_name(report.metric) << " distance: " << report.distance
            << "\n";
}

}  // namespace

void run_recipe_or_throw(const ExperimentSpec& spec) {
  if (spec.seeds.empty()) {
    throw UsageError("experiment spec: seeds must be nonempty");
  }
  if (spec.output_dir.empty()) {
    throw UsageError("experiment spec: output_dir must be set");
  }
  std::error_code ec;
  std::filesystem::create_directories(spec.output_dir, ec);
  if (ec) {
    throw IoFailure("cannot create " + spec.output_dir.string() + ": " +
                    ec.message());
  }

  switch (spec.recipe) {
    case Recipe::snr_sweep: return run_snr_sweep_recipe(spec);
    case Recipe::rnn_toy: return run_rnn_toy_recipe(spec);
    case Recipe::gen_mem: return run_gen_mem_recipe(spec);
    case Recipe::width_sweep: return run_width_sweep_recipe(spec);
    case Recipe::lr_sweep: return run_lr_sweep_recipe(spec);
    case Recipe::convergence: return run_convergence_recipe(spec);
    case Recipe::stability_split: return run_stability_recipe(spec);
    case Recipe::pairwise: return run_pairwise_recipe(spec);
    case Recipe::compare: return run_compare_recipe(spec);
  }
  throw UsageError("unknown recipe");
}

namespace {

void write_error_record(const std::filesystem::path& dir,
                        const std::string& kind, const std::string& message) {
  try {
    if (dir.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    nlohmann::json j;
    j["error"] = kind;
    j["message"] = message;
    write_text(dir / "error.json", j.dump(2) + "\n");
  } catch (...) {
    // Error reporting must not mask the original failure.
  }
}

}  // namespace

int run_recipe(const ExperimentSpec& spec) {
  try {
    run_recipe_or_throw(spec);
    return 0;
  } catch (const UsageError& e) {
    write_error_record(spec.output_dir, "usage", e.what());
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    write_error_record(spec.output_dir, "runtime", e.what());
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    write_error_record(spec.output_dir, "internal", e.what());
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}

int run_cluster_command(const std::filesystem::path& matrix_path,
                        std::optional<std::size_t> k,
                        const std::filesystem::path& output_dir) {
  try {
    std::error_code ec;
    std::filesystem::create_directories(output_dir, ec);
    if (ec) {
      throw IoFailure("cannot create " + output_dir.string());
    }
    const DistanceMatrix matrix = load_distance_matrix(matrix_path);
    const ClusterAssignment clusters = agglomerative_cluster(matrix, k);
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["labels"] = matrix.labels;
    j["assignments"] = clusters.assignments;
    j["merge_heights"] = clusters.merge_heights;
    j["chosen_k"] = clusters.chosen_k;
    j["source"] = matrix_path.string();
    write_text(output_dir / "clusters.json", j.dump(2) + "\n");
    std::cout << "cluster: " << clusters.chosen_k << " clusters over "
              << matrix.size() << " items\n";
    return 0;
  } catch (const UsageError& e) {
    write_error_record(output_dir, "usage", e.what());
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    write_error_record(output_dir, "runtime", e.what());
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    write_error_record(output_dir, "internal", e.what());
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace repsim

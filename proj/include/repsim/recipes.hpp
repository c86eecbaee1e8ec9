#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace repsim {

enum class Recipe {
  snr_sweep,
  rnn_toy,
  gen_mem,
  width_sweep,
  lr_sweep,
  convergence,
  stability_split,
  pairwise,
  compare,
};

std::string recipe_name(Recipe r);
/// Throws UsageError for unknown names.
Recipe recipe_from_name(const std::string& name);

/// Declarative description of one experiment run. parameters is a JSON
/// object of recipe-specific keys; unknown recipes and missing or
/// mistyped required parameters surface as UsageError.
struct ExperimentSpec {
  Recipe recipe = Recipe::compare;
  nlohmann::json parameters = nlohmann::json::object();
  std::vector<std::uint64_t> seeds;
  std::filesystem::path output_dir;
};

/// Executes the recipe end to end and writes per-seed plus aggregated
/// artifacts (CSV/JSON) and the fully resolved spec into output_dir.
/// Exceptions propagate; see run_recipe for the exit-code wrapper.
void run_recipe_or_throw(const ExperimentSpec& spec);

/// Exit-code wrapper: 0 success, 1 runtime error, 2 usage error. Failures
/// leave a machine-readable error.json in output_dir.
int run_recipe(const ExperimentSpec& spec);

/// `cluster` CLI command: loads a distance matrix (.json or square CSV),
/// runs average-linkage clustering and writes the assignment. Same exit
/// code conventions as run_recipe.
int run_cluster_command(const std::filesystem::path& matrix_path,
                        std::optional<std::size_t> k,
                        const std::filesystem::path& output_dir);

}  // namespace repsim

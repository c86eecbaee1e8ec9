#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "repsim/analysis.hpp"
#include "repsim/dynamics.hpp"
#include "repsim/toy_net.hpp"

namespace repsim {

inline constexpr int kSchemaVersion = 1;

/// NPY v1.0, little-endian float32/float64, C order, 2-D only. Anything
/// else is rejected: UnsupportedFormat for recognized-but-unsupported
/// files, MalformedHeader for unparseable ones, NonFiniteValue for NaN/Inf
/// payloads.
Matrix load_npy(const std::filesystem::path& path);

/// Writes NPY v1.0 with dtype '<f8' (bit-exact round trip for doubles).
void save_npy(const std::filesystem::path& path, const Matrix& m);

/// Comma-separated reals, one matrix row per line. A non-numeric first
/// line is treated as a header and skipped.
Matrix load_csv(const std::filesystem::path& path);
void save_csv(const std::filesystem::path& path, const Matrix& m);

/// Loads activations by extension (.npy binary, anything else CSV), rows
/// as neurons; transpose flips the orientation on load.
ActivationMatrix load_activations(const std::filesystem::path& path,
                                  bool transpose = false);
void save_activations(const std::filesystem::path& path,
                      const ActivationMatrix& m);

nlohmann::json report_to_json(const DistanceReport& report);
DistanceReport report_from_json(const nlohmann::json& j);

/// JSON report with schema_version and optional provenance (resolved
/// experiment spec, seeds). Doubles carry 17 significant digits.
void save_report(const DistanceReport& report,
                 const std::filesystem::path& path,
                 const nlohmann::json& provenance = nlohmann::json());
DistanceReport load_report(const std::filesystem::path& path);

void save_distance_matrix(const DistanceMatrix& d,
                          const std::filesystem::path& json_path,
                          const nlohmann::json& provenance = nlohmann::json());
DistanceMatrix load_distance_matrix(const std::filesystem::path& path);

/// Plot-friendly CSV: header row of labels, then one row per label.
void save_distance_matrix_csv(const DistanceMatrix& d,
                              const std::filesystem::path& path);

/// Checkpoint directory layout: manifest.json plus one NPY file per
/// (step, layer).
void save_checkpoints(const std::filesystem::path& dir,
                      const std::vector<ToyNetCheckpoint>& checkpoints,
                      const nlohmann::json& provenance = nlohmann::json());

std::size_t checkpoint_layer_count(const std::filesystem::path& dir);

/// One layer's activations across all recorded steps.
CheckpointSeries load_checkpoint_series(const std::filesystem::path& dir,
                                        std::size_t layer_index);

}  // namespace repsim

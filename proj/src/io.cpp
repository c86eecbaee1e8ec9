#include "repsim/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace repsim {

static_assert(std::endian::native == std::endian::little,
              "NPY reader/writer assumes a little-endian host");

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoFailure("cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  if (!in.good() && !in.eof()) {
    throw IoFailure("read error on " + path.string());
  }
  return std::move(buf).str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoFailure("cannot open " + path.string() + " for writing");
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out.good()) {
    throw IoFailure("write error on " + path.string());
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Minimal parser for the NPY header dict: string, boolean and int-tuple
// values, single or double quotes, any key order.
std::vector<std::pair<std::string, std::string>> parse_dict(
    const std::string& header) {
  const auto open = header.find('{');
  const auto close = header.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    throw MalformedHeader("NPY header is not a dict literal");
  }
  const std::string body = header.substr(open + 1, close - open - 1);

  std::vector<std::pair<std::string, std::string>> entries;
  std::size_t pos = 0;
  while (pos < body.size()) {
    // Key: quoted string.
    while (pos < body.size() && (std::isspace(static_cast<unsigned char>(body[pos])) ||
                                 body[pos] == ',')) {
      ++pos;
    }
    if (pos >= body.size()) break;
    const char quote = body[pos];
    if (quote != '\'' && quote != '"') {
      throw MalformedHeader("NPY header: expected quoted key");
    }
    const auto key_end = body.find(quote, pos + 1);
    if (key_end == std::string::npos) {
      throw MalformedHeader("NPY header: unterminated key");
    }
    const std::string key = body.substr(pos + 1, key_end - pos - 1);
    pos = body.find(':', key_end);
    if (pos == std::string::npos) {
      throw MalformedHeader("NPY header: missing ':' after key");
    }
    ++pos;
    // Value: up to the next comma at paren depth zero.
    int depth = 0;
    std::string value;
    for (; pos < body.size(); ++pos) {
      const char ch = body[pos];
      if (ch == '(') ++depth;
      if (ch == ')') --depth;
      if (ch == ',' && depth == 0) break;
      value += ch;
    }
    entries.emplace_back(key, trim(value));
  }
  return entries;
}

std::string dict_value(
    const std::vector<std::pair<std::string, std::string>>& entries,
    const std::string& key) {
  for (const auto& [k, v] : entries) {
    if (k == key) return v;
  }
  throw MalformedHeader("NPY header: missing key '" + key + "'");
}

std::vector<std::size_t> parse_shape(const std::string& value) {
  if (value.size() < 2 || value.front() != '(' || value.back() != ')') {
    throw MalformedHeader("NPY header: shape is not a tuple");
  }
  std::vector<std::size_t> dims;
  std::string body = value.substr(1, value.size() - 2);
  std::size_t pos = 0;
  while (pos < body.size()) {
    while (pos < body.size() && (body[pos] == ' ' || body[pos] == ',')) ++pos;
    if (pos >= body.size()) break;
    std::size_t dim = 0;
    const auto [next, ec] =
        std::from_chars(body.data() + pos, body.data() + body.size(), dim);
    if (ec != std::errc()) {
      throw MalformedHeader("NPY header: bad shape entry");
    }
    dims.push_back(dim);
    pos = static_cast<std::size_t>(next - body.data());
  }
  return dims;
}

constexpr char kMagic[7] = "\x93NUMPY";

}  // namespace

Matrix load_npy(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 10 || std::memcmp(bytes.data(), kMagic, 6) != 0) {
    throw MalformedHeader(path.string() + ": not an NPY file");
  }
  const unsigned major = static_cast<unsigned char>(bytes[6]);
  const unsigned minor = static_cast<unsigned char>(bytes[7]);
  if (major != 1 || minor != 0) {
    throw UnsupportedFormat(path.string() + ": NPY version " +
                            std::to_string(major) + "." +
                            std::to_string(minor) + " (only 1.0 supported)");
  }
  std::uint16_t header_len = 0;
  std::memcpy(&header_len, bytes.data() + 8, 2);
  if (bytes.size() < 10u + header_len) {
    throw MalformedHeader(path.string() + ": truncated header");
  }
  const std::string header = bytes.substr(10, header_len);
  const auto entries = parse_dict(header);

  std::string descr = dict_value(entries, "descr");
  if (descr.size() >= 2 && (descr.front() == '\'' || descr.front() == '"')) {
    descr = descr.substr(1, descr.size() - 2);
  }
  if (descr != "<f8" && descr != "<f4") {
    throw UnsupportedFormat(path.string() + ": dtype '" + descr +
                            "' (only <f4 and <f8 supported)");
  }
  const std::string fortran = dict_value(entries, "fortran_order");
  if (fortran == "True") {
    throw UnsupportedFormat(path.string() + ": fortran_order arrays");
  }
  if (fortran != "False") {
    throw MalformedHeader(path.string() + ": bad fortran_order value");
  }
  const std::vector<std::size_t> shape =
      parse_shape(dict_value(entries, "shape"));
  if (shape.size() != 2) {
    throw UnsupportedFormat(path.string() + ": " +
                            std::to_string(shape.size()) +
                            "-D array (only 2-D supported)");
  }
  if (shape[0] == 0 || shape[1] == 0) {
    throw UnsupportedFormat(path.string() + ": empty array");
  }

  const std::size_t count = shape[0] * shape[1];
  const std::size_t item = descr == "<f8" ? 8 : 4;
  const std::size_t offset = 10u + header_len;
  if (bytes.size() - offset < count * item) {
    throw MalformedHeader(path.string() + ": payload shorter than shape");
  }

  std::vector<double> data(count);
  if (item == 8) {
    std::memcpy(data.data(), bytes.data() + offset, count * 8);
  } else {
    std::vector<float> f(count);
    std::memcpy(f.data(), bytes.data() + offset, count * 4);
    for (std::size_t i = 0; i < count; ++i) data[i] = f[i];
  }
  for (double v : data) {
    if (!std::isfinite(v)) {
      throw NonFiniteValue(path.string() + ": NaN or Inf in payload");
    }
  }
  return Matrix(shape[0], shape[1], std::move(data));
}

void save_npy(const std::filesystem::path& path, const Matrix& m) {
  std::string header = "{'descr': '<f8', 'fortran_order': False, 'shape': (" +
                       std::to_string(m.rows()) + ", " +
                       std::to_string(m.cols()) + "), }";
  // Pad so the payload starts on a 64-byte boundary.
  const std::size_t unpadded = 10 + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header += '\n';

  std::string bytes;
  bytes.reserve(10 + header.size() + m.data().size() * 8);
  bytes.append(kMagic, 6);
  bytes += '\x01';
  bytes += '\x00';
  const auto header_len = static_cast<std::uint16_t>(header.size());
  bytes.append(reinterpret_cast<const char*>(&header_len), 2);
  bytes += header;
  bytes.append(reinterpret_cast<const char*>(m.data().data()),
               m.data().size() * 8);
  write_file(path, bytes);
}

namespace {

bool parse_double(const std::string& token, double& out) {
  const std::string t = trim(token);
  if (t.empty()) return false;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> tokens;
  std::string token;
  std::istringstream stream(line);
  while (std::getline(stream, token, ',')) tokens.push_back(token);
  return tokens;
}

}  // namespace

Matrix load_csv(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  std::istringstream stream(bytes);
  std::string line;
  std::vector<double> data;
  std::size_t cols = 0;
  std::size_t rows = 0;
  bool first = true;
  while (std::getline(stream, line)) {
    if (trim(line).empty()) continue;
    const std::vector<std::string> tokens = split_csv_line(line);
    std::vector<double> row;
    row.reserve(tokens.size());
    bool numeric = true;
    for (const auto& t : tokens) {
      double v = 0;
      if (!parse_double(t, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (first) {
        first = false;  // header line
        continue;
      }
      throw MalformedHeader(path.string() + ": non-numeric CSV value");
    }
    first = false;
    if (cols == 0) {
      cols = row.size();
    } else if (row.size() != cols) {
      throw MalformedHeader(path.string() + ": ragged CSV rows");
    }
    for (double v : row) {
      if (!std::isfinite(v)) {
        throw NonFiniteValue(path.string() + ": NaN or Inf in CSV");
      }
    }
    data.insert(data.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0 || cols == 0) {
    throw MalformedHeader(path.string() + ": empty CSV");
  }
  return Matrix(rows, cols, std::move(data));
}

void save_csv(const std::filesystem::path& path, const Matrix& m) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c > 0) out << ',';
      out << m(r, c);
    }
    out << '\n';
  }
  write_file(path, out.str());
}

ActivationMatrix load_activations(const std::filesystem::path& path,
                                  bool transpose) {
  Matrix m = path.extension() == ".npy" ? load_npy(path) : load_csv(path);
  if (transpose) {
    m = Matrix::from_eigen(m.view().transpose());
  }
  return ActivationMatrix(std::move(m));
}

void save_activations(const std::filesystem::path& path,
                      const ActivationMatrix& m) {
  if (path.extension() == ".npy") {
    save_npy(path, m.matrix);
  } else {
    save_csv(path, m.matrix);
  }
}

nlohmann::json report_to_json(const DistanceReport& report) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["metric"] = metric_name(report.metric);
  j["distance"] = report.distance;
  if (report.weights) j["weights"] = *report.weights;
  if (report.k_significant) j["k_significant"] = *report.k_significant;
  if (report.direction) j["direction"] = weight_direction_name(*report.direction);
  if (report.raw_distance) j["raw_distance"] = *report.raw_distance;
  return j;
}

DistanceReport report_from_json(const nlohmann::json& j) {
  DistanceReport report;
  report.metric = metric_from_name(j.at("metric").get<std::string>());
  report.distance = j.at("distance").get<double>();
  if (j.contains("weights")) {
    report.weights = j["weights"].get<std::vector<double>>();
  }
  if (j.contains("k_significant")) {
    report.k_significant = j["k_significant"].get<std::size_t>();
  }
  if (j.contains("direction")) {
    const std::string d = j["direction"].get<std::string>();
    if (d == "l1_weighted") report.direction = WeightDirection::l1_weighted;
    else if (d == "l2_weighted") report.direction = WeightDirection::l2_weighted;
    else if (d == "symmetric") report.direction = WeightDirection::symmetric;
    else throw MalformedHeader("report: unknown direction '" + d + "'");
  }
  if (j.contains("raw_distance")) {
    report.raw_distance = j["raw_distance"].get<double>();
  }
  return report;
}

void save_report(const DistanceReport& report,
                 const std::filesystem::path& path,
                 const nlohmann::json& provenance) {
  nlohmann::json j = report_to_json(report);
  if (!provenance.is_null()) j["provenance"] = provenance;
  write_file(path, j.dump(2) + "\n");
}

DistanceReport load_report(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedHeader(path.string() + ": " + e.what());
  }
  return report_from_json(j);
}

void save_distance_matrix(const DistanceMatrix& d,
                          const std::filesystem::path& json_path,
                          const nlohmann::json& provenance) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["labels"] = d.labels;
  std::vector<std::vector<double>> rows(d.size());
  for (std::size_t r = 0; r < d.size(); ++r) {
    rows[r].resize(d.size());
    for (std::size_t c = 0; c < d.size(); ++c) rows[r][c] = d.values(r, c);
  }
  j["values"] = rows;
  j["max_asymmetry"] = d.max_asymmetry();
  if (!provenance.is_null()) j["provenance"] = provenance;
  write_file(json_path, j.dump(2) + "\n");
}

DistanceMatrix load_distance_matrix(const std::filesystem::path& path) {
  if (path.extension() != ".json") {
    // Plain square CSV; an optional header row provides the labels.
    const Matrix m = load_csv(path);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      labels.push_back("item" + std::to_string(i));
    }
    return DistanceMatrix(std::move(labels), m);
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedHeader(path.string() + ": " + e.what());
  }
  const auto labels = j.at("labels").get<std::vector<std::string>>();
  const auto rows = j.at("values").get<std::vector<std::vector<double>>>();
  if (rows.empty() || rows.size() != labels.size()) {
    throw MalformedHeader(path.string() + ": label/value size mismatch");
  }
  Matrix values(rows.size(), rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows.size()) {
      throw MalformedHeader(path.string() + ": values are not square");
    }
    for (std::size_t c = 0; c < rows.size(); ++c) values(r, c) = rows[r][c];
  }
  return DistanceMatrix(labels, std::move(values));
}

void save_distance_matrix_csv(const DistanceMatrix& d,
                              const std::filesystem::path& path) {
  std::ostringstream out;
  out.precision(17);
  out << "label";
  for (const auto& l : d.labels) out << ',' << l;
  out << '\n';
  for (std::size_t r = 0; r < d.size(); ++r) {
    out << d.labels[r];
    for (std::size_t c = 0; c < d.size(); ++c) out << ',' << d.values(r, c);
    out << '\n';
  }
  write_file(path, out.str());
}

void save_checkpoints(const std::filesystem::path& dir,
                      const std::vector<ToyNetCheckpoint>& checkpoints,
                      const nlohmann::json& provenance) {
  if (checkpoints.empty()) {
    throw InvalidArgument("save_checkpoints: empty checkpoint list");
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoFailure("cannot create " + dir.string() + ": " + ec.message());
  }

  nlohmann::json manifest;
  manifest["schema_version"] = kSchemaVersion;
  manifest["layer_count"] = checkpoints.front().per_layer_activations.size();
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& cp : checkpoints) {
    nlohmann::json entry;
    entry["step"] = cp.step;
    entry["train_loss"] = cp.train_loss;
    std::vector<std::string> files;
    for (std::size_t l = 0; l < cp.per_layer_activations.size(); ++l) {
      const std::string name =
          "step" + std::to_string(cp.step) + "_layer" + std::to_string(l) +
          ".npy";
      save_npy(dir / name, cp.per_layer_activations[l].matrix);
      files.push_back(name);
    }
    entry["files"] = files;
    entries.push_back(std::move(entry));
  }
  manifest["checkpoints"] = std::move(entries);
  if (!provenance.is_null()) manifest["provenance"] = provenance;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

namespace {

nlohmann::json load_manifest(const std::filesystem::path& dir) {
  try {
    return nlohmann::json::parse(read_file(dir / "manifest.json"));
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedHeader((dir / "manifest.json").string() + ": " + e.what());
  }
}

}  // namespace

std::size_t checkpoint_layer_count(const std::filesystem::path& dir) {
  return load_manifest(dir).at("layer_count").get<std::size_t>();
}

CheckpointSeries load_checkpoint_series(const std::filesystem::path& dir,
                                        std::size_t layer_index) {
  const nlohmann::json manifest = load_manifest(dir);
  const auto layer_count = manifest.at("layer_count").get<std::size_t>();
  if (layer_index >= layer_count) {
    throw InvalidArgument("load_checkpoint_series: layer " +
                          std::to_string(layer_index) + " out of range (" +
                          std::to_string(layer_count) + " layers)");
  }
  std::vector<std::int64_t> steps;
  std::vector<ActivationMatrix> activations;
  for (const auto& entry : manifest.at("checkpoints")) {
    steps.push_back(entry.at("step").get<std::int64_t>());
    const auto files = entry.at("files").get<std::vector<std::string>>();
    activations.emplace_back(load_npy(dir / files.at(layer_index)));
  }
  return CheckpointSeries(std::move(steps), std::move(activations));
}

}  // namespace repsim

#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "repsim/io.hpp"

TEST_SUITE_BEGIN("cli");

namespace {

namespace fs = std::filesystem;

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

CommandResult run_command(const std::string& command) {
  CommandResult result;
  FILE* pipe = popen((command + " 2>&1").c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buffer{};
  while (std::size_t n = fread(buffer.data(), 1, buffer.size(), pipe)) {
    result.output.append(buffer.data(), n);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("repsim_cli_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

const std::string kCli = REPSIM_CLI_PATH;

}  // namespace

TEST_CASE("help-all output matches the golden file") {
  const CommandResult r = run_command(kCli + " --help-all");
  CHECK(r.exit_code == 0);
  std::ifstream golden(std::string(REPSIM_TEST_DATA_DIR) + "/help_golden.txt",
                       std::ios::binary);
  REQUIRE(golden.good());
  std::ostringstream expected;
  expected << golden.rdbuf();
  CHECK(r.output == expected.str());
}

TEST_CASE("exit codes") {
  TempDir dir;
  SUBCASE("unknown subcommand is a usage error (2)") {
    const CommandResult r = run_command(kCli + " bogus-recipe");
    CHECK(r.exit_code == 2);
  }
  SUBCASE("missing required arguments is a usage error (2)") {
    const CommandResult r = run_command(kCli + " compare onlyone.npy");
    CHECK(r.exit_code == 2);
  }
  SUBCASE("missing input file is a runtime error (1)") {
    const CommandResult r = run_command(
        kCli + " compare " + (dir.path / "a.npy").string() + " " +
        (dir.path / "b.npy").string() + " -o " + (dir.path / "out").string());
    CHECK(r.exit_code == 1);
    CHECK(fs::exists(dir.path / "out" / "error.json"));
  }
}

TEST_CASE("compare via the binary prints a distance") {
  TempDir dir;
  const repsim::Matrix m = oracles::random_matrix(3, 30, 17);
  repsim::save_npy(dir.path / "a.npy", m);
  repsim::save_npy(dir.path / "b.npy", m);
  const CommandResult r = run_command(
      kCli + " compare " + (dir.path / "a.npy").string() + " " +
      (dir.path / "b.npy").string() + " --metric pwcca -o " +
      (dir.path / "out").string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("pwcca distance:") != std::string::npos);
  CHECK(fs::exists(dir.path / "out" / "compare_report.json"));
}

TEST_CASE("config file values are overridden by flags") {
  TempDir dir;
  const repsim::Matrix m = oracles::random_matrix(3, 30, 18);
  repsim::save_npy(dir.path / "a.npy", m);
  repsim::save_npy(dir.path / "b.npy",
                   repsim::Matrix::from_eigen(-m.view()));

  std::ofstream config(dir.path / "config.json");
  config << "{\"metric\": \"cosine\"}\n";
  config.close();

  // Config alone: cosine of a negated matrix is 2.
  CommandResult r = run_command(
      kCli + " compare " + (dir.path / "a.npy").string() + " " +
      (dir.path / "b.npy").string() + " --config " +
      (dir.path / "config.json").string() + " -o " +
      (dir.path / "out1").string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("cosine distance: 2") != std::string::npos);

  // Flag overrides the config: pwcca sees the sign flip as affine.
  r = run_command(kCli + " compare " + (dir.path / "a.npy").string() + " " +
                  (dir.path / "b.npy").string() + " --config " +
                  (dir.path / "config.json").string() +
                  " --metric pwcca -o " + (dir.path / "out2").string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("pwcca distance:") != std::string::npos);

  const auto report =
      repsim::load_report(dir.path / "out2" / "compare_report.json");
  CHECK(report.metric == repsim::Metric::pwcca);
  CHECK(report.distance < 1e-6);

  // output_dir from the config applies only when -o is left at its default.
  std::ofstream config2(dir.path / "config2.json");
  config2 << R"({"metric": "cosine", "output_dir": ")"
          << (dir.path / "from_config").string() << R"("})" << "\n";
  config2.close();
  r = run_command(kCli + " compare " + (dir.path / "a.npy").string() + " " +
                  (dir.path / "b.npy").string() + " --config " +
                  (dir.path / "config2.json").string());
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(dir.path / "from_config" / "compare_report.json"));
  r = run_command(kCli + " compare " + (dir.path / "a.npy").string() + " " +
                  (dir.path / "b.npy").string() + " --config " +
                  (dir.path / "config2.json").string() + " -o " +
                  (dir.path / "from_flag").string());
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(dir.path / "from_flag" / "compare_report.json"));
}

TEST_SUITE_END();

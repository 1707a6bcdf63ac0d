#include <chrono>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "cising/cli/config.hpp"
#include "cising/cli/run.hpp"
#include "cising/error.hpp"

namespace {

enum Status { kOk = 0, kConfig = 2, kSolver = 3, kIo = 4 };

}  // namespace

int main(int argc, char** argv) {
  using namespace cising::cli;

  CLI::App app{"Steady-state phases of the dissipative mixed-field Ising model with collective decay"};
  std::string config_path;
  std::optional<int> workers;
  std::optional<std::string> output_dir;
  app.add_option("config", config_path, "JSON run config (or a metadata.json from an earlier run)")->required();
  app.add_option("--workers", workers, "worker threads for parameter sweeps")->check(CLI::PositiveNumber);
  app.add_option("--output-dir", output_dir,
                 std::string("output directory (default: config output.directory, then $") + kOutputDirEnv + ")");
  app.set_version_flag("--version", std::string(kToolName) + " " + CISING_VERSION);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  RunConfig cfg;
  Timings timings;
  try {
    const auto t0 = std::chrono::steady_clock::now();
    cfg = load_config(config_path);
    if (workers) cfg.workers = *workers;
    timings.emplace_back("parse", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  }

  try {
    const auto summary = run(cfg, resolve_output_dir(cfg, output_dir), std::move(timings));
    std::cerr << to_string(cfg.task) << ": wrote";
    for (const auto& f : summary.files) std::cerr << ' ' << f;
    std::cerr << " metadata.json to " << summary.directory.string() << '\n';
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const cising::Error& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kSolver;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kSolver;
  }
  return kOk;
}

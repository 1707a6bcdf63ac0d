#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "cising/cli/config.hpp"
#include "cising/cli/table.hpp"

namespace cising::cli {

inline constexpr const char* kToolName = "cising";
inline constexpr const char* kOutputDirEnv = "CISING_OUTPUT_DIR";

using Timings = std::vector<std::pair<std::string, double>>;

/// Runs the configured task and returns its tables in a fixed order.
std::vector<Table> compute(const RunConfig& cfg);

/// --output-dir, then the config's output.directory, then $CISING_OUTPUT_DIR, then ".".
std::filesystem::path resolve_output_dir(const RunConfig& cfg, const std::optional<std::string>& flag);

nlohmann::json metadata(const RunConfig& cfg, const Timings& timings, const std::vector<std::string>& files);
void write_metadata(const RunConfig& cfg, const Timings& timings, const std::vector<std::string>& files,
                    const std::filesystem::path& path);

struct RunSummary {
  std::filesystem::path directory;
  std::vector<std::string> files;
  Timings timings;
};

/// compute() followed by writing every table and metadata.json into `dir`.
RunSummary run(const RunConfig& cfg, const std::filesystem::path& dir, Timings timings = {});

}  // namespace cising::cli

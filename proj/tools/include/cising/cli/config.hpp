#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "cising/liouville.hpp"
#include "cising/meanfield.hpp"
#include "cising/model.hpp"
#include "cising/sweep.hpp"

namespace cising::cli {

// Malformed or invalid configuration (exit status 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem failure while reading or writing (exit status 4).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Task {
  kMfFixedPoints,
  kMfEvolve,
  kMfPhaseDiagram,
  kMultistability,
  kQuantumSteady,
  kQuantumGap,
  kQuantumEvolve,
  kHysteresis,
  kBoundaries,
};

Task parse_task(const std::string& name);
std::string to_string(Task task);

struct GridConfig {
  sweep::Axis axis1;
  std::optional<sweep::Axis> axis2;
};

struct SelectionConfig {
  double settle_time_max = 1e5;
  double cycle_time = 200.0;
};

struct EvolveConfig {
  std::vector<BlochVector> initial_states{{0.0, 0.0, 1.0}, {0.0, 1.0, 0.0}, {1.0, 0.0, 0.0}};
  double t_end = 200.0;
  double sample_interval = 0.05;
  double rel_tol = 1e-11;
  double abs_tol = 1e-13;
  double transient_fraction = 0.5;
};

struct QuantumConfig {
  std::vector<int> N{10};
  SpectralMethod method = SpectralMethod::kAuto;
  bool mean_field_reference = true;
};

struct QuantumEvolveConfig {
  std::string initial = "north";  // north, south or mixed
  double t_end = 10.0;
  int samples = 100;
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
};

struct BranchConfig {
  sweep::SolverSpec::Kind kind = sweep::SolverSpec::Kind::kMeanField;
  int N = 0;
};

struct HysteresisConfig {
  double p_min = 0.0;
  double p_max = 1.0;
  int p_count = 101;
  sweep::Direction direction = sweep::Direction::kBoth;
  double threshold = 0.05;
  double settle_time = 200.0;
  double window = 20.0;
  BlochVector initial = kSouthPole;
  std::vector<BranchConfig> branches{{}};

  std::vector<double> p_values() const;
};

struct RunConfig {
  Task task = Task::kMfFixedPoints;
  ModelParams model{0.0, 0.0, 1.0, 0.0, 0};
  std::uint64_t rng_seed = 0;
  int workers = 1;
  std::string output_directory;  // empty: --output-dir, then CISING_OUTPUT_DIR, then "."
  mf::SearchOptions search;

  std::optional<GridConfig> grid;
  SelectionConfig selection;
  EvolveConfig evolve;
  QuantumConfig quantum;
  QuantumEvolveConfig quantum_evolve;
  HysteresisConfig hysteresis;
  sweep::Axis boundaries{sweep::Parameter::kV, -10.0, -0.5, 96};

  // Search options with the resolved rng_seed applied.
  mf::SearchOptions search_options() const;
};

/// Parses a config document. A metadata document written by a previous run
/// is accepted too; its embedded config is used. Generates and stores a
/// seed when none is given. Throws ConfigError naming the offending key.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

/// Fully resolved config: every default materialized, only the blocks the
/// task reads.
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace cising::cli

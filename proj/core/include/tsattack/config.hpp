#pragma once

#include "tsattack/grad_attack.hpp"
#include "tsattack/series_io.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tsattack {

enum class Scenario { CostAdv, Random, MaxAction, MinAction, L1, CostGradient };

Scenario parse_scenario(std::string_view name);
std::string to_string(Scenario s);

struct DatasetConfig {
  enum class Kind { Arima, Csv };
  Kind kind = Kind::Arima;
  int count = 100;                 // ARIMA windows
  std::optional<std::uint64_t> seed;  // ARIMA seed; defaults to the experiment seed
  std::filesystem::path path;      // CSV
  std::string column;              // CSV
  int stride = 0;                  // CSV; 0 means horizon
};

struct AutoBox {
  double factor = 1.5;
  double percentile = 95.0;
};

enum class AttackMode { SingleStep, Iterated };

struct ExperimentConfig {
  SystemSpec system;
  std::vector<double> deltas;
  std::vector<Scenario> scenarios;  // empty: experiment default
  DatasetConfig dataset;
  Normalization normalization = Normalization::None;
  std::optional<BoxBounds> action_box;  // explicit bounds; otherwise auto
  AutoBox auto_box;
  std::optional<BoxBounds> state_box;
  AttackMode attack_mode = AttackMode::Iterated;
  int steps = 20;
  std::optional<double> step_size;  // absolute; default delta / 10
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  int workers = 0;  // 0: hardware concurrency

  std::uint64_t dataset_seed() const { return dataset.seed.value_or(seed); }

  /// Throws ConfigError on non-positive or non-ascending deltas, an invalid
  /// system, or missing CSV fields.
  void validate() const;
};

/// Parses the JSON config format documented in README.md. Unknown keys are
/// rejected at every level. Missing keys take the scalar battery defaults
/// (A = C = Q = R = 1, B = -1, x0 = 1; T = 50 and deltas {0.3, 1, 3} for
/// ARIMA, T = 120 and deltas {2, 7, 20} for CSV data).
ExperimentConfig parse_config(std::string_view json_text);
/// Reads a config file; a relative CSV dataset path is resolved against the
/// directory holding the file.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig default_config();

/// Canonical JSON rendering; parse_config(config_to_json(c)) reproduces c.
std::string config_to_json(const ExperimentConfig& cfg);

}  // namespace tsattack

#pragma once

#include <filesystem>
#include <json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "specrob/train.hpp"

namespace specrob {

// Invalid configuration or arguments (CLI exit code 1).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Matched-noise stage whose template is estimated from the training set at
// run time: mean delta spectrum of `corruption` at `severity`.
struct PendingTemplate {
  std::size_t stage = 0;
  std::string corruption;
  int severity = 3;
};

struct AnalysisSpec {
  std::string type;  // heatmap | spectrum | evaluate | attack_pgd
  nlohmann::json params;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "run";
  std::filesystem::path train_data;
  std::optional<std::filesystem::path> test_data;
  std::size_t train_limit = 0;
  std::size_t test_limit = 0;
  TrainConfig train;
  std::vector<PendingTemplate> pending_templates;
  std::vector<AnalysisSpec> analyses;
  nlohmann::json source;  // the document as given, for the manifest
};

// Strict parse: unknown keys, wrong types and out-of-range values throw
// ConfigError naming the offending path.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Stable 64-bit FNV-1a hash of the canonical JSON text.
std::uint64_t config_hash(const nlohmann::json& doc);

}  // namespace specrob

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hwt/verify.hpp"

namespace hwt::cli {

inline constexpr int kSchemaVersion = 1;

/// Thrown for any schema or semantic problem in a configuration file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DecouplingSettings {
  std::size_t m = 2;
  std::string kernel = "product";
  std::size_t k = 1;
  std::vector<double> theta;
  std::size_t trials = 10000;
};

struct ExperimentConfig {
  DominanceConfig dominance;
  std::optional<DecouplingSettings> decoupling;
  std::filesystem::path out_dir = "out";
  std::string json_name = "report.json";
  std::string csv_name = "summary.csv";
};

/// Parses and validates a configuration. Relative fixture paths resolve
/// against `base_dir`.
ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::filesystem::path> out_dir;
  std::size_t threads = 1;
};

void apply_overrides(ExperimentConfig& cfg, const Overrides& o);

}  // namespace hwt::cli

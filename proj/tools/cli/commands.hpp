#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "config.hpp"
#include "hwt/verify.hpp"

namespace hwt::cli {

enum ExitCode : int {
  kExitPass = 0,
  kExitViolation = 2,
  kExitRefusal = 3,
  kExitConfigError = 4,
};

struct SelftestOptions {
  std::uint64_t seed = 1;
  std::size_t cases = 50;
  std::optional<std::filesystem::path> fixture;
};

/// Exit code for an overall dominance verdict.
int exit_code_for(Verdict v);

/// FNV-1a, 64 bit.
std::uint64_t fnv1a(const std::string& text, std::uint64_t state = 0xcbf29ce484222325ULL);

int cmd_selftest(const SelftestOptions& opts, std::ostream& out, std::ostream& err);
int cmd_bound(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_experiment(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_decouple(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

/// Full command line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hwt::cli

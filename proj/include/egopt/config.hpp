#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "egopt/acquisition.hpp"
#include "egopt/benchbox.hpp"
#include "egopt/driver.hpp"
#include "egopt/gp.hpp"
#include "egopt/search_space.hpp"

namespace egopt {

/// Parsed run configuration (JSON, schema 1). Parsing is strict: unknown
/// keys anywhere are rejected.
struct RunConfig {
  std::string name;
  bench::Direction direction = bench::Direction::minimize;
  std::uint64_t seed = 0;
  BudgetPlan budget;
  int init_parallelism = 1;
  std::vector<ParameterSpec> parameters;
  gp::FitConfig gp;
  std::string acquisition_type = "qei";  // "ei" | "qei"
  int mc_samples = 4096;
  acq::SearchBudget search;
  bench::EvalKind blackbox_kind = bench::EvalKind::builtin;
  std::string builtin;  // kind == builtin
  std::string command;  // kind == command

  SearchSpace space() const;

  /// Checksum of the normalized configuration; persisted next to run
  /// artifacts so a resume against a different config is refused.
  std::uint64_t digest() const;
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace egopt

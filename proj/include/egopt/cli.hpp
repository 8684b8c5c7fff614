#pragma once

#include <filesystem>
#include <optional>

#include "egopt/config.hpp"
#include "egopt/driver.hpp"

namespace egopt::cli {

/// Emits the initialization design as CSV (header `eval_id,<param names>`,
/// raw values) to out_path.
void cmd_design(const RunConfig& config, const std::filesystem::path& out_path);

/// Runs the full loop. Writes history.csv (flushed after every batch),
/// batches.jsonl, meta.json and summary.json into out_dir. With resume=true
/// an existing history is continued instead of restarted. parallel_cap > 0
/// limits concurrent evaluations in both phases.
RunHistory cmd_run(const RunConfig& config, const std::filesystem::path& out_dir, bool resume,
                   int parallel_cap);

/// Reads a history CSV, fits the linear sensitivity model on the warped
/// (unit-cube) parameter values against the response, and writes anova.csv
/// and ss_percentages.csv into out_dir; also prints an aligned table.
void cmd_sensitivity(const std::filesystem::path& history_path, const RunConfig& config,
                     const std::filesystem::path& out_dir);

/// Emits convergence data (eval_id, response, best_so_far, phase) for a
/// history CSV. The direction comes from the config when given, otherwise
/// from a meta.json next to the history, otherwise minimize.
void cmd_report(const std::filesystem::path& history_path,
                const std::optional<RunConfig>& config, const std::filesystem::path& out_dir);

}  // namespace egopt::cli

#include <CLI11.hpp>
#include <iostream>
#include <optional>

#include "egopt/cli.hpp"
#include "egopt/config.hpp"
#include "egopt/history_io.hpp"

namespace {

egopt::RunConfig load(const std::string& config_path, const std::optional<std::uint64_t>& seed) {
  egopt::RunConfig cfg = egopt::load_config(config_path);
  if (seed) cfg.seed = *seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Black-box hyperparameter optimization: Latin hypercube initialization, "
               "Kriging surrogate, expected-improvement search"};
  app.require_subcommand(1);

  std::string config_path;
  std::string history_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed_override;
  bool resume = false;
  int parallel = 0;

  auto* design = app.add_subcommand("design", "emit the initialization design as CSV");
  design->add_option("--config", config_path, "run configuration (JSON)")->required();
  design->add_option("--out", out_dir, "output directory");
  design->add_option("--seed", seed_override, "override the config seed");

  auto* run = app.add_subcommand("run", "run the full optimization loop");
  run->add_option("--config", config_path, "run configuration (JSON)")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--seed", seed_override, "override the config seed");
  run->add_flag("--resume", resume, "continue an interrupted run in --out");
  run->add_option("--parallel", parallel, "cap concurrent evaluations");

  auto* sensitivity = app.add_subcommand("sensitivity", "ANOVA sensitivity table from a history");
  sensitivity->add_option("--config", config_path, "run configuration (JSON)")->required();
  sensitivity->add_option("--history", history_path, "history CSV")->required();
  sensitivity->add_option("--out", out_dir, "output directory");

  auto* report = app.add_subcommand("report", "convergence data from a history");
  report->add_option("--history", history_path, "history CSV")->required();
  report->add_option("--config", config_path, "run configuration (JSON, for the direction)");
  report->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (design->parsed()) {
      const auto cfg = load(config_path, seed_override);
      egopt::cli::cmd_design(cfg, std::filesystem::path(out_dir) / "design.csv");
    } else if (run->parsed()) {
      const auto cfg = load(config_path, seed_override);
      const auto history = egopt::cli::cmd_run(cfg, out_dir, resume, parallel);
      try {
        const auto summary = egopt::phase_summary(history);
        std::cout << "best " << (cfg.direction == egopt::bench::Direction::maximize
                                     ? std::max(summary.init_best, summary.ego_best)
                                     : std::min(summary.init_best, summary.ego_best))
                  << " (init " << summary.init_best << ", ego " << summary.ego_best
                  << ", improvement " << summary.improvement_fraction << ")\n";
      } catch (const std::exception&) {
        // single-phase runs have no summary line
      }
    } else if (sensitivity->parsed()) {
      const auto cfg = load(config_path, std::nullopt);
      egopt::cli::cmd_sensitivity(history_path, cfg, out_dir);
    } else if (report->parsed()) {
      std::optional<egopt::RunConfig> cfg;
      if (!config_path.empty()) cfg = load(config_path, std::nullopt);
      egopt::cli::cmd_report(history_path, cfg, out_dir);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

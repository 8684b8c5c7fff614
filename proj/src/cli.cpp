#include "egopt/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "egopt/command_eval.hpp"
#include "egopt/history_io.hpp"
#include "egopt/sensitivity.hpp"

namespace egopt::cli {

namespace {

Evaluator build_evaluator(const RunConfig& config, const SearchSpace& space) {
  Evaluator ev;
  if (config.blackbox_kind == bench::EvalKind::builtin) {
    ev = bench::make_builtin(config.builtin);
  } else {
    ev = make_command_evaluator(config.command, space, config.direction);
  }
  ev.direction = config.direction;  // the config owns the optimization sense
  return ev;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

void cmd_design(const RunConfig& config, const std::filesystem::path& out_path) {
  const SearchSpace space = config.space();
  const DesignMatrix design = initial_design(space.dim(), config.budget.n_init, config.seed);

  if (out_path.has_parent_path()) {
    std::filesystem::create_directories(out_path.parent_path());
  }
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write " + out_path.string());
  }
  out << "eval_id";
  for (const auto& p : space.params()) out << ',' << p.name;
  out << '\n';
  for (Eigen::Index i = 0; i < design.points.rows(); ++i) {
    const Eigen::VectorXd raw = space.from_unit(design.points.row(i).transpose());
    out << i;
    for (Eigen::Index j = 0; j < raw.size(); ++j) out << ',' << io::format_double(raw[j]);
    out << '\n';
  }
}

RunHistory cmd_run(const RunConfig& config, const std::filesystem::path& out_dir, bool resume,
                   int parallel_cap) {
  const SearchSpace space = config.space();
  const Evaluator evaluator = build_evaluator(config, space);

  std::filesystem::create_directories(out_dir);
  const auto history_path = out_dir / "history.csv";
  const auto batches_path = out_dir / "batches.jsonl";
  const auto meta_path = out_dir / "meta.json";
  const auto summary_path = out_dir / "summary.json";

  DriverConfig driver_cfg;
  driver_cfg.seed = config.seed;
  driver_cfg.gp = config.gp;
  driver_cfg.search = config.search;
  // Batches are always rescored with the Monte Carlo qEI; "ei" keeps the
  // rescore at the minimum sample count since only the per-point analytic
  // scores are of interest then.
  driver_cfg.mc_samples = config.acquisition_type == "qei" ? config.mc_samples : 1000;
  driver_cfg.init_parallelism = config.init_parallelism;
  driver_cfg.max_parallel = parallel_cap;
  if (parallel_cap > 0) {
    driver_cfg.init_parallelism = std::min(driver_cfg.init_parallelism, parallel_cap);
  }

  RunHistory partial;
  partial.direction = config.direction;
  if (resume) {
    io::check_meta_json(meta_path, config);
    std::ifstream in(history_path);
    if (!in) {
      throw std::runtime_error("cannot open " + history_path.string() + " for resume");
    }
    partial = io::parse_history_csv(in, space, config.direction);
    for (const auto& line : read_lines(batches_path)) {
      partial.batches.push_back(io::parse_batch_record_line(line));
    }
    partial = trim_to_resume_point(config.budget, std::move(partial));
  } else {
    if (std::filesystem::exists(history_path)) {
      throw std::runtime_error(history_path.string() +
                               " already exists (pass --resume to continue it)");
    }
    io::write_meta_json(meta_path, config);
  }
  partial.config_digest = config.digest();

  // Rewrite both progress files to the resume point, then append per batch.
  {
    std::ofstream hist(history_path, std::ios::trunc);
    if (!hist) {
      throw std::runtime_error("cannot write " + history_path.string());
    }
    io::write_history_csv(hist, partial, space);
    std::ofstream batches(batches_path, std::ios::trunc);
    for (const auto& record : partial.batches) {
      batches << io::batch_record_line(record) << '\n';
    }
  }

  std::ofstream hist(history_path, std::ios::app);
  std::ofstream batches(batches_path, std::ios::app);
  driver_cfg.on_progress = [&](const RunHistory& h, int new_obs, int new_batches) {
    for (std::size_t i = h.observations.size() - static_cast<std::size_t>(new_obs);
         i < h.observations.size(); ++i) {
      hist << io::history_row(h.observations[i]) << '\n';
    }
    hist.flush();
    for (std::size_t i = h.batches.size() - static_cast<std::size_t>(new_batches);
         i < h.batches.size(); ++i) {
      batches << io::batch_record_line(h.batches[i]) << '\n';
    }
    batches.flush();
  };

  RunHistory history = resume_run(space, evaluator, config.budget, driver_cfg, partial);
  io::write_summary_json(summary_path, config, history, space);
  return history;
}

void cmd_sensitivity(const std::filesystem::path& history_path, const RunConfig& config,
                     const std::filesystem::path& out_dir) {
  const SearchSpace space = config.space();
  std::ifstream in(history_path);
  if (!in) {
    throw std::runtime_error("cannot open " + history_path.string());
  }
  const RunHistory history = io::parse_history_csv(in, space, config.direction);

  std::vector<const Observation*> ok_rows;
  for (const auto& obs : history.observations) {
    if (obs.status == Status::ok) ok_rows.push_back(&obs);
  }
  const int d = space.dim();
  if (static_cast<int>(ok_rows.size()) < d + 5) {
    throw std::invalid_argument("sensitivity: need at least " + std::to_string(d + 5) +
                                " ok observations, found " + std::to_string(ok_rows.size()));
  }

  Eigen::MatrixXd x(ok_rows.size(), d);
  Eigen::VectorXd y(ok_rows.size());
  for (std::size_t i = 0; i < ok_rows.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = ok_rows[i]->u.transpose();
    y[static_cast<Eigen::Index>(i)] = ok_rows[i]->response;
  }
  std::vector<std::string> names;
  for (const auto& p : space.params()) names.push_back(p.name);

  const sens::AnovaTable table = sens::anova_sequential(x, y, names);
  const auto percents = sens::ss_percentages(table);
  const auto ablation = sens::ablation_delta_r2(x, y, names);

  std::filesystem::create_directories(out_dir);
  {
    std::ofstream out(out_dir / "anova.csv", std::ios::trunc);
    out << "factor,df,ss,ms,f_value,p_value\n";
    auto emit = [&out](const sens::AnovaRow& row) {
      out << row.factor << ',' << row.df << ',' << io::format_double(row.ss) << ','
          << io::format_double(row.ms) << ',' << io::format_double(row.f_value) << ','
          << io::format_double(row.p_value) << '\n';
    };
    for (const auto& row : table.factors) emit(row);
    emit(table.residual);
  }
  {
    std::ofstream out(out_dir / "ss_percentages.csv", std::ios::trunc);
    out << "factor,percent\n";
    for (const auto& [factor, percent] : percents) {
      out << factor << ',' << io::format_double(percent) << '\n';
    }
  }

  std::ostringstream text;
  text << std::left << std::setw(16) << "factor" << std::right << std::setw(4) << "df"
       << std::setw(16) << "ss" << std::setw(16) << "ms" << std::setw(12) << "f" << std::setw(12)
       << "p" << std::setw(10) << "ss%" << '\n';
  auto line = [&](const sens::AnovaRow& row, double percent) {
    text << std::left << std::setw(16) << row.factor << std::right << std::setw(4) << row.df
         << std::setw(16) << std::fixed << std::setprecision(2) << row.ss << std::setw(16)
         << row.ms;
    if (std::isnan(row.f_value)) {
      text << std::setw(12) << "" << std::setw(12) << "";
    } else {
      text << std::setw(12) << std::setprecision(2) << row.f_value << std::setw(12)
           << std::setprecision(4) << row.p_value;
    }
    text << std::setw(9) << std::setprecision(1) << percent << "%" << '\n';
  };
  for (std::size_t i = 0; i < table.factors.size(); ++i) {
    line(table.factors[i], percents[i].second);
  }
  line(table.residual, percents.back().second);
  text << '\n' << "leave-one-out ablation (drop in R^2):" << '\n';
  for (const auto& [factor, delta] : ablation) {
    text << "  " << std::left << std::setw(16) << factor << std::right << std::fixed
         << std::setprecision(4) << delta << '\n';
  }
  std::cout << text.str();
}

void cmd_report(const std::filesystem::path& history_path,
                const std::optional<RunConfig>& config, const std::filesystem::path& out_dir) {
  bench::Direction direction = bench::Direction::minimize;
  if (config) {
    direction = config->direction;
  } else {
    const auto meta_path = history_path.parent_path() / "meta.json";
    std::ifstream meta(meta_path);
    if (meta) {
      nlohmann::json j;
      meta >> j;
      direction = bench::direction_from_name(j.at("direction").get<std::string>());
    }
  }

  // Parsed positionally so a report never needs the original config.
  std::ifstream in(history_path);
  if (!in) {
    throw std::runtime_error("cannot open " + history_path.string());
  }
  std::string header;
  if (!std::getline(in, header)) {
    throw std::invalid_argument("report: empty history");
  }
  std::istringstream head(header);
  std::vector<std::string> columns;
  std::string field;
  while (std::getline(head, field, ',')) columns.push_back(field);
  if (columns.size() < 5 || columns[0] != "eval_id" || columns[1] != "phase" ||
      columns[2] != "status" || columns.back() != "response") {
    throw std::invalid_argument("report: unrecognized history header");
  }

  std::filesystem::create_directories(out_dir);
  std::ofstream out(out_dir / "convergence.csv", std::ios::trunc);
  out << "eval_id,response,best_so_far,phase\n";

  const bool maximize = direction == bench::Direction::maximize;
  double best = std::numeric_limits<double>::quiet_NaN();
  std::string line;
  bool any = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    any = true;
    std::istringstream row(line);
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != columns.size()) {
      throw std::invalid_argument("report: malformed row '" + line + "'");
    }
    const double response = io::parse_double(fields.back());
    if (fields[2] == "ok") {
      if (std::isnan(best) || (maximize ? response > best : response < best)) {
        best = response;
      }
    }
    out << fields[0] << ',' << fields.back() << ',' << io::format_double(best) << ','
        << fields[1] << '\n';
  }
  if (!any) {
    throw std::invalid_argument("report: history has no observations");
  }
}

}  // namespace egopt::cli

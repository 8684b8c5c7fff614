#include "egopt/history_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace egopt::io {

namespace {

using nlohmann::json;

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

json kernel_to_json(const gp::KernelParams& kernel) {
  json theta = json::array();
  for (Eigen::Index j = 0; j < kernel.theta.size(); ++j) theta.push_back(kernel.theta[j]);
  return {{"theta", theta}, {"nugget", kernel.nugget}};
}

json nan_safe(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), v);
  return std::string(buffer, result.ptr);
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc{} || result.ptr != end) {
    throw std::invalid_argument("not a decimal number: '" + text + "'");
  }
  return value;
}

std::string history_header(const SearchSpace& space) {
  std::string header = "eval_id,phase,status,duration_s";
  for (const auto& p : space.params()) {
    header += ',';
    header += p.name;
  }
  header += ",response";
  return header;
}

std::string history_row(const Observation& obs) {
  std::string row = std::to_string(obs.eval_id);
  row += ',';
  row += phase_name(obs.phase);
  row += ',';
  row += status_name(obs.status);
  row += ',';
  row += format_double(obs.duration_s);
  for (Eigen::Index j = 0; j < obs.raw.size(); ++j) {
    row += ',';
    row += format_double(obs.raw[j]);
  }
  row += ',';
  row += format_double(obs.response);
  return row;
}

void write_history_csv(std::ostream& out, const RunHistory& history, const SearchSpace& space) {
  out << history_header(space) << '\n';
  for (const auto& obs : history.observations) {
    out << history_row(obs) << '\n';
  }
}

RunHistory parse_history_csv(std::istream& in, const SearchSpace& space,
                             bench::Direction direction) {
  RunHistory history;
  history.direction = direction;
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("history: empty file");
  }
  if (line != history_header(space)) {
    throw std::invalid_argument("history: header does not match the configured parameters");
  }
  const int d = space.dim();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_line(line);
    if (static_cast<int>(fields.size()) != 5 + d) {
      throw std::invalid_argument("history: malformed row '" + line + "'");
    }
    Observation obs;
    obs.eval_id = static_cast<int>(parse_double(fields[0]));
    obs.phase = phase_from_name(fields[1]);
    obs.status = status_from_name(fields[2]);
    obs.duration_s = parse_double(fields[3]);
    obs.raw.resize(d);
    for (int j = 0; j < d; ++j) {
      obs.raw[j] = parse_double(fields[4 + static_cast<std::size_t>(j)]);
    }
    obs.response = parse_double(fields[4 + static_cast<std::size_t>(d)]);
    obs.u = space.to_unit(obs.raw);
    obs.internal = direction == bench::Direction::maximize ? -obs.response : obs.response;
    obs.imputed = obs.status == Status::failed;
    history.observations.push_back(std::move(obs));
  }
  return history;
}

std::string batch_record_line(const BatchRecord& record) {
  json j;
  j["batch_index"] = record.batch_index;
  j["first_eval_id"] = record.first_eval_id;
  j["count"] = record.count;
  j["n_train"] = record.n_train;
  j["model_digest"] = record.model_digest;
  j["kernel"] = kernel_to_json(record.kernel);
  j["loo_r2"] = nan_safe(record.loo_r2);
  return j.dump();
}

BatchRecord parse_batch_record_line(const std::string& line) {
  const json j = json::parse(line);
  BatchRecord record;
  record.batch_index = j.at("batch_index").get<int>();
  record.first_eval_id = j.at("first_eval_id").get<int>();
  record.count = j.at("count").get<int>();
  record.n_train = j.at("n_train").get<int>();
  record.model_digest = j.at("model_digest").get<std::uint64_t>();
  const json& kernel = j.at("kernel");
  const json& theta = kernel.at("theta");
  record.kernel.theta.resize(static_cast<Eigen::Index>(theta.size()));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    record.kernel.theta[static_cast<Eigen::Index>(i)] = theta.at(i).get<double>();
  }
  record.kernel.nugget = kernel.at("nugget").get<double>();
  record.loo_r2 = j.at("loo_r2").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                           : j.at("loo_r2").get<double>();
  return record;
}

void write_meta_json(const std::filesystem::path& path, const RunConfig& config) {
  json j;
  j["schema"] = 1;
  j["name"] = config.name;
  j["config_digest"] = config.digest();
  j["seed"] = config.seed;
  j["direction"] = bench::direction_name(config.direction);
  json names = json::array();
  for (const auto& p : config.parameters) names.push_back(p.name);
  j["parameters"] = names;
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << j.dump(2) << '\n';
}

void check_meta_json(const std::filesystem::path& path, const RunConfig& config) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string() +
                             " (was this directory produced by a run?)");
  }
  json j;
  in >> j;
  if (j.at("config_digest").get<std::uint64_t>() != config.digest()) {
    throw std::runtime_error("refusing to resume: " + path.string() +
                             " was produced with a different configuration");
  }
}

void write_summary_json(const std::filesystem::path& path, const RunConfig& config,
                        const RunHistory& history, const SearchSpace& space) {
  json j;
  j["schema"] = 1;
  j["name"] = config.name;
  j["direction"] = bench::direction_name(config.direction);
  j["seed"] = config.seed;
  j["config_digest"] = config.digest();

  int n_init = 0, n_ego = 0, n_failed = 0;
  const Observation* best = nullptr;
  for (const auto& obs : history.observations) {
    if (obs.phase == Phase::init) ++n_init;
    else ++n_ego;
    if (obs.status == Status::failed) ++n_failed;
    if (obs.status == Status::ok && (best == nullptr || obs.internal < best->internal)) {
      best = &obs;
    }
  }
  j["counts"] = {{"init", n_init}, {"ego", n_ego}, {"failed", n_failed}};

  if (best != nullptr) {
    json params;
    for (int k = 0; k < space.dim(); ++k) {
      params[space.param(k).name] = best->raw[k];
    }
    j["best"] = {{"eval_id", best->eval_id}, {"params", params}, {"response", best->response}};
  } else {
    j["best"] = nullptr;
  }

  try {
    const PhaseSummary summary = phase_summary(history);
    j["phase_summary"] = {{"init_best", summary.init_best},
                          {"ego_best", summary.ego_best},
                          {"improvement_fraction", nan_safe(summary.improvement_fraction)}};
  } catch (const std::exception&) {
    j["phase_summary"] = nullptr;
  }

  json refits = json::array();
  for (const auto& record : history.batches) {
    refits.push_back({{"batch_index", record.batch_index},
                      {"first_eval_id", record.first_eval_id},
                      {"count", record.count},
                      {"n_train", record.n_train},
                      {"model_digest", record.model_digest},
                      {"kernel", kernel_to_json(record.kernel)},
                      {"loo_r2", nan_safe(record.loo_r2)}});
  }
  j["refits"] = refits;

  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << j.dump(2) << '\n';
}

}  // namespace egopt::io

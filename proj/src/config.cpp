#include "egopt/config.hpp"

#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace egopt {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const char* where, std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw std::invalid_argument(std::string("config: unknown key '") + item.key() + "' in " +
                                  where);
    }
  }
}

bool valid_identifier(const std::string& name) {
  if (name.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_')) return false;
  for (char c : name) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) {
      return false;
    }
  }
  return true;
}

ParameterSpec parse_parameter(const json& p) {
  check_keys(p, "parameters[]", {"name", "lower", "upper", "warp", "integer"});
  ParameterSpec spec;
  spec.name = p.at("name").get<std::string>();
  if (!valid_identifier(spec.name)) {
    throw std::invalid_argument("config: parameter name '" + spec.name +
                                "' is not a valid identifier");
  }
  spec.lower = p.at("lower").get<double>();
  spec.upper = p.at("upper").get<double>();
  if (p.contains("warp")) spec.warp = warp_from_name(p.at("warp").get<std::string>());
  if (p.contains("integer")) spec.integer = p.at("integer").get<bool>();
  spec.validate();
  return spec;
}

json normalized_json(const RunConfig& cfg) {
  json root;
  root["schema"] = 1;
  root["name"] = cfg.name;
  root["direction"] = bench::direction_name(cfg.direction);
  root["seed"] = cfg.seed;
  root["budget"] = {{"n_init", cfg.budget.n_init},
                    {"n_opt", cfg.budget.n_opt},
                    {"q", cfg.budget.q},
                    {"init_parallelism", cfg.init_parallelism}};
  json params = json::array();
  for (const auto& p : cfg.parameters) {
    params.push_back({{"name", p.name},
                      {"lower", p.lower},
                      {"upper", p.upper},
                      {"warp", warp_name(p.warp)},
                      {"integer", p.integer}});
  }
  root["parameters"] = params;
  root["gp"] = {{"restarts", cfg.gp.restarts},
                {"theta_bounds", {cfg.gp.theta_bounds[0], cfg.gp.theta_bounds[1]}},
                {"nugget_bounds", {cfg.gp.nugget_bounds[0], cfg.gp.nugget_bounds[1]}}};
  root["acquisition"] = {{"type", cfg.acquisition_type},
                         {"mc_samples", cfg.mc_samples},
                         {"multistarts", cfg.search.multistarts},
                         {"local_steps", cfg.search.local_steps}};
  json bb;
  bb["kind"] = cfg.blackbox_kind == bench::EvalKind::builtin ? "builtin" : "command";
  if (cfg.blackbox_kind == bench::EvalKind::builtin) {
    bb["builtin"] = cfg.builtin;
  } else {
    bb["command"] = cfg.command;
  }
  root["blackbox"] = bb;
  return root;
}

}  // namespace

SearchSpace RunConfig::space() const {
  return SearchSpace(parameters);
}

std::uint64_t RunConfig::digest() const {
  const std::string text = normalized_json(*this).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RunConfig parse_config(const std::string& json_text) {
  json root = json::parse(json_text);
  check_keys(root, "top level",
             {"schema", "name", "direction", "seed", "budget", "parameters", "gp", "acquisition",
              "blackbox"});
  if (!root.contains("schema") || root.at("schema").get<int>() != 1) {
    throw std::invalid_argument("config: missing or unsupported schema (expected 1)");
  }

  RunConfig cfg;
  cfg.name = root.value("name", std::string("run"));
  cfg.direction = bench::direction_from_name(root.value("direction", std::string("minimize")));
  if (root.contains("seed")) cfg.seed = root.at("seed").get<std::uint64_t>();

  const json& budget = root.at("budget");
  check_keys(budget, "budget", {"n_init", "n_opt", "q", "init_parallelism"});
  cfg.budget.n_init = budget.at("n_init").get<int>();
  cfg.budget.n_opt = budget.at("n_opt").get<int>();
  cfg.budget.q = budget.value("q", 1);
  cfg.init_parallelism = budget.value("init_parallelism", 1);
  if (cfg.init_parallelism < 1) {
    throw std::invalid_argument("config: budget.init_parallelism must be >= 1");
  }

  const json& params = root.at("parameters");
  if (!params.is_array() || params.empty()) {
    throw std::invalid_argument("config: parameters must be a non-empty array");
  }
  for (const auto& p : params) {
    cfg.parameters.push_back(parse_parameter(p));
  }
  // Full plan validation (n_init >= d+2 etc.) happens when a run starts;
  // design-only configs may use any positive counts.
  if (cfg.budget.n_init < 1 || cfg.budget.n_opt < 1 || cfg.budget.q < 1) {
    throw std::invalid_argument("config: budget counts must be positive");
  }
  (void)cfg.space();  // re-runs the cross-parameter validation (unique names)

  if (root.contains("gp")) {
    const json& gp = root.at("gp");
    check_keys(gp, "gp", {"restarts", "theta_bounds", "nugget_bounds"});
    cfg.gp.restarts = gp.value("restarts", cfg.gp.restarts);
    if (gp.contains("theta_bounds")) {
      cfg.gp.theta_bounds = {gp.at("theta_bounds").at(0).get<double>(),
                             gp.at("theta_bounds").at(1).get<double>()};
    }
    if (gp.contains("nugget_bounds")) {
      cfg.gp.nugget_bounds = {gp.at("nugget_bounds").at(0).get<double>(),
                              gp.at("nugget_bounds").at(1).get<double>()};
    }
    if (cfg.gp.restarts < 1 || !(cfg.gp.theta_bounds[0] > 0.0) ||
        !(cfg.gp.theta_bounds[1] > cfg.gp.theta_bounds[0]) || !(cfg.gp.nugget_bounds[0] > 0.0) ||
        !(cfg.gp.nugget_bounds[1] > cfg.gp.nugget_bounds[0])) {
      throw std::invalid_argument("config: invalid gp section");
    }
  }

  if (root.contains("acquisition")) {
    const json& acq = root.at("acquisition");
    check_keys(acq, "acquisition", {"type", "mc_samples", "multistarts", "local_steps"});
    cfg.acquisition_type = acq.value("type", cfg.acquisition_type);
    if (cfg.acquisition_type != "ei" && cfg.acquisition_type != "qei") {
      throw std::invalid_argument("config: acquisition.type must be ei or qei");
    }
    cfg.mc_samples = acq.value("mc_samples", cfg.mc_samples);
    cfg.search.multistarts = acq.value("multistarts", cfg.search.multistarts);
    cfg.search.local_steps = acq.value("local_steps", cfg.search.local_steps);
    if (cfg.mc_samples < 1000 || cfg.search.multistarts < 1 || cfg.search.local_steps < 1) {
      throw std::invalid_argument("config: invalid acquisition section");
    }
  }

  const json& bb = root.at("blackbox");
  if (bb.is_string()) {
    // Compact form: "builtin:branin" or "command:./evaluate.sh".
    const std::string text = bb.get<std::string>();
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument("config: blackbox string must look like kind:spec");
    }
    const std::string kind = text.substr(0, colon);
    const std::string spec = text.substr(colon + 1);
    if (kind == "builtin") {
      cfg.blackbox_kind = bench::EvalKind::builtin;
      cfg.builtin = spec;
    } else if (kind == "command") {
      cfg.blackbox_kind = bench::EvalKind::command;
      cfg.command = spec;
    } else {
      throw std::invalid_argument("config: blackbox kind must be builtin or command");
    }
  } else {
    check_keys(bb, "blackbox", {"kind", "builtin", "command"});
    const std::string kind = bb.at("kind").get<std::string>();
    if (kind == "builtin") {
      cfg.blackbox_kind = bench::EvalKind::builtin;
      cfg.builtin = bb.at("builtin").get<std::string>();
    } else if (kind == "command") {
      cfg.blackbox_kind = bench::EvalKind::command;
      cfg.command = bb.at("command").get<std::string>();
    } else {
      throw std::invalid_argument("config: blackbox.kind must be builtin or command");
    }
  }
  if (cfg.blackbox_kind == bench::EvalKind::builtin) {
    (void)bench::make_builtin(cfg.builtin);  // validates the name
  } else if (cfg.command.empty()) {
    throw std::invalid_argument("config: blackbox.command must not be empty");
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file " + path.string());
  }
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_config(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument("config " + path.string() + ": " + e.what());
  }
}

}  // namespace egopt

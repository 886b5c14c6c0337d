#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "slingshot/errors.hpp"
#include "slingshot/harness.hpp"

namespace slingshot {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void reject_unknown(const json& obj, std::initializer_list<std::string_view> known,
                    const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  const std::set<std::string_view> allowed(known);
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) throw ParseError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(where + "." + key + ": wrong type");
  }
}

void read_features(const json& j, ExtractorConfig& f) {
  const std::string where = "features";
  reject_unknown(j, {"kind", "cells", "pp_cell", "pv_max_pigs", "pv_granularity"}, where);
  if (j.contains("kind")) {
    if (!j["kind"].is_string()) throw ParseError("features.kind: expected a string");
    f.kind = parse_extractor_kind(j["kind"].get<std::string>());
  }
  if (j.contains("cells")) {
    const json& c = j["cells"];
    if (!c.is_array() || c.size() != 3) throw ParseError("features.cells: expected three cell sizes");
    for (std::size_t i = 0; i < 3; ++i) {
      if (!c[i].is_number()) throw ParseError("features.cells: expected numbers");
      f.grid.cell_sizes[i] = c[i].get<double>();
    }
  }
  read(j, "pp_cell", f.pp.cell, where);
  read(j, "pv_max_pigs", f.pv.max_pigs, where);
  read(j, "pv_granularity", f.pv.granularity, where);
}

}  // namespace

std::string_view to_string(Algorithm algo) {
  return algo == Algorithm::QLearning ? "qlearning" : "rlsvi";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "qlearning" || name == "q" || name == "QLearning") return Algorithm::QLearning;
  if (name == "rlsvi" || name == "RLSVI") return Algorithm::Rlsvi;
  throw InvalidArgument("unknown algorithm '" + std::string(name) + "' (expected qlearning or rlsvi)");
}

void ExperimentConfig::validate() const {
  features.validate();
  engine.actions.validate();
  qlearning.validate();
  rlsvi.validate();
  if (total_attempts < 2 || total_attempts % 2 != 0) {
    throw InvalidArgument("total_attempts must be a positive even number (explore/eval pairs)");
  }
  if (ma_window < 1) throw InvalidArgument("ma_window must be at least 1");
  if (!(features.world == engine.physics.world)) {
    throw InvalidArgument("feature world size must match the engine world");
  }
}

ExperimentConfig parse_experiment_config(std::string_view text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("experiment config: ") + e.what());
  }
  reject_unknown(j,
                 {"levels", "algorithm", "features", "qlearning", "rlsvi", "actions", "total_attempts",
                  "seed", "ma_window"},
                 "experiment config");

  ExperimentConfig cfg;
  if (j.contains("levels")) {
    std::filesystem::path p = j["levels"].get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    cfg.levels = p;
  }
  if (j.contains("algorithm")) cfg.algorithm = parse_algorithm(j["algorithm"].get<std::string>());
  if (j.contains("features")) read_features(j["features"], cfg.features);
  if (j.contains("qlearning")) {
    const json& q = j["qlearning"];
    reject_unknown(q, {"epsilon", "eta", "gamma"}, "qlearning");
    read(q, "epsilon", cfg.qlearning.epsilon, "qlearning");
    read(q, "eta", cfg.qlearning.eta, "qlearning");
    read(q, "gamma", cfg.qlearning.gamma, "qlearning");
  }
  if (j.contains("rlsvi")) {
    const json& r = j["rlsvi"];
    reject_unknown(r, {"gamma", "sigma", "prior_variance", "refit_period"}, "rlsvi");
    read(r, "gamma", cfg.rlsvi.gamma, "rlsvi");
    read(r, "sigma", cfg.rlsvi.sigma, "rlsvi");
    read(r, "prior_variance", cfg.rlsvi.prior_variance, "rlsvi");
    read(r, "refit_period", cfg.rlsvi.refit_period, "rlsvi");
  }
  if (j.contains("actions")) {
    const json& a = j["actions"];
    reject_unknown(a, {"n_angles", "n_extensions", "angle_min_deg", "angle_max_deg", "v_max"}, "actions");
    read(a, "n_angles", cfg.engine.actions.n_angles, "actions");
    read(a, "n_extensions", cfg.engine.actions.n_extensions, "actions");
    read(a, "angle_min_deg", cfg.engine.actions.angle_min_deg, "actions");
    read(a, "angle_max_deg", cfg.engine.actions.angle_max_deg, "actions");
    read(a, "v_max", cfg.engine.actions.v_max, "actions");
  }
  read(j, "total_attempts", cfg.total_attempts, "experiment config");
  read(j, "seed", cfg.seed, "experiment config");
  read(j, "ma_window", cfg.ma_window, "experiment config");
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open experiment config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str(), path.parent_path());
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  ordered_json j;
  j["levels"] = cfg.levels.generic_string();
  j["algorithm"] = std::string(to_string(cfg.algorithm));
  j["features"] = {{"kind", std::string(to_string(cfg.features.kind))},
                   {"cells", cfg.features.grid.cell_sizes},
                   {"pp_cell", cfg.features.pp.cell},
                   {"pv_max_pigs", cfg.features.pv.max_pigs},
                   {"pv_granularity", cfg.features.pv.granularity}};
  j["qlearning"] = {{"epsilon", cfg.qlearning.epsilon},
                    {"eta", cfg.qlearning.eta},
                    {"gamma", cfg.qlearning.gamma}};
  j["rlsvi"] = {{"gamma", cfg.rlsvi.gamma},
                {"sigma", cfg.rlsvi.sigma},
                {"prior_variance", cfg.rlsvi.prior_variance},
                {"refit_period", cfg.rlsvi.refit_period}};
  const ActionConfig& a = cfg.engine.actions;
  j["actions"] = {{"n_angles", a.n_angles},
                  {"n_extensions", a.n_extensions},
                  {"angle_min_deg", a.angle_min_deg},
                  {"angle_max_deg", a.angle_max_deg},
                  {"v_max", a.v_max}};
  j["total_attempts"] = cfg.total_attempts;
  j["seed"] = cfg.seed;
  j["ma_window"] = cfg.ma_window;
  return j.dump(2);
}

}  // namespace slingshot

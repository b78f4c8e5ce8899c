#pragma once

// Scenario configuration: a JSON document naming criterion sources, grade
// rules, weights (or a pairwise matrix), constraints and energy parameters.
// Unknown keys are rejected.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "solarsite/kriging.hpp"
#include "solarsite/mcda.hpp"
#include "solarsite/reclass.hpp"

namespace solarsite {

using json = nlohmann::json;

enum class SourceType { grid, kriging, slope, aspect, distance };

inline const char* to_string(SourceType t) {
  switch (t) {
    case SourceType::grid: return "grid";
    case SourceType::kriging: return "kriging";
    case SourceType::slope: return "slope";
    case SourceType::aspect: return "aspect";
    case SourceType::distance: return "distance";
  }
  return "?";
}

struct SourceSpec {
  SourceType type = SourceType::grid;
  std::string path;
  // kriging only
  VariogramKind model = VariogramKind::spherical;
  std::size_t bins = 12;
  std::optional<double> max_lag;

  bool operator==(const SourceSpec&) const = default;
};

struct CriterionConfig {
  CriterionId id = CriterionId::GHI;
  SourceSpec source;
  GradeRule rule;

  bool operator==(const CriterionConfig&) const = default;
};

struct ConstraintConfig {
  std::string name;
  std::string path;
  double buffer_m = 0.0;

  bool operator==(const ConstraintConfig&) const = default;
};

struct ScenarioConfig {
  std::vector<CriterionConfig> criteria;
  std::optional<std::vector<double>> weights;               // criteria order
  std::optional<std::vector<std::vector<double>>> matrix;  // criteria order
  std::vector<ConstraintConfig> constraints;
  ClassBreaks breaks;
  EnergyParams energy;
  bool override_cr = false;

  bool operator==(const ScenarioConfig&) const = default;
};

namespace detail {

inline void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.count(k)) throw ValidationError(where + ": unknown key '" + k + "'");
  }
}

inline double get_number(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) throw ValidationError(where + ": missing '" + key + "'");
  if (!j.at(key).is_number()) throw ValidationError(where + "." + key + ": expected a number");
  return j.at(key).get<double>();
}

inline std::string get_string(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) throw ValidationError(where + ": missing '" + key + "'");
  if (!j.at(key).is_string()) throw ValidationError(where + "." + key + ": expected a string");
  return j.at(key).get<std::string>();
}

inline GradeRule rule_from_json(const json& j, const std::string& where) {
  const auto type = get_string(j, where, "type");
  if (type == "ascending" || type == "descending") {
    check_keys(j, where, {"type", "origin", "delta"});
    const double o = get_number(j, where, "origin"), d = get_number(j, where, "delta");
    GradeRule r = type == "ascending" ? GradeRule{AscendingBands{o, d}} : GradeRule{DescendingBands{o, d}};
    validate_rule(r);
    return r;
  }
  if (type == "azimuth") {
    check_keys(j, where, {"type"});
    return AzimuthClasses{};
  }
  if (type == "proximity") {
    check_keys(j, where, {"type", "max", "delta", "buffer"});
    GradeRule r = ProximityBands{get_number(j, where, "max"), get_number(j, where, "delta"),
                                 get_number(j, where, "buffer")};
    validate_rule(r);
    return r;
  }
  throw ValidationError(where + ".type: unknown grade rule '" + type + "'");
}

inline json rule_to_json(const GradeRule& rule) {
  return std::visit(
      [](const auto& r) -> json {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, AscendingBands>) {
          return {{"type", "ascending"}, {"origin", r.origin}, {"delta", r.delta}};
        } else if constexpr (std::is_same_v<R, DescendingBands>) {
          return {{"type", "descending"}, {"origin", r.origin}, {"delta", r.delta}};
        } else if constexpr (std::is_same_v<R, AzimuthClasses>) {
          return {{"type", "azimuth"}};
        } else {
          return {{"type", "proximity"}, {"max", r.max}, {"delta", r.delta}, {"buffer", r.buffer}};
        }
      },
      rule);
}

inline double judgment_from_json(const json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    try {
      return ahp::parse_judgment(v.get<std::string>());
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  throw ValidationError(where + ": judgment must be a number or an 'a/b' string");
}

}  // namespace detail

/// Parses a JSON matrix (array of arrays; numbers or "a/b" strings).
inline std::vector<std::vector<double>> matrix_from_json(const json& j, const std::string& where = "matrix") {
  if (!j.is_array()) throw ValidationError(where + ": expected an array of rows");
  std::vector<std::vector<double>> m;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& row = j[i];
    const std::string rw = where + "[" + std::to_string(i) + "]";
    if (!row.is_array()) throw ValidationError(rw + ": expected an array");
    std::vector<double> r;
    for (std::size_t k = 0; k < row.size(); ++k) {
      r.push_back(detail::judgment_from_json(row[k], rw + "[" + std::to_string(k) + "]"));
    }
    m.push_back(std::move(r));
  }
  return m;
}

inline ScenarioConfig scenario_config_from_json(const json& j) {
  detail::check_keys(j, "config", {"criteria", "weights", "matrix", "constraints", "class_breaks", "energy",
                                   "override_cr"});
  ScenarioConfig cfg;
  if (!j.contains("criteria") || !j.at("criteria").is_array() || j.at("criteria").empty()) {
    throw ValidationError("config: 'criteria' must be a non-empty array");
  }
  std::set<CriterionId> seen;
  for (std::size_t i = 0; i < j.at("criteria").size(); ++i) {
    const auto& cj = j.at("criteria")[i];
    const std::string where = "criteria[" + std::to_string(i) + "]";
    detail::check_keys(cj, where, {"id", "source", "rule"});
    CriterionConfig c;
    c.id = criterion_from_string(detail::get_string(cj, where, "id"));
    if (!seen.insert(c.id).second) {
      throw ValidationError(where + ": criterion " + std::string(to_string(c.id)) + " listed twice");
    }
    if (!cj.contains("source")) throw ValidationError(where + ": missing 'source'");
    const auto& sj = cj.at("source");
    const std::string sw = where + ".source";
    const auto type = detail::get_string(sj, sw, "type");
    if (type == "kriging") {
      detail::check_keys(sj, sw, {"type", "path", "model", "bins", "max_lag"});
      c.source.type = SourceType::kriging;
      if (sj.contains("model")) c.source.model = variogram_kind_from_string(detail::get_string(sj, sw, "model"));
      if (sj.contains("bins")) {
        if (!sj.at("bins").is_number_integer() || sj.at("bins").get<long long>() < 3) {
          throw ValidationError(sw + ".bins: expected an integer >= 3");
        }
        c.source.bins = sj.at("bins").get<std::size_t>();
      }
      if (sj.contains("max_lag")) {
        c.source.max_lag = detail::get_number(sj, sw, "max_lag");
        if (!(*c.source.max_lag > 0.0)) throw ValidationError(sw + ".max_lag: must be positive");
      }
    } else {
      detail::check_keys(sj, sw, {"type", "path"});
      if (type == "grid") c.source.type = SourceType::grid;
      else if (type == "slope") c.source.type = SourceType::slope;
      else if (type == "aspect") c.source.type = SourceType::aspect;
      else if (type == "distance") c.source.type = SourceType::distance;
      else throw ValidationError(sw + ".type: unknown source type '" + type + "'");
    }
    c.source.path = detail::get_string(sj, sw, "path");
    c.rule = cj.contains("rule") ? detail::rule_from_json(cj.at("rule"), where + ".rule") : default_rule(c.id);
    cfg.criteria.push_back(std::move(c));
  }

  const bool has_w = j.contains("weights"), has_m = j.contains("matrix");
  if (has_w == has_m) throw ValidationError("config: give exactly one of 'weights' or 'matrix'");
  if (has_w) {
    const auto& wj = j.at("weights");
    if (!wj.is_object()) throw ValidationError("weights: expected an object keyed by criterion id");
    std::vector<double> w;
    for (const auto& c : cfg.criteria) {
      const std::string key(to_string(c.id));
      if (!wj.contains(key)) throw ValidationError("weights: missing weight for " + key);
      w.push_back(detail::get_number(wj, "weights", key.c_str()));
    }
    for (const auto& [k, v] : wj.items()) {
      const auto id = criterion_from_string(k);
      if (!seen.count(id)) throw ValidationError("weights: " + k + " is not a configured criterion");
    }
    cfg.weights = std::move(w);
  } else {
    cfg.matrix = matrix_from_json(j.at("matrix"));
    if (cfg.matrix->size() != cfg.criteria.size()) {
      throw ValidationError("matrix: order " + std::to_string(cfg.matrix->size()) + " does not match " +
                            std::to_string(cfg.criteria.size()) + " criteria");
    }
  }

  if (j.contains("constraints")) {
    const auto& cs = j.at("constraints");
    if (!cs.is_array()) throw ValidationError("constraints: expected an array");
    std::set<std::string> names;
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const std::string where = "constraints[" + std::to_string(i) + "]";
      detail::check_keys(cs[i], where, {"name", "path", "buffer_m"});
      ConstraintConfig c;
      c.name = detail::get_string(cs[i], where, "name");
      c.path = detail::get_string(cs[i], where, "path");
      if (cs[i].contains("buffer_m")) c.buffer_m = detail::get_number(cs[i], where, "buffer_m");
      if (!(c.buffer_m >= 0.0)) throw ValidationError(where + ".buffer_m: must be non-negative");
      if (!names.insert(c.name).second) throw ValidationError(where + ": duplicate constraint name '" + c.name + "'");
      cfg.constraints.push_back(std::move(c));
    }
  }
  if (j.contains("class_breaks")) {
    const auto& b = j.at("class_breaks");
    if (!b.is_array()) throw ValidationError("class_breaks: expected an array");
    cfg.breaks.edges.clear();
    for (const auto& e : b) {
      if (!e.is_number()) throw ValidationError("class_breaks: expected numbers");
      cfg.breaks.edges.push_back(e.get<double>());
    }
    cfg.breaks.validate();
  }
  if (j.contains("energy")) {
    const auto& e = j.at("energy");
    detail::check_keys(e, "energy", {"shading_factor", "efficiency", "daylight_hours", "sr_override"});
    if (e.contains("shading_factor")) cfg.energy.shading_factor = detail::get_number(e, "energy", "shading_factor");
    if (e.contains("efficiency")) cfg.energy.efficiency = detail::get_number(e, "energy", "efficiency");
    if (e.contains("daylight_hours")) cfg.energy.daylight_hours = detail::get_number(e, "energy", "daylight_hours");
    if (e.contains("sr_override") && !e.at("sr_override").is_null()) {
      cfg.energy.sr_override = detail::get_number(e, "energy", "sr_override");
    }
    if (!(cfg.energy.shading_factor > 0 && cfg.energy.shading_factor <= 1)) {
      throw ValidationError("energy.shading_factor: must be in (0, 1]");
    }
    if (!(cfg.energy.efficiency > 0 && cfg.energy.efficiency <= 1)) {
      throw ValidationError("energy.efficiency: must be in (0, 1]");
    }
    if (!(cfg.energy.daylight_hours > 0 && cfg.energy.daylight_hours <= 24)) {
      throw ValidationError("energy.daylight_hours: must be in (0, 24]");
    }
    if (cfg.energy.sr_override && !(*cfg.energy.sr_override >= 0)) {
      throw ValidationError("energy.sr_override: must be non-negative");
    }
  }
  if (j.contains("override_cr")) {
    if (!j.at("override_cr").is_boolean()) throw ValidationError("override_cr: expected a boolean");
    cfg.override_cr = j.at("override_cr").get<bool>();
  }
  return cfg;
}

inline json scenario_config_to_json(const ScenarioConfig& cfg) {
  json j;
  j["criteria"] = json::array();
  for (const auto& c : cfg.criteria) {
    json s = {{"type", to_string(c.source.type)}, {"path", c.source.path}};
    if (c.source.type == SourceType::kriging) {
      s["model"] = to_string(c.source.model);
      s["bins"] = c.source.bins;
      if (c.source.max_lag) s["max_lag"] = *c.source.max_lag;
    }
    j["criteria"].push_back({{"id", std::string(to_string(c.id))}, {"source", s}, {"rule", detail::rule_to_json(c.rule)}});
  }
  if (cfg.weights) {
    json w = json::object();
    for (std::size_t i = 0; i < cfg.criteria.size(); ++i) w[std::string(to_string(cfg.criteria[i].id))] = (*cfg.weights)[i];
    j["weights"] = w;
  }
  if (cfg.matrix) j["matrix"] = *cfg.matrix;
  j["constraints"] = json::array();
  for (const auto& c : cfg.constraints) {
    j["constraints"].push_back({{"name", c.name}, {"path", c.path}, {"buffer_m", c.buffer_m}});
  }
  j["class_breaks"] = cfg.breaks.edges;
  json e = {{"shading_factor", cfg.energy.shading_factor},
            {"efficiency", cfg.energy.efficiency},
            {"daylight_hours", cfg.energy.daylight_hours}};
  e["sr_override"] = cfg.energy.sr_override ? json(*cfg.energy.sr_override) : json(nullptr);
  j["energy"] = e;
  j["override_cr"] = cfg.override_cr;
  return j;
}

inline ScenarioConfig parse_scenario_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  return scenario_config_from_json(j);
}

/// Factor weights for the three proximity-led weighting schemes
/// (1: power grid, 2: roads, 3: settlements), in kAllCriteria order.
inline std::vector<double> approach_weights(int approach) {
  switch (approach) {
    case 1: return {0.250, 0.086, 0.019, 0.026, 0.052, 0.036, 0.272, 0.148, 0.111};
    case 2: return {0.222, 0.093, 0.029, 0.030, 0.071, 0.049, 0.0, 0.351, 0.155};
    case 3: return {0.158, 0.086, 0.021, 0.027, 0.058, 0.043, 0.0, 0.339, 0.268};
    default: throw ValidationError("approach must be 1, 2 or 3");
  }
}

}  // namespace solarsite

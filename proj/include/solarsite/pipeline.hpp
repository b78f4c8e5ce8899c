#pragma once

// Scenario resolution and the end-to-end run:
// derive -> reclassify -> weigh -> mask -> overlay -> account -> sensitivity.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include <openssl/sha.h>

#include "solarsite/ahp.hpp"
#include "solarsite/config.hpp"
#include "solarsite/kriging.hpp"
#include "solarsite/mcda.hpp"
#include "solarsite/reclass.hpp"
#include "solarsite/render.hpp"
#include "solarsite/spatial.hpp"

namespace solarsite {

inline constexpr const char* kToolVersion = "1.0.0";

/// Rejected pairwise judgments (CR above the threshold).
class ConsistencyError : public ValidationError {
 public:
  ConsistencyError(double cr)
      : ValidationError("pairwise matrix is inconsistent: CR = " + format_number(cr) + " exceeds " +
                        format_number(ahp::kConsistencyThreshold) + "; revise the judgments or set override_cr"),
        cr_(cr) {}
  double cr() const noexcept { return cr_; }

 private:
  double cr_;
};

/// Maps config paths to files. With a sandbox root, absolute paths and paths
/// escaping the root are refused.
class PathResolver {
 public:
  explicit PathResolver(std::filesystem::path base, bool sandboxed = false)
      : base_(std::filesystem::weakly_canonical(std::filesystem::absolute(base))), sandboxed_(sandboxed) {}

  std::filesystem::path resolve(const std::string& p) const {
    namespace fs = std::filesystem;
    const fs::path rel(p);
    if (sandboxed_ && rel.is_absolute()) throw ValidationError("path '" + p + "' must be relative to the data root");
    const fs::path full = fs::weakly_canonical(rel.is_absolute() ? rel : base_ / rel);
    if (sandboxed_) {
      auto [b, f] = std::mismatch(base_.begin(), base_.end(), full.begin(), full.end());
      if (b != base_.end()) throw ValidationError("path '" + p + "' escapes the data root");
    }
    return full;
  }

  void check_exists(const std::string& p) const {
    if (!std::filesystem::exists(resolve(p))) throw ValidationError("missing input file '" + p + "'");
  }

 private:
  std::filesystem::path base_;
  bool sandboxed_;
};

struct Scenario {
  ScenarioConfig config;
  GridHeader header;
  std::vector<CriterionLayer> layers;  // sources materialised, grades empty
  ahp::PriorityVector weights;
  std::optional<ahp::ConsistencyReport> consistency;
  ConstraintSet constraints;
  std::vector<std::string> warnings;

  std::optional<Grid> ghi_source() const {
    for (const auto& l : layers)
      if (l.id == CriterionId::GHI) return l.source;
    return std::nullopt;
  }
};

/// Weights from the config: explicit weights (sum within 1e-3 of 1, rescaled
/// to exactly 1) or derived from the pairwise matrix, rejecting CR > 0.05
/// unless overridden.
inline std::pair<ahp::PriorityVector, std::optional<ahp::ConsistencyReport>> resolve_weights(
    const ScenarioConfig& cfg, bool override_cr) {
  if (cfg.weights) {
    double s = 0.0;
    for (double w : *cfg.weights) s += w;
    if (std::abs(s - 1.0) > 1e-3) throw ValidationError("weights must sum to 1 (sum " + format_number(s) + ")");
    return {ahp::PriorityVector::normalized(*cfg.weights), std::nullopt};
  }
  if (!cfg.matrix) throw ValidationError("config has neither weights nor a matrix");
  const auto m = ahp::validate_matrix(*cfg.matrix);
  auto ev = ahp::evaluate(m);
  if (!ev.report.consistent && !(override_cr || cfg.override_cr)) throw ConsistencyError(ev.report.cr);
  return {ev.weights, ev.report};
}

/// Checks that a config is well formed against the files reachable through
/// `paths`, without loading grids. Used before accepting service scenarios.
inline void precheck_scenario(const ScenarioConfig& cfg, const PathResolver& paths, bool override_cr = false) {
  for (const auto& c : cfg.criteria) paths.check_exists(c.source.path);
  for (const auto& c : cfg.constraints) paths.check_exists(c.path);
  resolve_weights(cfg, override_cr);
}

inline Scenario load_scenario(const ScenarioConfig& cfg, const PathResolver& paths, bool override_cr = false) {
  Scenario sc;
  sc.config = cfg;
  std::tie(sc.weights, sc.consistency) = resolve_weights(cfg, override_cr);
  if (sc.consistency && !sc.consistency->consistent) {
    sc.warnings.push_back("pairwise matrix CR " + format_number(sc.consistency->cr) + " accepted by override");
  }

  // Reference frame: the first grid-backed input.
  std::optional<GridHeader> frame;
  auto note_frame = [&](const Grid& g, const std::string& what) {
    if (!frame) {
      frame = g.header();
      return;
    }
    const auto diff = misalignment(*frame, g.header());
    if (!diff.empty()) throw AlignmentError(what + " is not aligned with the scenario grid: " + diff);
  };
  std::map<std::string, Grid> cache;
  auto load = [&](const std::string& p) -> const Grid& {
    auto it = cache.find(p);
    if (it == cache.end()) it = cache.emplace(p, read_grid_file(paths.resolve(p))).first;
    return it->second;
  };
  for (const auto& c : cfg.criteria) {
    if (c.source.type != SourceType::kriging) note_frame(load(c.source.path), c.source.path);
  }
  for (const auto& c : cfg.constraints) note_frame(load(c.path), c.path);
  if (!frame) throw ValidationError("scenario needs at least one grid input to define the analysis grid");
  sc.header = *frame;

  for (const auto& c : cfg.criteria) {
    CriterionLayer layer;
    layer.id = c.id;
    layer.rule = c.rule;
    switch (c.source.type) {
      case SourceType::grid:
        layer.source = load(c.source.path);
        break;
      case SourceType::slope:
        layer.source = slope_aspect(load(c.source.path)).slope_percent;
        break;
      case SourceType::aspect:
        layer.source = slope_aspect(load(c.source.path)).aspect_azimuth;
        break;
      case SourceType::distance: {
        // Proximity rules are expressed in km.
        const Grid d = distance_transform(MaskGrid(load(c.source.path)));
        layer.source = map_cells(d, [](double m) { return m / 1000.0; });
        break;
      }
      case SourceType::kriging: {
        std::ifstream in(paths.resolve(c.source.path));
        if (!in) throw ValidationError("cannot open sample file '" + c.source.path + "'");
        const auto pts = read_sample_points(in);
        const double diag = std::hypot(sc.header.ncols * sc.header.cellsize, sc.header.nrows * sc.header.cellsize);
        const double max_lag = c.source.max_lag.value_or(diag / 2.0);
        const auto ev = empirical_variogram(pts, c.source.bins, max_lag);
        const auto model = fit_variogram(ev, c.source.model);
        if (model.degenerate) sc.warnings.push_back(std::string(to_string(c.id)) + ": samples carry no variance");
        auto kr = krige(pts, model, sc.header);
        for (auto& w : kr.warnings) sc.warnings.push_back(std::string(to_string(c.id)) + ": " + w);
        layer.source = std::move(kr.prediction);
        break;
      }
    }
    sc.layers.push_back(std::move(layer));
  }
  for (const auto& c : cfg.constraints) {
    sc.constraints.push_back({c.name, MaskGrid(load(c.path)), c.buffer_m});
  }
  return sc;
}

inline Scenario load_scenario_file(const std::filesystem::path& path, bool override_cr = false) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const auto cfg = parse_scenario_config(ss.str());
  return load_scenario(cfg, PathResolver(std::filesystem::absolute(path).parent_path()), override_cr);
}

struct RunResult {
  SuitabilityResult result;
  std::vector<SensitivityRow> sensitivity;
  McdaInputs inputs;
  std::vector<std::string> warnings;
};

/// Grades, masks and scores a loaded scenario. Sensitivity rows are computed
/// for every criterion except GHI, in scenario order.
inline RunResult evaluate_scenario(const Scenario& sc, bool with_sensitivity = true) {
  RunResult out;
  auto graded = grade_all(sc.layers);
  out.warnings = sc.warnings;
  out.warnings.insert(out.warnings.end(), graded.warnings.begin(), graded.warnings.end());
  McdaInputs& in = out.inputs;
  for (auto& l : graded.layers) {
    in.ids.push_back(l.id);
    in.grades.push_back(std::move(*l.grade));
  }
  in.weights = sc.weights;
  in.exclusion = constraint_union(sc.constraints, sc.header);
  in.ghi = sc.ghi_source();
  in.energy = sc.config.energy;
  in.breaks = sc.config.breaks;
  out.result = evaluate(in);
  if (with_sensitivity) {
    for (auto id : in.ids) {
      if (id == CriterionId::GHI) continue;
      out.sensitivity.push_back(sensitivity(in, out.result, id));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tables and run artifacts

inline std::string areas_csv(const SuitabilityResult& r) {
  std::ostringstream os;
  os << "class,full_km2,exploit_km2,full_pct,exploit_pct,gp_full_twh,gp_exploit_twh\n";
  for (std::size_t k = 0; k < r.areas.rows.size(); ++k) {
    const auto& a = r.areas.rows[k];
    const auto& e = r.energy[k];
    os << a.cls << ',' << format_number(a.full_km2) << ',' << format_number(a.exploit_km2) << ','
       << format_number(a.full_pct) << ',' << format_number(a.exploit_pct) << ',' << format_number(e.gp_full_twh)
       << ',' << format_number(e.gp_exploit_twh) << '\n';
  }
  return os.str();
}

inline std::string sensitivity_csv(const std::vector<SensitivityRow>& rows, std::size_t n_classes = 4) {
  std::ostringstream os;
  os << "excluded";
  for (std::size_t k = 1; k <= n_classes; ++k) os << ",ds_class" << k;
  os << '\n';
  for (const auto& r : rows) {
    os << to_string(r.excluded);
    for (const auto& d : r.delta_pct) os << ',' << (d ? format_number(*d) : std::string("NA"));
    os << '\n';
  }
  return os.str();
}

inline json sensitivity_json(const std::vector<SensitivityRow>& rows) {
  json j = json::array();
  for (const auto& r : rows) {
    json d = json::array();
    for (const auto& v : r.delta_pct) d.push_back(v ? json(*v) : json(nullptr));
    j.push_back({{"excluded", std::string(to_string(r.excluded))}, {"delta_pct", d}});
  }
  return j;
}

/// Per-class areas, generation potential and capacity density.
inline json result_summary_json(const SuitabilityResult& r) {
  json classes = json::array();
  for (std::size_t k = 0; k < r.areas.rows.size(); ++k) {
    const auto& a = r.areas.rows[k];
    const auto& e = r.energy[k];
    classes.push_back({{"class", a.cls},
                       {"full_km2", a.full_km2},
                       {"exploit_km2", a.exploit_km2},
                       {"full_pct", a.full_pct},
                       {"exploit_pct", a.exploit_pct},
                       {"sr_full", e.sr_full},
                       {"sr_exploit", e.sr_exploit},
                       {"gp_full_twh", e.gp_full_twh},
                       {"gp_exploit_twh", e.gp_exploit_twh}});
  }
  return {{"classes", classes},
          {"scored_km2", r.areas.scored_km2()},
          {"exploitable_km2", r.areas.exploitable_km2()},
          {"capacity_mw_per_km2", r.capacity_mw_per_km2 ? json(*r.capacity_mw_per_km2) : json(nullptr)}};
}

inline std::string sha256_hex(const std::string& data) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), digest);
  std::ostringstream os;
  for (unsigned char b : digest) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(b);
  return os.str();
}

inline std::string config_hash(const ScenarioConfig& cfg) { return sha256_hex(scenario_config_to_json(cfg).dump()); }

inline const std::vector<std::string>& run_artifact_names() {
  static const std::vector<std::string> names = {"score.asc",   "classes.asc",     "classes_exploitable.asc",
                                                 "areas.csv",   "sensitivity.csv", "class_map.png",
                                                 "metadata.json"};
  return names;
}

namespace detail {

inline void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << s;
  if (!out) throw Error("failed writing " + p.string());
}

}  // namespace detail

/// Writes all run artifacts into `out_dir`. Files are staged in a sibling
/// directory and moved into place only when every artifact was produced.
inline void write_run_outputs(const Scenario& sc, const RunResult& rr, const std::filesystem::path& out_dir,
                              double elapsed_s) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path stage = out_dir.parent_path() / (out_dir.filename().string() + ".partial-" + std::to_string(::getpid()));
  fs::remove_all(stage);
  fs::create_directories(stage);
  try {
    const auto& r = rr.result;
    write_grid_file(stage / "score.asc", r.score);
    write_grid_file(stage / "classes.asc", r.classes);
    write_grid_file(stage / "classes_exploitable.asc", r.exploitable_classes);
    detail::write_text(stage / "areas.csv", areas_csv(r));
    detail::write_text(stage / "sensitivity.csv", sensitivity_csv(rr.sensitivity, r.areas.rows.size()));
    detail::write_text(stage / "class_map.png", render_class_map(r.classes));

    json meta;
    meta["tool"] = "solarsite";
    meta["version"] = kToolVersion;
    meta["config_sha256"] = config_hash(sc.config);
    meta["elapsed_seconds"] = elapsed_s;
    meta["grid"] = {{"ncols", sc.header.ncols}, {"nrows", sc.header.nrows}, {"cellsize", sc.header.cellsize}};
    meta["cell_area"] = {{"km2", cell_area_km2(sc.header)},
                         {"model", "uniform square metric cells (cellsize/1000)^2; no per-zone true-area correction"}};
    meta["sr_source"] = r.sr_from_override ? "fixed override " + format_number(*sc.config.energy.sr_override) +
                                                 " kWh/m2/day"
                                           : std::string("per-class mean GHI");
    json w = json::object();
    for (std::size_t i = 0; i < sc.layers.size(); ++i) w[std::string(to_string(sc.layers[i].id))] = sc.weights[i];
    meta["weights"] = w;
    if (sc.consistency) {
      meta["consistency"] = {{"lambda_max", sc.consistency->lambda_max},
                             {"ci", sc.consistency->ci},
                             {"ri", sc.consistency->ri},
                             {"cr", sc.consistency->cr},
                             {"consistent", sc.consistency->consistent}};
    }
    meta["summary"] = result_summary_json(r);
    meta["warnings"] = rr.warnings;
    detail::write_text(stage / "metadata.json", meta.dump(2) + "\n");

    for (const auto& name : run_artifact_names()) fs::rename(stage / name, out_dir / name);
    fs::remove_all(stage);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(stage, ec);
    throw;
  }
}

/// Evaluates a loaded scenario and writes its artifacts to `out_dir`.
inline RunResult run(const Scenario& sc, const std::filesystem::path& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult rr = evaluate_scenario(sc);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_run_outputs(sc, rr, out_dir, elapsed);
  return rr;
}

}  // namespace solarsite

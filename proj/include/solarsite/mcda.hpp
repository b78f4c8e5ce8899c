#pragma once

// Decision core: constraint union, weighted overlay, suitability classes,
// area and energy accounting, leave-one-criterion-out sensitivity.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "solarsite/ahp.hpp"
#include "solarsite/reclass.hpp"
#include "solarsite/spatial.hpp"

namespace solarsite {

struct ConstraintEntry {
  std::string name;
  MaskGrid mask;
  double buffer = 0.0;  // map units; 0 uses the mask as is
};

using ConstraintSet = std::vector<ConstraintEntry>;

/// Cell is 1 iff any (buffered) member mask is 1; 0 when every member is a
/// finite 0; nodata otherwise.
inline MaskGrid constraint_union(const ConstraintSet& cs, const GridHeader& header) {
  validate_header(header);
  std::vector<double> out(header.cell_count(), 0.0);
  for (const auto& entry : cs) {
    const auto diff = misalignment(header, entry.mask.header());
    if (!diff.empty()) throw AlignmentError("constraint '" + entry.name + "' not aligned: " + diff);
    const MaskGrid m = entry.buffer > 0.0 && entry.mask.set_count() > 0 ? buffer_mask(entry.mask, entry.buffer)
                                                                         : entry.mask;
    const Grid& g = m.grid();
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (g[i] == 1.0) {
        out[i] = 1.0;
      } else if (g.is_nodata_at(i) && out[i] != 1.0) {
        out[i] = header.nodata;
      }
    }
  }
  return MaskGrid(Grid(header, std::move(out)));
}

/// score = sum_i w_i * grade_i, nodata where any grade is nodata. The result is
/// clamped to [min grade, max grade] of the cell so rounding never leaves the
/// convex hull.
inline Grid weighted_overlay(std::span<const Grid* const> grades, const ahp::PriorityVector& w) {
  if (grades.size() != w.size()) {
    throw ValidationError("weighted overlay has " + std::to_string(grades.size()) + " layers but " +
                          std::to_string(w.size()) + " weights");
  }
  return zip_cells(grades, [&w](std::span<const double> g) {
    double s = 0.0;
    double lo = g[0], hi = g[0];
    for (std::size_t i = 0; i < g.size(); ++i) {
      s += w[i] * g[i];
      lo = std::min(lo, g[i]);
      hi = std::max(hi, g[i]);
    }
    return std::clamp(s, lo, hi);
  });
}

struct ClassBreaks {
  std::vector<double> edges{1.0, 3.0, 5.0, 7.0, 9.0};

  std::size_t class_count() const noexcept { return edges.size() - 1; }

  void validate() const {
    if (edges.size() < 2) throw ValidationError("class breaks need at least two edges");
    for (std::size_t i = 1; i < edges.size(); ++i) {
      if (!(edges[i] > edges[i - 1])) throw ValidationError("class breaks must be strictly increasing");
    }
    if (edges.front() != 1.0 || edges.back() != 9.0) throw ValidationError("class breaks must span [1, 9]");
  }

  // A score that is exactly on a break in real arithmetic can come out of the
  // weighted sum an ulp below it, and renormalised weights can flip the side.
  // Anything this close to an edge counts as on it.
  static constexpr double kEdgeTolerance = 1e-9;

  /// Class k covers [edges[k-1], edges[k]); the last class includes its top.
  int classify(double score) const {
    if (score < edges.front() || score > edges.back()) {
      throw ValidationError("score " + format_number(score) + " outside [" + format_number(edges.front()) + ", " +
                            format_number(edges.back()) + "]");
    }
    for (std::size_t k = 1; k + 1 < edges.size(); ++k) {
      if (score < edges[k] - kEdgeTolerance) return static_cast<int>(k);
    }
    return static_cast<int>(edges.size() - 1);
  }

  bool operator==(const ClassBreaks&) const = default;
};

inline Grid classify(const Grid& score, const ClassBreaks& breaks = {}) {
  breaks.validate();
  return map_cells(score, [&](double s) { return static_cast<double>(breaks.classify(s)); });
}

struct ClassArea {
  int cls = 0;
  std::size_t full_cells = 0;
  std::size_t exploit_cells = 0;
  double full_km2 = 0.0;
  double exploit_km2 = 0.0;
  double full_pct = 0.0;
  double exploit_pct = 0.0;
};

struct AreaTable {
  double cell_km2 = 0.0;
  std::size_t scored_cells = 0;
  std::size_t exploitable_cells = 0;
  std::vector<ClassArea> rows;

  double scored_km2() const noexcept { return static_cast<double>(scored_cells) * cell_km2; }
  double exploitable_km2() const noexcept { return static_cast<double>(exploitable_cells) * cell_km2; }
};

/// Per-class areas over all scored cells (full) and over cells outside the
/// exclusion mask (exploitable). Percentages are relative to the scored total.
inline AreaTable class_areas(const Grid& classes, const MaskGrid& exclusion, std::size_t n_classes = 4) {
  const auto diff = misalignment(classes.header(), exclusion.header());
  if (!diff.empty()) throw AlignmentError("class grid and exclusion mask not aligned: " + diff);
  AreaTable t;
  t.cell_km2 = cell_area_km2(classes.header());
  t.rows.resize(n_classes);
  for (std::size_t k = 0; k < n_classes; ++k) t.rows[k].cls = static_cast<int>(k + 1);
  const Grid& ex = exclusion.grid();
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const double c = classes[i];
    if (classes.is_nodata(c)) continue;
    const auto k = static_cast<std::size_t>(c) - 1;
    if (c != std::floor(c) || c < 1.0 || k >= n_classes) {
      throw ValidationError("class value " + format_number(c) + " outside 1.." + std::to_string(n_classes));
    }
    ++t.scored_cells;
    ++t.rows[k].full_cells;
    if (ex[i] == 0.0) {
      ++t.exploitable_cells;
      ++t.rows[k].exploit_cells;
    }
  }
  const double total = static_cast<double>(t.scored_cells);
  for (auto& r : t.rows) {
    r.full_km2 = static_cast<double>(r.full_cells) * t.cell_km2;
    r.exploit_km2 = static_cast<double>(r.exploit_cells) * t.cell_km2;
    r.full_pct = total > 0 ? 100.0 * static_cast<double>(r.full_cells) / total : 0.0;
    r.exploit_pct = total > 0 ? 100.0 * static_cast<double>(r.exploit_cells) / total : 0.0;
  }
  return t;
}

/// Annual generation potential in TWh/year:
/// SR [kWh/m^2/day] * CA [km^2 -> m^2] * SF * eta * 365 days.
inline double generation_potential(double sr_kwh_m2_day, double area_km2, double shading_factor, double efficiency) {
  if (sr_kwh_m2_day < 0.0 || area_km2 < 0.0) throw ValidationError("irradiation and area must be non-negative");
  if (!(shading_factor > 0.0 && shading_factor <= 1.0)) throw ValidationError("shading factor must be in (0, 1]");
  if (!(efficiency > 0.0 && efficiency <= 1.0)) throw ValidationError("efficiency must be in (0, 1]");
  const double kwh = sr_kwh_m2_day * area_km2 * 1e6 * shading_factor * efficiency * 365.0;
  return kwh / 1e9;
}

/// Mean power delivered over the daylight hours, per km^2, in MW/km^2.
inline double capacity_density(double gp_twh_year, double area_km2, double daylight_hours) {
  if (!(area_km2 > 0.0)) throw ValidationError("capacity density needs a positive area");
  if (!(daylight_hours > 0.0)) throw ValidationError("daylight hours must be positive");
  const double wh_per_day = gp_twh_year * 1e12 / 365.0;
  return wh_per_day / area_km2 / daylight_hours / 1e6;
}

struct EnergyParams {
  double shading_factor = 0.7;
  double efficiency = 0.16;
  double daylight_hours = 12.0;
  std::optional<double> sr_override;  // kWh/m^2/day; otherwise per-class mean GHI

  bool operator==(const EnergyParams&) const = default;
};

struct ClassEnergy {
  int cls = 0;
  double sr_full = 0.0;
  double sr_exploit = 0.0;
  double gp_full_twh = 0.0;
  double gp_exploit_twh = 0.0;
};

struct SuitabilityResult {
  Grid score;
  Grid classes;
  Grid exploitable_classes;  // classes with constrained cells set to nodata
  AreaTable areas;
  std::vector<ClassEnergy> energy;
  std::optional<double> capacity_mw_per_km2;  // best class, exploitable area
  bool sr_from_override = false;
};

struct McdaInputs {
  std::vector<CriterionId> ids;
  std::vector<Grid> grades;
  ahp::PriorityVector weights;
  MaskGrid exclusion;
  std::optional<Grid> ghi;  // physical GHI in kWh/m^2/day, used for per-class SR
  EnergyParams energy;
  ClassBreaks breaks;
};

namespace detail {

inline SuitabilityResult account(const McdaInputs& in, Grid score) {
  SuitabilityResult res;
  res.classes = classify(score, in.breaks);
  res.score = std::move(score);
  const Grid& ex = in.exclusion.grid();
  {
    std::vector<double> v(res.classes.values().begin(), res.classes.values().end());
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (ex[i] != 0.0) v[i] = res.classes.nodata();
    }
    res.exploitable_classes = Grid(res.classes.header(), std::move(v));
  }
  const std::size_t nk = in.breaks.class_count();
  res.areas = class_areas(res.classes, in.exclusion, nk);

  std::vector<double> sum_full(nk, 0.0), sum_ex(nk, 0.0);
  if (!in.energy.sr_override) {
    if (!in.ghi) throw ValidationError("per-class irradiation needs a GHI grid or a fixed SR override");
    const auto diff = misalignment(in.ghi->header(), res.classes.header());
    if (!diff.empty()) throw AlignmentError("GHI grid not aligned: " + diff);
    for (std::size_t i = 0; i < res.classes.size(); ++i) {
      const double c = res.classes[i];
      if (res.classes.is_nodata(c) || in.ghi->is_nodata_at(i)) continue;
      const auto k = static_cast<std::size_t>(c) - 1;
      sum_full[k] += (*in.ghi)[i];
      if (ex[i] == 0.0) sum_ex[k] += (*in.ghi)[i];
    }
  }
  res.sr_from_override = in.energy.sr_override.has_value();
  for (std::size_t k = 0; k < nk; ++k) {
    const auto& a = res.areas.rows[k];
    ClassEnergy e;
    e.cls = a.cls;
    if (in.energy.sr_override) {
      e.sr_full = e.sr_exploit = *in.energy.sr_override;
    } else {
      e.sr_full = a.full_cells ? sum_full[k] / static_cast<double>(a.full_cells) : 0.0;
      e.sr_exploit = a.exploit_cells ? sum_ex[k] / static_cast<double>(a.exploit_cells) : 0.0;
    }
    e.gp_full_twh = generation_potential(e.sr_full, a.full_km2, in.energy.shading_factor, in.energy.efficiency);
    e.gp_exploit_twh =
        generation_potential(e.sr_exploit, a.exploit_km2, in.energy.shading_factor, in.energy.efficiency);
    res.energy.push_back(e);
  }
  const auto& best = res.areas.rows.back();
  if (best.exploit_km2 > 0.0) {
    res.capacity_mw_per_km2 =
        capacity_density(res.energy.back().gp_exploit_twh, best.exploit_km2, in.energy.daylight_hours);
  }
  return res;
}

inline void check_inputs(const McdaInputs& in) {
  if (in.ids.size() != in.grades.size() || in.ids.size() != in.weights.size()) {
    throw ValidationError("criteria, grades and weights differ in count");
  }
  if (in.grades.empty()) throw ValidationError("no criteria to overlay");
  in.breaks.validate();
  for (const auto& g : in.grades) {
    for (double v : g.values()) {
      if (!g.is_nodata(v) && (v < 1.0 || v > 9.0)) throw ValidationError("grades must lie in 1..9");
    }
  }
}

}  // namespace detail

/// Overlay, classify and account one scenario.
inline SuitabilityResult evaluate(const McdaInputs& in) {
  detail::check_inputs(in);
  std::vector<const Grid*> ptrs;
  for (const auto& g : in.grades) ptrs.push_back(&g);
  return detail::account(in, weighted_overlay(ptrs, in.weights));
}

struct SensitivityRow {
  CriterionId excluded = CriterionId::T;
  std::vector<std::optional<double>> delta_pct;  // per class; nullopt when the baseline class area is 0
};

/// Leave-one-criterion-out: drop `excluded`, rescale the remaining weights by
/// 1/(1 - w_excluded), re-score over the baseline's scored cells and report
/// the change of each full class area, (S_ij - S_j) / S_j * 100.
inline SensitivityRow sensitivity(const McdaInputs& in, const SuitabilityResult& baseline, CriterionId excluded) {
  if (excluded == CriterionId::GHI) {
    throw ValidationError(
        "GHI cannot be excluded: solar irradiation is the resource being sited, so every suitability map depends on "
        "it");
  }
  detail::check_inputs(in);
  const auto pos = std::find(in.ids.begin(), in.ids.end(), excluded);
  if (pos == in.ids.end()) {
    throw ValidationError("criterion " + std::string(to_string(excluded)) + " is not part of the scenario");
  }
  const auto drop = static_cast<std::size_t>(pos - in.ids.begin());
  const double w_drop = in.weights[drop];
  if (!(w_drop < 1.0)) throw ValidationError("cannot exclude the only weighted criterion");

  McdaInputs reduced;
  std::vector<double> w;
  std::vector<const Grid*> ptrs;
  for (std::size_t i = 0; i < in.ids.size(); ++i) {
    if (i == drop) continue;
    reduced.ids.push_back(in.ids[i]);
    w.push_back(in.weights[i] / (1.0 - w_drop));
    ptrs.push_back(&in.grades[i]);
  }
  reduced.weights = ahp::PriorityVector::normalized(std::move(w));
  Grid score = weighted_overlay(ptrs, reduced.weights);
  {
    // Keep the territory fixed: only cells scored in the baseline count.
    std::vector<double> v(score.values().begin(), score.values().end());
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (baseline.score.is_nodata_at(i)) v[i] = score.nodata();
    }
    score = Grid(score.header(), std::move(v));
  }
  const Grid classes = classify(score, in.breaks);
  const AreaTable areas = class_areas(classes, in.exclusion, in.breaks.class_count());

  SensitivityRow row;
  row.excluded = excluded;
  for (std::size_t k = 0; k < areas.rows.size(); ++k) {
    const double base = baseline.areas.rows[k].full_km2;
    if (base > 0.0) {
      row.delta_pct.push_back((areas.rows[k].full_km2 - base) / base * 100.0);
    } else {
      row.delta_pct.push_back(std::nullopt);
    }
  }
  return row;
}

/// Climatology / topography / proximity grouping of the nine solar criteria.
inline std::vector<ahp::CriteriaGroup> solar_criteria_groups() {
  return {{"Climatology", {"GHI", "T", "H"}}, {"Topography", {"DEM", "S", "Az"}}, {"Proximity", {"Gp", "Rp", "Sp"}}};
}

}  // namespace solarsite

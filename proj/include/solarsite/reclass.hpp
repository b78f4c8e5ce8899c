#pragma once

// Reclassification of physical criterion grids onto the 1..9 grade scale.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "solarsite/spatial.hpp"

namespace solarsite {

enum class CriterionId { GHI, T, H, DEM, S, Az, Gp, Rp, Sp };

inline constexpr std::array<CriterionId, 9> kAllCriteria = {
    CriterionId::GHI, CriterionId::T,  CriterionId::H,  CriterionId::DEM, CriterionId::S,
    CriterionId::Az,  CriterionId::Gp, CriterionId::Rp, CriterionId::Sp};

inline std::string_view to_string(CriterionId id) {
  switch (id) {
    case CriterionId::GHI: return "GHI";
    case CriterionId::T: return "T";
    case CriterionId::H: return "H";
    case CriterionId::DEM: return "DEM";
    case CriterionId::S: return "S";
    case CriterionId::Az: return "Az";
    case CriterionId::Gp: return "Gp";
    case CriterionId::Rp: return "Rp";
    case CriterionId::Sp: return "Sp";
  }
  return "?";
}

inline CriterionId criterion_from_string(std::string_view s) {
  for (auto id : kAllCriteria) {
    if (to_string(id) == s) return id;
  }
  throw ValidationError("unknown criterion id '" + std::string(s) + "'");
}

/// Grade n covers (origin + (n-1)*delta, origin + n*delta]; higher is better.
struct AscendingBands {
  double origin = 0.0;
  double delta = 1.0;
  bool operator==(const AscendingBands&) const = default;
};

/// Grade n covers [origin - n*delta, origin - (n-1)*delta); lower is better.
struct DescendingBands {
  double origin = 0.0;
  double delta = 1.0;
  bool operator==(const DescendingBands&) const = default;
};

/// N and S facing (and flat) 9, diagonal facings 5, E and W 1.
struct AzimuthClasses {
  bool operator==(const AzimuthClasses&) const = default;
};

/// Distance <= buffer is excluded; grade n covers (max - n*delta, max - (n-1)*delta],
/// with grade 9 extended down to the buffer and distances beyond max graded 1.
struct ProximityBands {
  double max = 10.0;
  double delta = 1.1;
  double buffer = 0.0;
  bool operator==(const ProximityBands&) const = default;
};

using GradeRule = std::variant<AscendingBands, DescendingBands, AzimuthClasses, ProximityBands>;

inline void validate_rule(const GradeRule& rule) {
  std::visit(
      [](const auto& r) {
        using R = std::decay_t<decltype(r)>;
        if constexpr (!std::is_same_v<R, AzimuthClasses>) {
          if (!(r.delta > 0.0) || !std::isfinite(r.delta)) throw ValidationError("grade rule delta must be positive");
        }
        if constexpr (std::is_same_v<R, ProximityBands>) {
          if (!(r.buffer >= 0.0)) throw ValidationError("proximity buffer must be non-negative");
          if (!(r.max > r.buffer)) throw ValidationError("proximity max must exceed the buffer");
        }
      },
      rule);
}

namespace detail {

// Band edges are computed as origin +/- n*delta, which can land an ulp or two
// away from the decimal the rule author meant (10 - 8*1.1 != 1.2). Values this
// close to an edge count as sitting on it.
inline double edge_slack(double origin, double offset) {
  return 1e-12 * std::max({1.0, std::abs(origin), std::abs(offset)});
}

}  // namespace detail

/// Grade of a single value; std::nullopt means excluded.
inline std::optional<int> grade_value(const GradeRule& rule, double v) {
  return std::visit(
      [v](const auto& r) -> std::optional<int> {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, AscendingBands>) {
          for (int n = 1; n <= 8; ++n) {
            const double edge = r.origin + n * r.delta;
            if (v <= edge + detail::edge_slack(r.origin, n * r.delta)) return n;
          }
          return 9;
        } else if constexpr (std::is_same_v<R, DescendingBands>) {
          for (int n = 1; n <= 8; ++n) {
            const double edge = r.origin - n * r.delta;
            if (v >= edge - detail::edge_slack(r.origin, n * r.delta)) return n;
          }
          return 9;
        } else if constexpr (std::is_same_v<R, AzimuthClasses>) {
          if (v == kFlatAspect) return 9;
          double a = std::fmod(v, 360.0);
          if (a < 0.0) a += 360.0;
          if (a <= 22.5 || a >= 337.5 || (a >= 157.5 && a <= 202.5)) return 9;
          if ((a > 67.5 && a < 112.5) || (a > 247.5 && a < 292.5)) return 1;
          return 5;
        } else {
          if (v <= r.buffer) return std::nullopt;
          if (v > r.max) return 1;
          for (int n = 1; n <= 8; ++n) {
            const double edge = r.max - n * r.delta;
            if (v > edge + detail::edge_slack(r.max, n * r.delta)) return n;
          }
          return 9;
        }
      },
      rule);
}

/// Grade grid (1..9, nodata where excluded or missing).
inline Grid reclassify(const Grid& source, const GradeRule& rule) {
  validate_rule(rule);
  const double nodata = source.nodata();
  return map_cells(source, [&](double v) {
    const auto g = grade_value(rule, v);
    return g ? static_cast<double>(*g) : nodata;
  });
}

/// Rules for the nine solar-siting criteria. Proximity rules are in km.
inline GradeRule default_rule(CriterionId id) {
  switch (id) {
    case CriterionId::GHI: return AscendingBands{2.6, 0.28};
    case CriterionId::T: return DescendingBands{28.8, 1.0};
    case CriterionId::H: return DescendingBands{92.0, 1.0};
    case CriterionId::DEM: return DescendingBands{90.0, 10.0};
    case CriterionId::S: return DescendingBands{9.0, 1.0};
    case CriterionId::Az: return AzimuthClasses{};
    case CriterionId::Gp: return ProximityBands{10.0, 1.1, 0.1};
    case CriterionId::Rp: return ProximityBands{10.0, 1.1, 0.1};
    case CriterionId::Sp: return ProximityBands{10.0, 1.055, 0.5};
  }
  return AzimuthClasses{};
}

struct CriterionLayer {
  CriterionId id = CriterionId::GHI;
  Grid source;
  GradeRule rule;
  std::optional<Grid> grade;
};

struct GradingReport {
  std::vector<CriterionLayer> layers;
  std::vector<std::string> warnings;
};

/// Populates every layer's grade grid, preserving order.
inline GradingReport grade_all(std::vector<CriterionLayer> criteria) {
  GradingReport report;
  std::vector<const Grid*> sources;
  for (const auto& c : criteria) sources.push_back(&c.source);
  if (!sources.empty()) require_aligned(sources);
  for (auto& c : criteria) {
    c.grade = reclassify(c.source, c.rule);
    if (c.source.valid_count() == 0) {
      report.warnings.push_back("criterion " + std::string(to_string(c.id)) + " has no valid cells");
    }
  }
  report.layers = std::move(criteria);
  return report;
}

}  // namespace solarsite

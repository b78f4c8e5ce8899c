#pragma once

// Ordinary kriging of scattered samples onto a grid: empirical variogram,
// least-squares variogram fit and the kriging predictor itself.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "solarsite/raster.hpp"

namespace solarsite {

struct SamplePoint {
  double x = 0.0;
  double y = 0.0;
  double value = 0.0;
};

/// Reads a "x,y,value" CSV (header line required).
inline std::vector<SamplePoint> read_sample_points(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("sample file is empty");
  auto strip = [](std::string s) {
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
    return s;
  };
  if (detail::lowercase(strip(line)) != "x,y,value") {
    throw ValidationError("line 1: sample file header must be 'x,y,value'");
  }
  std::vector<SamplePoint> pts;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = strip(line);
    if (s.empty()) continue;
    double vals[3];
    std::size_t start = 0;
    for (int k = 0; k < 3; ++k) {
      const std::size_t comma = s.find(',', start);
      const bool last = (k == 2);
      if (last != (comma == std::string::npos)) {
        throw ValidationError("line " + std::to_string(lineno) + ": expected 3 comma-separated fields");
      }
      const std::string tok = s.substr(start, last ? std::string::npos : comma - start);
      if (!detail::parse_double(tok, vals[k])) {
        throw ValidationError("line " + std::to_string(lineno) + ": non-numeric field '" + tok + "'");
      }
      start = comma + 1;
    }
    pts.push_back({vals[0], vals[1], vals[2]});
  }
  return pts;
}

inline void write_sample_points(std::ostream& out, const std::vector<SamplePoint>& pts) {
  out << "x,y,value\n";
  for (const auto& p : pts) {
    out << format_number(p.x) << ',' << format_number(p.y) << ',' << format_number(p.value) << '\n';
  }
}

enum class VariogramKind { spherical, exponential };

inline const char* to_string(VariogramKind k) {
  return k == VariogramKind::spherical ? "spherical" : "exponential";
}

inline VariogramKind variogram_kind_from_string(const std::string& s) {
  if (s == "spherical") return VariogramKind::spherical;
  if (s == "exponential") return VariogramKind::exponential;
  throw ValidationError("unknown variogram model '" + s + "'");
}

/// Unit-sill structure function; exponential uses the practical range.
inline double variogram_shape(VariogramKind kind, double h, double range) {
  if (kind == VariogramKind::spherical) {
    if (h >= range) return 1.0;
    const double t = h / range;
    return 1.5 * t - 0.5 * t * t * t;
  }
  return 1.0 - std::exp(-3.0 * h / range);
}

struct VariogramModel {
  VariogramKind kind = VariogramKind::spherical;
  double nugget = 0.0;
  double sill = 1.0;
  double range = 1.0;
  bool degenerate = false;  // fitted to a field with no variance

  double operator()(double h) const {
    if (h <= 0.0) return 0.0;
    return nugget + (sill - nugget) * variogram_shape(kind, h, range);
  }

  void validate() const {
    if (!(nugget >= 0.0) || !(sill >= nugget) || !(range > 0.0) || !std::isfinite(sill) || !std::isfinite(range)) {
      throw ValidationError("variogram requires nugget >= 0, sill >= nugget, range > 0");
    }
    if (!(sill > 0.0)) throw ValidationError("variogram sill must be positive");
  }
};

struct VariogramBin {
  double lag = 0.0;           // mean pair distance (bin centre when empty)
  double semivariance = 0.0;  // mean of (v_i - v_j)^2 / 2
  std::size_t pairs = 0;
  bool empty() const noexcept { return pairs == 0; }
};

struct EmpiricalVariogram {
  double max_lag = 0.0;
  std::vector<VariogramBin> bins;
};

/// Bin b (1-based) holds pairs with distance in ((b-1)*step, b*step].
inline EmpiricalVariogram empirical_variogram(const std::vector<SamplePoint>& pts, std::size_t n_bins, double max_lag) {
  if (pts.size() < 2) throw ValidationError("variogram needs at least 2 sample points");
  if (n_bins < 1) throw ValidationError("variogram needs at least one bin");
  if (!(max_lag > 0.0)) throw ValidationError("variogram max_lag must be positive");
  const double step = max_lag / static_cast<double>(n_bins);
  std::vector<double> dist_sum(n_bins, 0.0), sv_sum(n_bins, 0.0);
  std::vector<std::size_t> counts(n_bins, 0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double d = std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y);
      if (d <= 0.0 || d > max_lag) continue;
      auto b = static_cast<std::size_t>(std::ceil(d / step)) - 1;
      b = std::min(b, n_bins - 1);
      // Guard the upper-inclusive edge against rounding in d / step.
      while (b > 0 && d <= static_cast<double>(b) * step) --b;
      while (b + 1 < n_bins && d > static_cast<double>(b + 1) * step) ++b;
      const double dv = pts[i].value - pts[j].value;
      dist_sum[b] += d;
      sv_sum[b] += 0.5 * dv * dv;
      ++counts[b];
    }
  }
  EmpiricalVariogram ev;
  ev.max_lag = max_lag;
  ev.bins.resize(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    auto& bin = ev.bins[b];
    bin.pairs = counts[b];
    if (counts[b] == 0) {
      bin.lag = (static_cast<double>(b) + 0.5) * step;
    } else {
      bin.lag = dist_sum[b] / static_cast<double>(counts[b]);
      bin.semivariance = sv_sum[b] / static_cast<double>(counts[b]);
    }
  }
  return ev;
}

/// Sill assigned when the data carry no variance at all.
inline constexpr double kSillFloor = 1e-12;

/// Pair-count-weighted squared error of `model` against the non-empty bins.
inline double variogram_fit_error(const EmpiricalVariogram& ev, const VariogramModel& model) {
  double sse = 0.0;
  for (const auto& b : ev.bins) {
    if (b.empty()) continue;
    const double r = model(b.lag) - b.semivariance;
    sse += static_cast<double>(b.pairs) * r * r;
  }
  return sse;
}

namespace detail {

struct ProfileFit {
  double nugget = 0.0;
  double partial_sill = 0.0;
  double sse = std::numeric_limits<double>::infinity();
};

// For a fixed range the model is linear in (nugget, partial sill); solve the
// weighted non-negative least-squares problem over its three candidate faces.
inline ProfileFit fit_for_range(const EmpiricalVariogram& ev, VariogramKind kind, double range) {
  double sw = 0, sf = 0, sff = 0, sy = 0, sfy = 0;
  std::vector<double> f;
  for (const auto& b : ev.bins) {
    if (b.empty()) continue;
    const double w = static_cast<double>(b.pairs);
    const double fb = variogram_shape(kind, b.lag, range);
    sw += w;
    sf += w * fb;
    sff += w * fb * fb;
    sy += w * b.semivariance;
    sfy += w * fb * b.semivariance;
  }
  auto sse = [&](double c0, double c1) {
    double s = 0.0;
    for (const auto& b : ev.bins) {
      if (b.empty()) continue;
      const double r = c0 + c1 * variogram_shape(kind, b.lag, range) - b.semivariance;
      s += static_cast<double>(b.pairs) * r * r;
    }
    return s;
  };
  ProfileFit best;
  auto consider = [&](double c0, double c1) {
    if (c0 < 0.0 || c1 < 0.0 || !std::isfinite(c0) || !std::isfinite(c1)) return;
    const double e = sse(c0, c1);
    if (e < best.sse) best = {c0, c1, e};
  };
  const double det = sw * sff - sf * sf;
  if (std::abs(det) > 1e-14 * sw * sff) {
    consider((sff * sy - sf * sfy) / det, (sw * sfy - sf * sy) / det);
  }
  if (sff > 0.0) consider(0.0, std::max(0.0, sfy / sff));
  consider(std::max(0.0, sy / sw), 0.0);
  return best;
}

}  // namespace detail

/// Fits nugget, sill and range by pair-count-weighted least squares. The range
/// is searched on a coarse grid over (0, 2*max_lag] and refined by step-halving
/// descent; nugget and sill are solved exactly for each trial range.
inline VariogramModel fit_variogram(const EmpiricalVariogram& ev, VariogramKind kind) {
  std::size_t nonempty = 0;
  bool any_variance = false;
  for (const auto& b : ev.bins) {
    if (b.empty()) continue;
    ++nonempty;
    any_variance = any_variance || b.semivariance > 0.0;
  }
  if (nonempty < 3) throw ValidationError("variogram fit needs at least 3 non-empty bins");
  if (!any_variance) {
    return {kind, 0.0, kSillFloor, ev.max_lag, true};
  }

  const double upper = 2.0 * ev.max_lag;
  constexpr int kCoarse = 200;
  double best_range = upper;
  detail::ProfileFit best;
  for (int k = 1; k <= kCoarse; ++k) {
    const double a = upper * k / kCoarse;
    auto fit = detail::fit_for_range(ev, kind, a);
    if (fit.sse < best.sse) {
      best = fit;
      best_range = a;
    }
  }
  double step = upper / kCoarse;
  const double min_step = 1e-12 * upper;
  while (step > min_step) {
    bool moved = false;
    for (double cand : {best_range - step, best_range + step}) {
      if (cand <= 0.0 || cand > upper) continue;
      auto fit = detail::fit_for_range(ev, kind, cand);
      if (fit.sse < best.sse) {
        best = fit;
        best_range = cand;
        moved = true;
      }
    }
    if (!moved) step *= 0.5;
  }
  VariogramModel m{kind, best.nugget, best.nugget + best.partial_sill, best_range, false};
  if (!(m.sill > 0.0)) {
    m.sill = std::max(m.nugget, kSillFloor);
    m.degenerate = true;
  }
  return m;
}

/// Ordinary kriging with a global neighbourhood. The (n+1)x(n+1) system is
/// factorised once (Gaussian elimination, partial pivoting) and reused for
/// every target location.
class OrdinaryKriging {
 public:
  struct Estimate {
    double value = 0.0;
    double variance = 0.0;
  };

  OrdinaryKriging(std::vector<SamplePoint> points, VariogramModel model)
      : points_(std::move(points)), model_(model) {
    if (points_.size() < 2) throw ValidationError("kriging needs at least 2 sample points");
    model_.validate();
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const auto& p = points_[i];
      if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.value)) {
        throw ValidationError("sample " + std::to_string(i) + " is not finite");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (points_[j].x == p.x && points_[j].y == p.y) {
          throw ValidationError("samples " + std::to_string(j) + " and " + std::to_string(i) +
                                " share coordinates (" + format_number(p.x) + ", " + format_number(p.y) +
                                "); kriging system is singular");
        }
      }
    }
    factorise();
  }

  std::size_t size() const noexcept { return points_.size(); }
  const VariogramModel& model() const noexcept { return model_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  /// Kriging weights for the samples, followed by the Lagrange multiplier.
  std::vector<double> solve(double x, double y) const {
    const std::size_t n = points_.size();
    std::vector<double> rhs(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
      rhs[i] = model_(std::hypot(points_[i].x - x, points_[i].y - y)) / model_.sill;
    }
    rhs[n] = 1.0;
    return lu_solve(std::move(rhs));
  }

  Estimate estimate(double x, double y) const {
    const std::size_t n = points_.size();
    std::vector<double> rhs(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
      rhs[i] = model_(std::hypot(points_[i].x - x, points_[i].y - y)) / model_.sill;
    }
    rhs[n] = 1.0;
    const std::vector<double> gamma0 = rhs;
    const auto sol = lu_solve(std::move(rhs));
    Estimate e;
    double var = sol[n];
    for (std::size_t i = 0; i < n; ++i) {
      e.value += sol[i] * points_[i].value;
      var += sol[i] * gamma0[i];
    }
    e.variance = std::max(0.0, var * model_.sill);
    return e;
  }

 private:
  void factorise() {
    const std::size_t n = points_.size();
    const std::size_t m = n + 1;
    lu_.assign(m * m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        lu_[i * m + j] = model_(std::hypot(points_[i].x - points_[j].x, points_[i].y - points_[j].y)) / model_.sill;
      }
      lu_[i * m + n] = 1.0;
      lu_[n * m + i] = 1.0;
    }
    perm_.resize(m);
    for (std::size_t i = 0; i < m; ++i) perm_[i] = i;
    double max_pivot = 0.0, min_pivot = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < m; ++k) {
      std::size_t piv = k;
      for (std::size_t i = k + 1; i < m; ++i) {
        if (std::abs(lu_[i * m + k]) > std::abs(lu_[piv * m + k])) piv = i;
      }
      const double p = lu_[piv * m + k];
      if (p == 0.0) throw ValidationError("kriging system is singular");
      if (piv != k) {
        for (std::size_t j = 0; j < m; ++j) std::swap(lu_[k * m + j], lu_[piv * m + j]);
        std::swap(perm_[k], perm_[piv]);
      }
      max_pivot = std::max(max_pivot, std::abs(p));
      min_pivot = std::min(min_pivot, std::abs(p));
      for (std::size_t i = k + 1; i < m; ++i) {
        const double f = lu_[i * m + k] / p;
        lu_[i * m + k] = f;
        if (f == 0.0) continue;
        for (std::size_t j = k + 1; j < m; ++j) lu_[i * m + j] -= f * lu_[k * m + j];
      }
    }
    if (max_pivot / min_pivot > 1e12) {
      std::ostringstream os;
      os << "kriging system is ill-conditioned (pivot ratio " << max_pivot / min_pivot << ")";
      warnings_.push_back(os.str());
    }
  }

  std::vector<double> lu_solve(std::vector<double> b) const {
    const std::size_t m = perm_.size();
    std::vector<double> x(m);
    for (std::size_t i = 0; i < m; ++i) x[i] = b[perm_[i]];
    for (std::size_t i = 0; i < m; ++i) {
      double s = x[i];
      const double* row = &lu_[i * m];
      for (std::size_t j = 0; j < i; ++j) s -= row[j] * x[j];
      x[i] = s;
    }
    for (std::size_t ii = m; ii-- > 0;) {
      double s = x[ii];
      const double* row = &lu_[ii * m];
      for (std::size_t j = ii + 1; j < m; ++j) s -= row[j] * x[j];
      x[ii] = s / row[ii];
    }
    return x;
  }

  std::vector<SamplePoint> points_;
  VariogramModel model_;
  std::vector<double> lu_;
  std::vector<std::size_t> perm_;
  std::vector<std::string> warnings_;
};

struct KrigingResult {
  Grid prediction;
  Grid variance;
  std::vector<std::string> warnings;
};

/// Predicts at every cell centre of `target`.
inline KrigingResult krige(const std::vector<SamplePoint>& points, const VariogramModel& model,
                           const GridHeader& target) {
  validate_header(target);
  OrdinaryKriging ok(points, model);
  std::vector<double> pred(target.cell_count()), var(target.cell_count());
  const Grid frame = Grid::filled(target, 0.0);
  for (std::size_t r = 0; r < target.nrows; ++r) {
    const double y = frame.cell_y(r);
    for (std::size_t c = 0; c < target.ncols; ++c) {
      const auto e = ok.estimate(frame.cell_x(c), y);
      pred[r * target.ncols + c] = e.value;
      var[r * target.ncols + c] = e.variance;
    }
  }
  return {Grid(target, std::move(pred)), Grid(target, std::move(var)), ok.warnings()};
}

}  // namespace solarsite

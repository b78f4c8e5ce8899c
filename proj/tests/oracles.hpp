#pragma once

// Independent reference implementations used only by the tests. These are
// deliberately naive so they share no code paths with the library.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "solarsite/mcda.hpp"

namespace oracle {

using solarsite::Grid;
using solarsite::GridHeader;

// Brute-force nearest-source distance in cell units, squared.
inline std::vector<std::int64_t> brute_squared_edt(const std::vector<char>& src, std::size_t nr, std::size_t nc) {
  std::vector<std::pair<std::int64_t, std::int64_t>> sources;
  for (std::size_t r = 0; r < nr; ++r)
    for (std::size_t c = 0; c < nc; ++c)
      if (src[r * nc + c]) sources.emplace_back(r, c);
  std::vector<std::int64_t> out(nr * nc, -1);
  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t c = 0; c < nc; ++c) {
      std::int64_t best = std::numeric_limits<std::int64_t>::max();
      for (auto [sr, sc] : sources) {
        const std::int64_t dr = sr - static_cast<std::int64_t>(r), dc = sc - static_cast<std::int64_t>(c);
        best = std::min(best, dr * dr + dc * dc);
      }
      out[r * nc + c] = sources.empty() ? -1 : best;
    }
  }
  return out;
}

struct EigenResult {
  std::vector<double> weights;
  double lambda_max = 0.0;
};

// Principal eigenpair via a dense general eigensolver.
inline EigenResult principal_eigen(const std::vector<std::vector<double>>& a) {
  const auto n = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = a[i][j];
  Eigen::EigenSolver<Eigen::MatrixXd> es(m);
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < n; ++k) {
    if (es.eigenvalues()[k].real() > es.eigenvalues()[best].real()) best = k;
  }
  EigenResult r;
  r.lambda_max = es.eigenvalues()[best].real();
  Eigen::VectorXd v = es.eigenvectors().col(best).real();
  const double s = v.sum();
  for (Eigen::Index i = 0; i < n; ++i) r.weights.push_back(v(i) / s);
  return r;
}

// Random reciprocal matrix with upper-triangle entries drawn from the 1/9..9 scale.
inline std::vector<std::vector<double>> random_reciprocal(std::mt19937_64& rng, std::size_t n) {
  static const std::vector<double> scale = {1.0 / 9, 1.0 / 8, 1.0 / 7, 1.0 / 6, 1.0 / 5, 1.0 / 4, 1.0 / 3, 1.0 / 2,
                                            1,       2,       3,       4,       5,       6,       7,       8, 9};
  std::uniform_int_distribution<std::size_t> pick(0, scale.size() - 1);
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 1.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      a[i][j] = scale[pick(rng)];
      a[j][i] = 1.0 / a[i][j];
    }
  return a;
}

// Matrix a[i][j] = w_i / w_j for weights in [1, 9] (so every entry is on scale).
inline std::vector<std::vector<double>> consistent_matrix(const std::vector<double>& w) {
  const std::size_t n = w.size();
  std::vector<std::vector<double>> a(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i][j] = i == j ? 1.0 : w[i] / w[j];
  return a;
}

inline std::vector<double> normalise(std::vector<double> w) {
  double s = 0.0;
  for (double v : w) s += v;
  for (double& v : w) v /= s;
  return w;
}

// Independent grade evaluation written straight from the band definitions.
inline std::optional<int> grade(const solarsite::GradeRule& rule, double v) {
  using namespace solarsite;
  if (auto* a = std::get_if<AscendingBands>(&rule)) {
    // upper-inclusive: smallest n with v <= origin + n*delta, clamped to 1..9
    int n = 1;
    while (n < 9 && !(v <= a->origin + n * a->delta)) ++n;
    return n;
  }
  if (auto* d = std::get_if<DescendingBands>(&rule)) {
    int n = 1;
    while (n < 9 && !(v >= d->origin - n * d->delta)) ++n;
    return n;
  }
  if (std::holds_alternative<AzimuthClasses>(rule)) {
    if (v == kFlatAspect) return 9;
    const char* dirs[] = {"N", "NE", "E", "SE", "S", "SW", "W", "NW", "N"};
    // 8 sectors of 45 degrees centred on the compass points
    const int sector = static_cast<int>(std::floor((v + 22.5) / 45.0));
    std::string d = dirs[std::clamp(sector, 0, 8)];
    // exact boundaries: N/S sectors are closed, E/W open
    for (double b : {22.5, 157.5, 202.5, 337.5}) {
      if (v == b) return 9;
    }
    for (double b : {67.5, 112.5, 247.5, 292.5}) {
      if (v == b) return 5;
    }
    if (d == "N" || d == "S") return 9;
    if (d == "E" || d == "W") return 1;
    return 5;
  }
  const auto& p = std::get<ProximityBands>(rule);
  if (v <= p.buffer) return std::nullopt;
  if (v > p.max) return 1;
  int n = 1;
  while (n < 9 && !(v > p.max - n * p.delta)) ++n;
  return n;
}

// Recomputes classes and full-area counts from scratch for a weight vector.
inline std::vector<std::size_t> class_counts(const std::vector<Grid>& grades, const std::vector<double>& w,
                                             const std::vector<char>& domain) {
  std::vector<std::size_t> counts(4, 0);
  const std::size_t n = grades[0].size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!domain[i]) continue;
    double s = 0.0, lo = 9.0, hi = 1.0;
    bool missing = false;
    for (std::size_t k = 0; k < grades.size(); ++k) {
      const double g = grades[k][i];
      if (grades[k].is_nodata(g)) {
        missing = true;
        break;
      }
      s += w[k] * g;
      lo = std::min(lo, g);
      hi = std::max(hi, g);
    }
    if (missing) continue;
    // snap to a 1e-9 lattice so exact ties sit on the break, not an ulp below it
    s = std::round(std::clamp(s, lo, hi) * 1e9) / 1e9;
    int cls = s < 3 ? 1 : s < 5 ? 2 : s < 7 ? 3 : 4;
    ++counts[static_cast<std::size_t>(cls - 1)];
  }
  return counts;
}

inline Grid random_grid(std::mt19937_64& rng, std::size_t nr, std::size_t nc, double lo, double hi,
                        double nodata_p = 0.0, double cellsize = 1000.0) {
  GridHeader h{nc, nr, 0.0, 0.0, cellsize, -9999.0};
  std::uniform_real_distribution<double> u(lo, hi), p(0.0, 1.0);
  std::vector<double> v(nr * nc);
  for (double& x : v) x = p(rng) < nodata_p ? h.nodata : u(rng);
  return Grid(h, std::move(v));
}

inline Grid random_grade_grid(std::mt19937_64& rng, std::size_t nr, std::size_t nc, double nodata_p = 0.0) {
  GridHeader h{nc, nr, 0.0, 0.0, 1000.0, -9999.0};
  std::uniform_int_distribution<int> g(1, 9);
  std::uniform_real_distribution<double> p(0.0, 1.0);
  std::vector<double> v(nr * nc);
  for (double& x : v) x = p(rng) < nodata_p ? h.nodata : g(rng);
  return Grid(h, std::move(v));
}

inline solarsite::MaskGrid random_mask(std::mt19937_64& rng, std::size_t nr, std::size_t nc, double p_set) {
  GridHeader h{nc, nr, 0.0, 0.0, 1000.0, -9999.0};
  std::bernoulli_distribution b(p_set);
  std::vector<double> v(nr * nc);
  for (double& x : v) x = b(rng) ? 1.0 : 0.0;
  return solarsite::MaskGrid(Grid(h, std::move(v)));
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("solarsite-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace oracle

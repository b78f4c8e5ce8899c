#pragma once

// Analytic hierarchy process: pairwise judgment matrices, principal-eigenvector
// priorities and Saaty consistency diagnostics.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "solarsite/raster.hpp"

namespace solarsite::ahp {

inline constexpr std::size_t kMinCriteria = 2;
inline constexpr std::size_t kMaxCriteria = 15;
inline constexpr double kReciprocityTolerance = 1e-9;
inline constexpr double kConsistencyThreshold = 0.05;

struct MatrixIssue {
  std::size_t i = 0;
  std::size_t j = 0;
  std::string message;
};

class MatrixValidationError : public ValidationError {
 public:
  explicit MatrixValidationError(std::vector<MatrixIssue> issues)
      : ValidationError(summarise(issues)), issues_(std::move(issues)) {}
  const std::vector<MatrixIssue>& issues() const noexcept { return issues_; }

 private:
  static std::string summarise(const std::vector<MatrixIssue>& issues) {
    std::string s = "invalid pairwise matrix";
    for (const auto& is : issues) {
      s += "; (" + std::to_string(is.i) + "," + std::to_string(is.j) + "): " + is.message;
    }
    return s;
  }
  std::vector<MatrixIssue> issues_;
};

/// Square, positive, reciprocal judgment matrix on the 1/9..9 scale.
class PairwiseMatrix {
 public:
  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

  std::vector<std::vector<double>> rows() const {
    std::vector<std::vector<double>> out(n_, std::vector<double>(n_));
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) out[i][j] = (*this)(i, j);
    return out;
  }

  friend PairwiseMatrix validate_matrix(const std::vector<std::vector<double>>& raw);

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

/// Accepts a matrix iff the diagonal is 1, entries lie in [1/9, 9] and
/// a[j][i] = 1/a[i][j] within 1e-9. Every violation is reported with its cell.
inline PairwiseMatrix validate_matrix(const std::vector<std::vector<double>>& raw) {
  std::vector<MatrixIssue> issues;
  const std::size_t n = raw.size();
  if (n < kMinCriteria || n > kMaxCriteria) {
    issues.push_back({0, 0, "matrix order " + std::to_string(n) + " outside 2.." + std::to_string(kMaxCriteria)});
    throw MatrixValidationError(std::move(issues));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (raw[i].size() != n) {
      issues.push_back({i, 0, "row has " + std::to_string(raw[i].size()) + " entries, expected " + std::to_string(n)});
    }
  }
  if (!issues.empty()) throw MatrixValidationError(std::move(issues));

  constexpr double lo = 1.0 / 9.0 - 1e-9, hi = 9.0 + 1e-9;
  std::vector<std::vector<bool>> bad(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = raw[i][j];
      if (!std::isfinite(v) || v <= 0.0) {
        issues.push_back({i, j, "entry must be a positive number"});
        bad[i][j] = true;
      } else if (i == j) {
        if (std::abs(v - 1.0) > kReciprocityTolerance) {
          issues.push_back({i, j, "diagonal entry must be 1, found " + format_number(v)});
          bad[i][j] = true;
        }
      } else if (v < lo || v > hi) {
        issues.push_back({i, j, "entry " + format_number(v) + " outside the 1-9 comparison scale [1/9, 9]"});
        bad[i][j] = true;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (bad[i][j] || bad[j][i]) continue;
      if (std::abs(raw[j][i] - 1.0 / raw[i][j]) > kReciprocityTolerance) {
        issues.push_back({j, i, "entry " + format_number(raw[j][i]) + " is not the reciprocal of (" +
                                    std::to_string(i) + "," + std::to_string(j) + ") = " + format_number(raw[i][j])});
      }
    }
  }
  if (!issues.empty()) throw MatrixValidationError(std::move(issues));

  PairwiseMatrix m;
  m.n_ = n;
  m.a_.reserve(n * n);
  for (const auto& row : raw) m.a_.insert(m.a_.end(), row.begin(), row.end());
  return m;
}

/// Parses a judgment entry: a plain number or a fraction "a/b".
inline double parse_judgment(const std::string& text) {
  const auto slash = text.find('/');
  double v = 0.0;
  if (slash == std::string::npos) {
    if (!detail::parse_double(text, v)) throw ValidationError("invalid judgment '" + text + "'");
    return v;
  }
  double num = 0.0, den = 0.0;
  if (!detail::parse_double(text.substr(0, slash), num) || !detail::parse_double(text.substr(slash + 1), den) ||
      den == 0.0) {
    throw ValidationError("invalid judgment '" + text + "'");
  }
  return num / den;
}

/// Matrix file: the order n, then n rows of n entries ("1/3" allowed).
inline std::vector<std::vector<double>> read_matrix(std::istream& in) {
  std::string tok;
  if (!(in >> tok)) throw ValidationError("matrix file is empty");
  double nd = 0.0;
  if (!detail::parse_double(tok, nd) || nd < 1 || nd != std::floor(nd)) {
    throw ValidationError("matrix file must start with the matrix order");
  }
  const auto n = static_cast<std::size_t>(nd);
  if (n > kMaxCriteria) throw ValidationError("matrix order " + tok + " exceeds " + std::to_string(kMaxCriteria));
  std::vector<std::vector<double>> a(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!(in >> tok)) throw ValidationError("matrix file has fewer than n*n entries");
      a[i][j] = parse_judgment(tok);
    }
  }
  if (in >> tok) throw ValidationError("matrix file has more than n*n entries");
  return a;
}

/// Non-negative weights summing to 1.
class PriorityVector {
 public:
  PriorityVector() = default;

  explicit PriorityVector(std::vector<double> w) : w_(std::move(w)) {
    double s = 0.0;
    for (double v : w_) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("weights must be non-negative");
      s += v;
    }
    if (w_.empty() || std::abs(s - 1.0) > 1e-9) {
      throw ValidationError("weights must sum to 1 (sum " + format_number(s) + ")");
    }
  }

  /// Scales non-negative weights to sum exactly 1.
  static PriorityVector normalized(std::vector<double> w) {
    double s = 0.0;
    for (double v : w) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("weights must be non-negative");
      s += v;
    }
    if (!(s > 0.0)) throw ValidationError("weights must not all be zero");
    for (double& v : w) v /= s;
    return PriorityVector(std::move(w));
  }

  std::size_t size() const noexcept { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  const std::vector<double>& values() const noexcept { return w_; }

 private:
  std::vector<double> w_;
};

/// Principal right eigenvector by power iteration, normalised to sum 1.
/// Iterates until max_i |(A w)_i - lambda w_i| / lambda < 1e-12.
inline PriorityVector priority_vector(const PairwiseMatrix& m, std::size_t max_iterations = 100000) {
  const std::size_t n = m.size();
  std::vector<double> w(n, 1.0 / static_cast<double>(n)), y(n);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += m(i, j) * w[j];
      y[i] = s;
    }
    double lambda = 0.0;
    for (std::size_t i = 0; i < n; ++i) lambda += y[i] / w[i];
    lambda /= static_cast<double>(n);
    double resid = 0.0;
    for (std::size_t i = 0; i < n; ++i) resid = std::max(resid, std::abs(y[i] - lambda * w[i]));
    double total = 0.0;
    for (double v : y) total += v;
    for (std::size_t i = 0; i < n; ++i) w[i] = y[i] / total;
    if (resid / lambda < 1e-12) return PriorityVector::normalized(std::move(w));
  }
  throw Error("power iteration did not converge");
}

/// Column-normalise then average rows; the classical approximation.
inline PriorityVector column_average_priorities(const PairwiseMatrix& m) {
  const std::size_t n = m.size();
  std::vector<double> col(n, 0.0), w(n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) col[j] += m(i, j);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) w[i] += m(i, j) / col[j];
    w[i] /= static_cast<double>(n);
  }
  return PriorityVector::normalized(std::move(w));
}

/// Saaty random consistency index for n = 1..15.
inline double random_index(std::size_t n) {
  static constexpr std::array<double, 16> kRI = {0.0,  0.0,  0.0,  0.58, 0.90, 1.12, 1.24, 1.32,
                                                 1.41, 1.45, 1.49, 1.51, 1.48, 1.56, 1.57, 1.59};
  if (n >= kRI.size()) throw ValidationError("no random index for order " + std::to_string(n));
  return kRI[n];
}

struct ConsistencyReport {
  double lambda_max = 0.0;
  double ci = 0.0;
  double ri = 0.0;
  double cr = 0.0;
  bool consistent = true;
};

/// lambda_max is the mean of (A w)_i / w_i; CI = (lambda_max - n)/(n - 1);
/// CR = CI/RI for n >= 3 and 0 otherwise.
inline ConsistencyReport consistency(const PairwiseMatrix& m, const PriorityVector& w) {
  const std::size_t n = m.size();
  if (w.size() != n) throw ValidationError("weight vector size does not match the matrix");
  ConsistencyReport r;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += m(i, j) * w[j];
    r.lambda_max += s / w[i];
  }
  r.lambda_max /= static_cast<double>(n);
  const double nd = static_cast<double>(n);
  r.ci = (r.lambda_max - nd) / (nd - 1.0);
  r.ri = random_index(n);
  r.cr = n >= 3 ? r.ci / r.ri : 0.0;
  r.consistent = r.cr <= kConsistencyThreshold;
  return r;
}

struct Evaluation {
  PriorityVector weights;
  ConsistencyReport report;
};

inline Evaluation evaluate(const PairwiseMatrix& m) {
  auto w = priority_vector(m);
  auto r = consistency(m, w);
  return {std::move(w), r};
}

struct CriteriaGroup {
  std::string name;
  std::vector<std::string> members;
};

/// Sum of member weights per group. Groups must partition `factors`.
inline std::vector<std::pair<std::string, double>> aggregate_criteria(const std::vector<std::string>& factors,
                                                                      const PriorityVector& w,
                                                                      const std::vector<CriteriaGroup>& groups) {
  if (factors.size() != w.size()) throw ValidationError("factor list and weight vector differ in length");
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < factors.size(); ++i) index[factors[i]] = i;
  std::set<std::string> seen;
  std::vector<std::pair<std::string, double>> out;
  for (const auto& g : groups) {
    double s = 0.0;
    for (const auto& f : g.members) {
      auto it = index.find(f);
      if (it == index.end()) throw ValidationError("group '" + g.name + "' names unknown factor '" + f + "'");
      if (!seen.insert(f).second) throw ValidationError("factor '" + f + "' appears in more than one group");
      s += w[it->second];
    }
    out.emplace_back(g.name, s);
  }
  for (const auto& f : factors) {
    if (!seen.count(f)) throw ValidationError("factor '" + f + "' is not assigned to any group");
  }
  return out;
}

}  // namespace solarsite::ahp

#pragma once

// Deterministic synthetic province: smooth climate and terrain fields,
// humidity sample points, rasterised settlements / roads / power lines and
// constraint masks calibrated to a target constrained fraction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "solarsite/config.hpp"
#include "solarsite/mcda.hpp"

namespace solarsite {

struct SynthSpec {
  std::uint64_t seed = 42;
  std::size_t rows = 256;
  std::size_t cols = 256;
  double cellsize = 1000.0;  // metres
  double constraint_fraction = 0.6695;
  std::size_t settlements = 14;
  std::size_t roads = 16;
  std::size_t grid_lines = 6;
  std::size_t humidity_points = 130;

  void validate() const {
    if (rows < 8 || cols < 8) throw ValidationError("synthetic grid must be at least 8x8");
    if (!(cellsize > 0)) throw ValidationError("cellsize must be positive");
    if (!(constraint_fraction > 0 && constraint_fraction < 1)) {
      throw ValidationError("constraint fraction must be in (0, 1)");
    }
    if (settlements < 2) throw ValidationError("need at least 2 settlements");
    if (humidity_points < 4) throw ValidationError("need at least 4 humidity points");
  }
};

inline constexpr std::array<const char*, 6> kLandConstraintNames = {"forestry", "peatland", "wildlife",
                                                                    "water",    "rice",     "cultural"};

namespace detail {

class SynthRng {
 public:
  explicit SynthRng(std::uint64_t seed) : eng_(seed) {}
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }

 private:
  std::mt19937_64 eng_;
};

// Multi-octave value noise in roughly [0, 1].
inline std::vector<double> value_noise(SynthRng& rng, std::size_t rows, std::size_t cols, double base_spacing,
                                       int octaves) {
  std::vector<double> out(rows * cols, 0.0);
  double amp = 1.0, spacing = base_spacing, norm = 0.0;
  for (int o = 0; o < octaves; ++o) {
    const auto lr = static_cast<std::size_t>(std::ceil(static_cast<double>(rows) / spacing)) + 2;
    const auto lc = static_cast<std::size_t>(std::ceil(static_cast<double>(cols) / spacing)) + 2;
    std::vector<double> lattice(lr * lc);
    for (double& v : lattice) v = rng.uniform();
    for (std::size_t r = 0; r < rows; ++r) {
      const double fy = static_cast<double>(r) / spacing;
      const auto y0 = static_cast<std::size_t>(fy);
      double ty = fy - static_cast<double>(y0);
      ty = ty * ty * (3 - 2 * ty);
      for (std::size_t c = 0; c < cols; ++c) {
        const double fx = static_cast<double>(c) / spacing;
        const auto x0 = static_cast<std::size_t>(fx);
        double tx = fx - static_cast<double>(x0);
        tx = tx * tx * (3 - 2 * tx);
        const double a = lattice[y0 * lc + x0], b = lattice[y0 * lc + x0 + 1];
        const double cc = lattice[(y0 + 1) * lc + x0], d = lattice[(y0 + 1) * lc + x0 + 1];
        out[r * cols + c] += amp * ((a * (1 - tx) + b * tx) * (1 - ty) + (cc * (1 - tx) + d * tx) * ty);
      }
    }
    norm += amp;
    amp *= 0.5;
    spacing = std::max(2.0, spacing / 2.0);
  }
  for (double& v : out) v /= norm;
  return out;
}

inline std::vector<double> rescale(std::vector<double> v, double lo, double hi) {
  const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  const double a = *mn, b = *mx;
  for (double& x : v) {
    const double t = b > a ? (x - a) / (b - a) : 0.5;
    x = std::clamp(lo + t * (hi - lo), lo, hi);
  }
  return v;
}

struct Cell {
  double r = 0.0;
  double c = 0.0;
};

inline void rasterise_segment(std::vector<double>& mask, std::size_t rows, std::size_t cols, Cell a, Cell b) {
  const double len = std::hypot(b.r - a.r, b.c - a.c);
  const auto steps = static_cast<std::size_t>(std::ceil(len * 4.0)) + 1;
  for (std::size_t s = 0; s <= steps; ++s) {
    const double t = static_cast<double>(s) / static_cast<double>(steps);
    const auto r = static_cast<long long>(std::lround(a.r + t * (b.r - a.r)));
    const auto c = static_cast<long long>(std::lround(a.c + t * (b.c - a.c)));
    if (r < 0 || c < 0 || r >= static_cast<long long>(rows) || c >= static_cast<long long>(cols)) continue;
    mask[static_cast<std::size_t>(r) * cols + static_cast<std::size_t>(c)] = 1.0;
  }
}

// Jittered polyline between two cells.
inline void rasterise_route(std::vector<double>& mask, std::size_t rows, std::size_t cols, SynthRng& rng, Cell a,
                            Cell b) {
  constexpr int kLegs = 5;
  const double len = std::hypot(b.r - a.r, b.c - a.c);
  const double nr = -(b.c - a.c) / std::max(len, 1.0), nc = (b.r - a.r) / std::max(len, 1.0);
  Cell prev = a;
  for (int k = 1; k <= kLegs; ++k) {
    const double t = static_cast<double>(k) / kLegs;
    Cell next{a.r + t * (b.r - a.r), a.c + t * (b.c - a.c)};
    if (k < kLegs) {
      const double off = rng.uniform(-0.12, 0.12) * len;
      next.r += off * nr;
      next.c += off * nc;
    }
    rasterise_segment(mask, rows, cols, prev, next);
    prev = next;
  }
}

}  // namespace detail

struct SynthDataset {
  GridHeader header;
  Grid ghi, temperature, dem, settlements, roads, grid_lines;
  std::vector<SamplePoint> humidity;
  std::vector<std::pair<std::string, Grid>> land_constraints;
  double constraint_fraction = 0.0;  // achieved union fraction
};

/// Constraint entries used by the generated scenarios, in addition to the
/// land-use masks: 500 m around settlements, 100 m around roads.
inline constexpr double kSettlementBufferM = 500.0;
inline constexpr double kRoadBufferM = 100.0;

inline SynthDataset generate_synth(const SynthSpec& spec) {
  spec.validate();
  detail::SynthRng rng(spec.seed);
  const std::size_t R = spec.rows, C = spec.cols;
  SynthDataset ds;
  ds.header = {C, R, 0.0, 0.0, spec.cellsize, -9999.0};
  const double base = std::max<double>(8.0, static_cast<double>(std::max(R, C)) / 4.0);

  // Terrain: mostly lowland with a few uplands.
  auto relief = detail::value_noise(rng, R, C, base, 4);
  relief = detail::rescale(std::move(relief), 0.0, 1.0);
  std::vector<double> dem(R * C);
  for (std::size_t i = 0; i < dem.size(); ++i) dem[i] = 2.0 + 600.0 * relief[i] * relief[i] * relief[i];
  ds.dem = Grid(ds.header, dem);

  // GHI rises towards the south-east, modulated by noise.
  auto ghi_noise = detail::value_noise(rng, R, C, base, 3);
  std::vector<double> ghi(R * C);
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t c = 0; c < C; ++c) {
      const double se = 0.5 * (static_cast<double>(r) / static_cast<double>(R - 1) +
                               static_cast<double>(c) / static_cast<double>(C - 1));
      ghi[r * C + c] = 0.6 * ghi_noise[r * C + c] + 0.4 * se;
    }
  ds.ghi = Grid(ds.header, detail::rescale(std::move(ghi), 2.6, 5.04));

  // Temperature falls with elevation.
  auto t_noise = detail::value_noise(rng, R, C, base, 3);
  std::vector<double> temp(R * C);
  for (std::size_t i = 0; i < temp.size(); ++i) temp[i] = 0.55 * (1.0 - relief[i]) + 0.45 * t_noise[i];
  ds.temperature = Grid(ds.header, detail::rescale(std::move(temp), 17.1, 27.8));

  // Humidity samples from a smooth field, at distinct continuous locations.
  auto h_field = detail::value_noise(rng, R, C, base, 2);
  std::vector<double> hv;
  for (std::size_t k = 0; k < spec.humidity_points; ++k) {
    SamplePoint p;
    p.x = rng.uniform(0.0, static_cast<double>(C) * spec.cellsize);
    p.y = rng.uniform(0.0, static_cast<double>(R) * spec.cellsize);
    const auto col = std::min(C - 1, static_cast<std::size_t>(p.x / spec.cellsize));
    const auto row = std::min(R - 1, R - 1 - std::min(R - 1, static_cast<std::size_t>(p.y / spec.cellsize)));
    hv.push_back(h_field[row * C + col]);
    ds.humidity.push_back(p);
  }
  hv = detail::rescale(std::move(hv), 82.0, 91.5);
  for (std::size_t k = 0; k < hv.size(); ++k) ds.humidity[k].value = hv[k];

  // Settlements away from the border; roads join each to its nearest predecessor.
  std::vector<detail::Cell> towns;
  std::vector<double> settle(R * C, 0.0);
  const double margin = 0.08;
  for (std::size_t k = 0; k < spec.settlements; ++k) {
    detail::Cell t{std::round(rng.uniform(margin, 1 - margin) * static_cast<double>(R - 1)),
                   std::round(rng.uniform(margin, 1 - margin) * static_cast<double>(C - 1))};
    towns.push_back(t);
    settle[static_cast<std::size_t>(t.r) * C + static_cast<std::size_t>(t.c)] = 1.0;
  }
  ds.settlements = Grid(ds.header, settle);

  std::vector<double> roads(R * C, 0.0), lines(R * C, 0.0);
  std::size_t n_roads = 0;
  for (std::size_t k = 1; k < towns.size() && n_roads < spec.roads; ++k, ++n_roads) {
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j) {
      const double d = std::hypot(towns[k].r - towns[j].r, towns[k].c - towns[j].c);
      if (d < bd) {
        bd = d;
        best = j;
      }
    }
    detail::rasterise_route(roads, R, C, rng, towns[best], towns[k]);
  }
  for (; n_roads < spec.roads; ++n_roads) {
    const auto& a = towns[rng.index(towns.size())];
    detail::Cell b{rng.uniform(0, static_cast<double>(R - 1)), rng.uniform(0, static_cast<double>(C - 1))};
    detail::rasterise_route(roads, R, C, rng, a, b);
  }
  ds.roads = Grid(ds.header, roads);
  for (std::size_t k = 0; k < spec.grid_lines; ++k) {
    const auto& a = towns[rng.index(towns.size())];
    const auto& b = towns[rng.index(towns.size())];
    detail::rasterise_route(lines, R, C, rng, a, b);
  }
  if (std::none_of(lines.begin(), lines.end(), [](double v) { return v == 1.0; })) {
    lines[static_cast<std::size_t>(towns[0].r) * C + static_cast<std::size_t>(towns[0].c)] = 1.0;
  }
  ds.grid_lines = Grid(ds.header, lines);

  // Land-use constraint fields; a shared threshold is tuned so the union with
  // the settlement and road buffers hits the target fraction.
  std::vector<std::vector<double>> fields;
  const std::array<double, 6> bias = {0.10, 0.04, 0.02, -0.02, 0.0, -0.08};
  for (std::size_t k = 0; k < kLandConstraintNames.size(); ++k) {
    auto f = detail::rescale(detail::value_noise(rng, R, C, base / 1.5, 3), 0.0, 1.0);
    for (double& v : f) v += bias[k];
    fields.push_back(std::move(f));
  }
  const MaskGrid settle_buf = buffer_mask(MaskGrid(ds.settlements), kSettlementBufferM);
  const MaskGrid road_buf = n_roads && MaskGrid(ds.roads).set_count() ? buffer_mask(MaskGrid(ds.roads), kRoadBufferM)
                                                                      : MaskGrid::empty(ds.header);
  std::vector<char> fixed(R * C, 0);
  for (std::size_t i = 0; i < fixed.size(); ++i) fixed[i] = settle_buf.is_set(i) || road_buf.is_set(i);
  auto union_fraction = [&](double thr) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < fixed.size(); ++i) {
      bool hit = fixed[i];
      for (std::size_t k = 0; k < fields.size() && !hit; ++k) hit = fields[k][i] > thr;
      n += hit;
    }
    return static_cast<double>(n) / static_cast<double>(fixed.size());
  };
  double lo = -0.5, hi = 1.5;  // fraction decreases with threshold
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (union_fraction(mid) > spec.constraint_fraction) lo = mid;
    else hi = mid;
  }
  const double thr = std::abs(union_fraction(lo) - spec.constraint_fraction) <
                             std::abs(union_fraction(hi) - spec.constraint_fraction)
                         ? lo
                         : hi;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    std::vector<double> m(R * C);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = fields[k][i] > thr ? 1.0 : 0.0;
    ds.land_constraints.emplace_back(kLandConstraintNames[k], Grid(ds.header, std::move(m)));
  }
  ds.constraint_fraction = union_fraction(thr);
  return ds;
}

/// Scenario for one of the three weighting approaches over a synthetic dataset
/// directory (paths relative to that directory).
inline ScenarioConfig synth_scenario_config(int approach) {
  ScenarioConfig cfg;
  auto add = [&](CriterionId id, SourceType t, const char* path) {
    CriterionConfig c;
    c.id = id;
    c.source.type = t;
    c.source.path = path;
    c.rule = default_rule(id);
    cfg.criteria.push_back(c);
  };
  add(CriterionId::GHI, SourceType::grid, "ghi.asc");
  add(CriterionId::T, SourceType::grid, "temperature.asc");
  add(CriterionId::H, SourceType::kriging, "humidity_points.csv");
  add(CriterionId::DEM, SourceType::grid, "dem.asc");
  add(CriterionId::S, SourceType::slope, "dem.asc");
  add(CriterionId::Az, SourceType::aspect, "dem.asc");
  add(CriterionId::Gp, SourceType::distance, "grid_lines.asc");
  add(CriterionId::Rp, SourceType::distance, "roads.asc");
  add(CriterionId::Sp, SourceType::distance, "settlements.asc");
  cfg.weights = approach_weights(approach);
  for (const char* name : kLandConstraintNames) {
    cfg.constraints.push_back({name, std::string("constraints/") + name + ".asc", 0.0});
  }
  cfg.constraints.push_back({"settlements-buffer", "settlements.asc", kSettlementBufferM});
  cfg.constraints.push_back({"infrastructure-buffer", "roads.asc", kRoadBufferM});
  return cfg;
}

inline json synth_spec_to_json(const SynthSpec& s) {
  return {{"seed", s.seed},
          {"rows", s.rows},
          {"cols", s.cols},
          {"cellsize", s.cellsize},
          {"constraint_fraction", s.constraint_fraction},
          {"settlements", s.settlements},
          {"roads", s.roads},
          {"grid_lines", s.grid_lines},
          {"humidity_points", s.humidity_points}};
}

/// Writes the dataset and three ready-to-run scenario files into `dir`.
inline SynthDataset synth_dataset(const SynthSpec& spec, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  SynthDataset ds = generate_synth(spec);
  fs::create_directories(dir / "constraints");
  write_grid_file(dir / "ghi.asc", ds.ghi);
  write_grid_file(dir / "temperature.asc", ds.temperature);
  write_grid_file(dir / "dem.asc", ds.dem);
  write_grid_file(dir / "settlements.asc", ds.settlements);
  write_grid_file(dir / "roads.asc", ds.roads);
  write_grid_file(dir / "grid_lines.asc", ds.grid_lines);
  for (const auto& [name, g] : ds.land_constraints) write_grid_file(dir / "constraints" / (name + ".asc"), g);
  {
    std::ofstream out(dir / "humidity_points.csv", std::ios::binary);
    write_sample_points(out, ds.humidity);
  }
  for (int a = 1; a <= 3; ++a) {
    std::ofstream out(dir / ("scenario_approach" + std::to_string(a) + ".json"), std::ios::binary);
    out << scenario_config_to_json(synth_scenario_config(a)).dump(2) << '\n';
  }
  {
    json meta = synth_spec_to_json(spec);
    meta["achieved_constraint_fraction"] = ds.constraint_fraction;
    std::ofstream out(dir / "synth.json", std::ios::binary);
    out << meta.dump(2) << '\n';
  }
  return ds;
}

}  // namespace solarsite

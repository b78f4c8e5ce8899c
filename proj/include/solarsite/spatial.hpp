#pragma once

// Terrain derivatives and proximity fields.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "solarsite/raster.hpp"

namespace solarsite {

/// A grid whose finite cells are exactly 0 or 1.
class MaskGrid {
 public:
  MaskGrid() = default;

  explicit MaskGrid(Grid grid) : grid_(std::move(grid)) {
    for (double v : grid_.values()) {
      if (!grid_.is_nodata(v) && v != 0.0 && v != 1.0) {
        throw ValidationError("mask cells must be 0, 1 or nodata, found " + format_number(v));
      }
    }
  }

  static MaskGrid empty(const GridHeader& header) { return MaskGrid(Grid::filled(header, 0.0)); }

  const Grid& grid() const noexcept { return grid_; }
  const GridHeader& header() const noexcept { return grid_.header(); }
  bool is_set(std::size_t i) const noexcept { return grid_[i] == 1.0; }

  std::size_t set_count() const noexcept {
    std::size_t n = 0;
    for (double v : grid_.values()) n += (v == 1.0);
    return n;
  }

  double set_fraction() const noexcept {
    return static_cast<double>(set_count()) / static_cast<double>(grid_.size());
  }

  bool operator==(const MaskGrid&) const = default;

 private:
  Grid grid_;
};

/// Aspect value for cells with zero gradient.
inline constexpr double kFlatAspect = -1.0;

struct TerrainDerivatives {
  Grid slope_percent;
  Grid aspect_azimuth;  // degrees clockwise from north in [0, 360), or kFlatAspect
};

/// Horn 3x3 slope (percent) and aspect (azimuth of steepest descent).
/// Edge cells and cells with any nodata neighbour get nodata.
inline TerrainDerivatives slope_aspect(const Grid& dem) {
  const GridHeader& h = dem.header();
  const std::size_t nr = h.nrows, nc = h.ncols;
  std::vector<double> slope(dem.size(), h.nodata);
  std::vector<double> aspect(dem.size(), h.nodata);
  const double denom = 8.0 * h.cellsize;

  for (std::size_t r = 1; r + 1 < nr; ++r) {
    for (std::size_t c = 1; c + 1 < nc; ++c) {
      double z[3][3];
      bool ok = true;
      for (int dr = 0; dr < 3 && ok; ++dr) {
        for (int dc = 0; dc < 3; ++dc) {
          z[dr][dc] = dem(r + dr - 1, c + dc - 1);
          if (dem.is_nodata(z[dr][dc])) {
            ok = false;
            break;
          }
        }
      }
      if (!ok) continue;
      // x grows east, y grows north; row 0 of the window is the northern row.
      const double gx = ((z[0][2] + 2.0 * z[1][2] + z[2][2]) - (z[0][0] + 2.0 * z[1][0] + z[2][0])) / denom;
      const double gy = ((z[0][0] + 2.0 * z[0][1] + z[0][2]) - (z[2][0] + 2.0 * z[2][1] + z[2][2])) / denom;
      const std::size_t i = r * nc + c;
      slope[i] = 100.0 * std::hypot(gx, gy);
      if (gx == 0.0 && gy == 0.0) {
        aspect[i] = kFlatAspect;
      } else {
        double az = std::atan2(-gx, -gy) * 180.0 / std::numbers::pi;
        if (az < 0.0) az += 360.0;
        if (az >= 360.0) az -= 360.0;
        aspect[i] = az;
      }
    }
  }
  return {Grid(h, std::move(slope)), Grid(h, std::move(aspect))};
}

namespace detail {

// Exact squared Euclidean distance transform in cell units, separable
// lower-envelope algorithm. Returns -1 for cells with no reachable source
// (only possible when there are no sources at all).
inline std::vector<std::int64_t> squared_edt(const std::vector<char>& source, std::size_t nr, std::size_t nc) {
  constexpr std::int64_t kInf = -1;
  std::vector<std::int64_t> col_d2(nr * nc, kInf);

  // Pass 1: per column, distance to the nearest source in that column.
  for (std::size_t c = 0; c < nc; ++c) {
    std::int64_t last = -1;
    std::vector<std::int64_t> down(nr, -1);
    for (std::size_t r = 0; r < nr; ++r) {
      if (source[r * nc + c]) last = static_cast<std::int64_t>(r);
      down[r] = last;
    }
    last = -1;
    for (std::size_t ri = nr; ri-- > 0;) {
      if (source[ri * nc + c]) last = static_cast<std::int64_t>(ri);
      std::int64_t best = -1;
      const auto r = static_cast<std::int64_t>(ri);
      if (down[ri] >= 0) best = r - down[ri];
      if (last >= 0 && (best < 0 || last - r < best)) best = last - r;
      col_d2[ri * nc + c] = best < 0 ? kInf : best * best;
    }
  }

  // Pass 2: per row, lower envelope of parabolas (c - q)^2 + g(q).
  std::vector<std::int64_t> out(nr * nc, kInf);
  std::vector<std::int64_t> v(nc);
  std::vector<double> z(nc + 1);
  for (std::size_t r = 0; r < nr; ++r) {
    const std::int64_t* g = &col_d2[r * nc];
    std::int64_t k = -1;
    for (std::size_t qi = 0; qi < nc; ++qi) {
      if (g[qi] == kInf) continue;
      const auto q = static_cast<std::int64_t>(qi);
      if (k < 0) {
        k = 0;
        v[0] = q;
        z[0] = -std::numeric_limits<double>::infinity();
        z[1] = std::numeric_limits<double>::infinity();
        continue;
      }
      double s = 0.0;
      while (true) {
        const std::int64_t p = v[static_cast<std::size_t>(k)];
        const std::int64_t num = (g[qi] + q * q) - (g[p] + p * p);
        s = static_cast<double>(num) / static_cast<double>(2 * (q - p));
        if (s <= z[static_cast<std::size_t>(k)]) {
          --k;
          if (k < 0) break;
        } else {
          break;
        }
      }
      ++k;
      v[static_cast<std::size_t>(k)] = q;
      z[static_cast<std::size_t>(k)] = k == 0 ? -std::numeric_limits<double>::infinity() : s;
      z[static_cast<std::size_t>(k) + 1] = std::numeric_limits<double>::infinity();
    }
    if (k < 0) continue;
    std::size_t j = 0;
    for (std::size_t ci = 0; ci < nc; ++ci) {
      const double cd = static_cast<double>(ci);
      while (z[j + 1] < cd) ++j;
      const std::int64_t p = v[j];
      const std::int64_t d = static_cast<std::int64_t>(ci) - p;
      out[r * nc + ci] = d * d + g[p];
    }
  }
  return out;
}

}  // namespace detail

/// Exact Euclidean distance (map units, centre to centre) from every cell to
/// the nearest source cell. Nodata mask cells stay nodata.
inline Grid distance_transform(const MaskGrid& sources) {
  const Grid& m = sources.grid();
  const GridHeader& h = m.header();
  std::vector<char> src(m.size());
  bool any = false;
  for (std::size_t i = 0; i < m.size(); ++i) {
    src[i] = sources.is_set(i);
    any = any || src[i];
  }
  if (!any) throw ValidationError("empty source set");
  const auto d2 = detail::squared_edt(src, h.nrows, h.ncols);
  std::vector<double> out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    out[i] = m.is_nodata_at(i) ? h.nodata : std::sqrt(static_cast<double>(d2[i])) * h.cellsize;
  }
  return Grid(h, std::move(out));
}

/// Cells within `radius` (inclusive) of any source.
inline MaskGrid buffer_mask(const MaskGrid& sources, double radius) {
  if (!(radius >= 0.0)) throw ValidationError("buffer radius must be non-negative");
  const Grid dist = distance_transform(sources);
  return MaskGrid(map_cells(dist, [radius](double d) { return d <= radius ? 1.0 : 0.0; }));
}

}  // namespace solarsite

#pragma once

// Single-band raster model and plain-text (ESRI ASCII) grid I/O.
//
// Row 0 is the northern edge. Values are stored row-major; a cell is either
// finite or exactly the header's nodata sentinel.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "solarsite/error.hpp"

namespace solarsite {

struct GridHeader {
  std::size_t ncols = 1;
  std::size_t nrows = 1;
  double xll = 0.0;
  double yll = 0.0;
  double cellsize = 1.0;
  double nodata = -9999.0;

  std::size_t cell_count() const noexcept { return ncols * nrows; }
  bool operator==(const GridHeader&) const = default;
};

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_number(double v) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw Error("cannot format number");
  return std::string(buf.data(), end);
}

/// Empty string when aligned, otherwise "<field> <a> vs <b>" for the first
/// differing header field.
inline std::string misalignment(const GridHeader& a, const GridHeader& b) {
  auto differ = [](const char* name, auto x, auto y) {
    std::ostringstream os;
    os << name << ' ' << format_number(static_cast<double>(x)) << " vs "
       << format_number(static_cast<double>(y));
    return os.str();
  };
  if (a.ncols != b.ncols) return differ("ncols", a.ncols, b.ncols);
  if (a.nrows != b.nrows) return differ("nrows", a.nrows, b.nrows);
  if (a.xll != b.xll) return differ("xllcorner", a.xll, b.xll);
  if (a.yll != b.yll) return differ("yllcorner", a.yll, b.yll);
  if (a.cellsize != b.cellsize) return differ("cellsize", a.cellsize, b.cellsize);
  if (a.nodata != b.nodata) return differ("NODATA_value", a.nodata, b.nodata);
  return {};
}

inline void validate_header(const GridHeader& h) {
  if (h.ncols < 1 || h.nrows < 1) throw ValidationError("grid must have at least one row and column");
  if (!(h.cellsize > 0.0) || !std::isfinite(h.cellsize)) throw ValidationError("cellsize must be positive");
  if (!std::isfinite(h.xll) || !std::isfinite(h.yll)) throw ValidationError("grid origin must be finite");
  if (!std::isfinite(h.nodata)) throw ValidationError("nodata sentinel must be finite");
}

class Grid {
 public:
  Grid() = default;

  Grid(GridHeader header, std::vector<double> values)
      : header_(header), values_(std::move(values)) {
    validate_header(header_);
    if (values_.size() != header_.cell_count()) {
      throw ValidationError("expected " + std::to_string(header_.cell_count()) + " cells, found " +
                            std::to_string(values_.size()));
    }
    for (double v : values_) {
      if (!std::isfinite(v)) throw ValidationError("grid cell is neither finite nor nodata");
    }
  }

  static Grid filled(const GridHeader& header, double value) {
    return Grid(header, std::vector<double>(header.cell_count(), value));
  }

  const GridHeader& header() const noexcept { return header_; }
  std::size_t ncols() const noexcept { return header_.ncols; }
  std::size_t nrows() const noexcept { return header_.nrows; }
  std::size_t size() const noexcept { return values_.size(); }
  double nodata() const noexcept { return header_.nodata; }

  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double operator()(std::size_t row, std::size_t col) const { return values_[row * header_.ncols + col]; }

  bool is_nodata(double v) const noexcept { return v == header_.nodata; }
  bool is_nodata_at(std::size_t i) const noexcept { return values_[i] == header_.nodata; }

  std::size_t valid_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(values_.begin(), values_.end(), [&](double v) { return v != header_.nodata; }));
  }

  /// Map coordinates of a cell centre.
  double cell_x(std::size_t col) const noexcept {
    return header_.xll + (static_cast<double>(col) + 0.5) * header_.cellsize;
  }
  double cell_y(std::size_t row) const noexcept {
    return header_.yll + (static_cast<double>(header_.nrows - row) - 0.5) * header_.cellsize;
  }

  bool operator==(const Grid&) const = default;

 private:
  GridHeader header_{};
  std::vector<double> values_{0.0};
};

inline bool aligned(const GridHeader& a, const GridHeader& b) noexcept { return a == b; }

inline void require_aligned(std::span<const Grid* const> grids) {
  for (std::size_t k = 1; k < grids.size(); ++k) {
    auto diff = misalignment(grids[0]->header(), grids[k]->header());
    if (!diff.empty()) {
      throw AlignmentError("grids not aligned (grid " + std::to_string(k) + "): " + diff);
    }
  }
}

/// Square metric cells: (cellsize / 1000)^2.
inline double cell_area_km2(const GridHeader& h) noexcept {
  const double side_km = h.cellsize / 1000.0;
  return side_km * side_km;
}

/// Applies `f` to every finite cell; nodata passes through. `f` may return the
/// nodata sentinel to drop a cell explicitly.
template <class F>
Grid map_cells(const Grid& grid, F&& f) {
  std::vector<double> out(grid.size());
  const auto in = grid.values();
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (grid.is_nodata(in[i])) {
      out[i] = grid.nodata();
    } else {
      const double v = f(in[i]);
      if (!std::isfinite(v)) throw Error("cell function returned a non-finite value");
      out[i] = v;
    }
  }
  return Grid(grid.header(), std::move(out));
}

/// Cellwise combination of aligned grids. `f` receives a span holding one
/// value per input grid. A cell is nodata iff any input cell is nodata.
template <class F>
Grid zip_cells(std::span<const Grid* const> grids, F&& f) {
  if (grids.empty()) throw Error("zip_cells needs at least one grid");
  require_aligned(grids);
  const GridHeader& h = grids[0]->header();
  std::vector<double> out(h.cell_count());
  std::vector<double> args(grids.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    bool missing = false;
    for (std::size_t k = 0; k < grids.size(); ++k) {
      args[k] = (*grids[k])[i];
      if (grids[k]->is_nodata(args[k])) {
        missing = true;
        break;
      }
    }
    if (missing) {
      out[i] = h.nodata;
      continue;
    }
    const double v = f(std::span<const double>(args));
    if (!std::isfinite(v)) throw Error("cell function returned a non-finite value");
    out[i] = v;
  }
  return Grid(h, std::move(out));
}

template <class F>
Grid zip_cells(std::initializer_list<const Grid*> grids, F&& f) {
  return zip_cells(std::span<const Grid* const>(grids.begin(), grids.size()), std::forward<F>(f));
}

// ---------------------------------------------------------------------------
// Plain-text grid files

namespace detail {

inline std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline bool parse_double(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc{} && ptr == tok.data() + tok.size() && std::isfinite(out);
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> toks;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) toks.push_back(line.substr(i, j - i));
    i = j;
  }
  return toks;
}

}  // namespace detail

inline Grid read_grid(std::istream& in) {
  static constexpr std::array<std::string_view, 6> kKeys = {"ncols",     "nrows",    "xllcorner",
                                                            "yllcorner", "cellsize", "nodata_value"};
  std::array<double, 6> fields{};
  std::string line;
  std::size_t lineno = 0;
  for (std::size_t k = 0; k < kKeys.size(); ++k) {
    if (!std::getline(in, line)) throw GridFormatError(lineno + 1, "missing header keyword '" + std::string(kKeys[k]) + "'");
    ++lineno;
    auto toks = detail::split_ws(line);
    if (toks.size() != 2) throw GridFormatError(lineno, "expected 'key value' header line");
    if (detail::lowercase(toks[0]) != kKeys[k]) {
      throw GridFormatError(lineno, "expected header keyword '" + std::string(kKeys[k]) + "', found '" +
                                        std::string(toks[0]) + "'");
    }
    if (!detail::parse_double(toks[1], fields[k])) {
      throw GridFormatError(lineno, "non-numeric header value '" + std::string(toks[1]) + "'");
    }
  }
  for (int k : {0, 1}) {
    if (fields[k] < 1 || fields[k] != std::floor(fields[k])) {
      throw GridFormatError(static_cast<std::size_t>(k) + 1, std::string(kKeys[k]) + " must be a positive integer");
    }
  }
  GridHeader h;
  h.ncols = static_cast<std::size_t>(fields[0]);
  h.nrows = static_cast<std::size_t>(fields[1]);
  h.xll = fields[2];
  h.yll = fields[3];
  h.cellsize = fields[4];
  h.nodata = fields[5];
  if (!(h.cellsize > 0.0)) throw GridFormatError(5, "cellsize must be positive");

  std::vector<double> values;
  values.reserve(h.cell_count());
  while (std::getline(in, line)) {
    ++lineno;
    for (auto tok : detail::split_ws(line)) {
      double v = 0.0;
      if (!detail::parse_double(tok, v)) {
        throw GridFormatError(lineno, "non-numeric cell value '" + std::string(tok) + "'");
      }
      values.push_back(v);
    }
  }
  if (values.size() != h.cell_count()) {
    throw GridFormatError(lineno, "expected " + std::to_string(h.cell_count()) + " cells, found " +
                                      std::to_string(values.size()));
  }
  return Grid(h, std::move(values));
}

inline void write_grid(const Grid& grid, std::ostream& out) {
  const GridHeader& h = grid.header();
  out << "ncols " << h.ncols << '\n'
      << "nrows " << h.nrows << '\n'
      << "xllcorner " << format_number(h.xll) << '\n'
      << "yllcorner " << format_number(h.yll) << '\n'
      << "cellsize " << format_number(h.cellsize) << '\n'
      << "nodata_value " << format_number(h.nodata) << '\n';
  const std::string nodata_text = format_number(h.nodata);
  std::string row;
  for (std::size_t r = 0; r < h.nrows; ++r) {
    row.clear();
    for (std::size_t c = 0; c < h.ncols; ++c) {
      if (c) row.push_back(' ');
      const double v = grid(r, c);
      row += grid.is_nodata(v) ? nodata_text : format_number(v);
    }
    row.push_back('\n');
    out << row;
  }
}

inline std::string grid_to_string(const Grid& grid) {
  std::ostringstream os;
  write_grid(grid, os);
  return os.str();
}

inline Grid grid_from_string(const std::string& text) {
  std::istringstream is(text);
  return read_grid(is);
}

inline Grid read_grid_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open grid file " + path.string());
  try {
    return read_grid(in);
  } catch (const GridFormatError& e) {
    throw GridFormatError(e.line(), path.filename().string() + ": " +
                                        std::string(e.what()).substr(std::string(e.what()).find(": ") + 2));
  }
}

inline void write_grid_file(const std::filesystem::path& path, const Grid& grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write grid file " + path.string());
  write_grid(grid, out);
  if (!out) throw Error("failed writing grid file " + path.string());
}

}  // namespace solarsite

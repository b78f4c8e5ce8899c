#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "solarsite/raster.hpp"

using namespace solarsite;

namespace {

const char* kTwoByTwo =
    "ncols 2\n"
    "nrows 2\n"
    "xllcorner 0\n"
    "yllcorner 0\n"
    "cellsize 1\n"
    "NODATA_value -9999\n"
    "1 2\n"
    "3 4\n";

}  // namespace

TEST(GridIo, ParsesSmallGrid) {
  const Grid g = grid_from_string(kTwoByTwo);
  EXPECT_EQ(g.ncols(), 2u);
  EXPECT_EQ(g.nrows(), 2u);
  EXPECT_EQ(std::vector<double>(g.values().begin(), g.values().end()), (std::vector<double>{1, 2, 3, 4}));
  EXPECT_EQ(g(1, 0), 3.0);
}

TEST(GridIo, HeaderKeysAreCaseInsensitive) {
  std::string text = kTwoByTwo;
  text.replace(text.find("ncols"), 5, "NCOLS");
  text.replace(text.find("NODATA_value"), 12, "nodata_VALUE");
  EXPECT_NO_THROW(grid_from_string(text));
}

TEST(GridIo, CountMismatchIsReported) {
  const std::string text =
      "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value -9999\n1 2\n3\n";
  try {
    grid_from_string(text);
    FAIL() << "expected an error";
  } catch (const GridFormatError& e) {
    EXPECT_NE(std::string(e.what()).find("expected 4 cells, found 3"), std::string::npos) << e.what();
  }
}

TEST(GridIo, MalformedHeaderCarriesLineNumber) {
  std::string text = kTwoByTwo;
  text.replace(text.find("yllcorner"), 9, "ycorner");
  try {
    grid_from_string(text);
    FAIL();
  } catch (const GridFormatError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
}

TEST(GridIo, NonNumericTokenCarriesLineNumber) {
  std::string text = kTwoByTwo;
  text.replace(text.find("3 4"), 3, "3 x");
  try {
    grid_from_string(text);
    FAIL();
  } catch (const GridFormatError& e) {
    EXPECT_EQ(e.line(), 8u);
    EXPECT_NE(std::string(e.what()).find("line 8"), std::string::npos);
  }
}

TEST(GridIo, AllNodataWritesSentinel) {
  const Grid g = Grid::filled({3, 2, 0, 0, 1, -9999}, -9999);
  const std::string text = grid_to_string(g);
  std::istringstream in(text);
  std::string line;
  for (int k = 0; k < 6; ++k) std::getline(in, line);
  std::size_t count = 0;
  std::string tok;
  while (in >> tok) {
    EXPECT_EQ(tok, "-9999");
    ++count;
  }
  EXPECT_EQ(count, 6u);
}

TEST(GridIo, SingleValueDataBlock) {
  const Grid g({1, 1, 0, 0, 1, -9999}, {4.58});
  const std::string text = grid_to_string(g);
  EXPECT_EQ(text.substr(text.rfind("\n", text.size() - 2) + 1), "4.58\n");
  EXPECT_NE(text.find("ncols 1\n"), std::string::npos);
  EXPECT_NE(text.find("nodata_value -9999\n"), std::string::npos);
}

TEST(GridIo, RandomRoundTrip) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<std::size_t> dim(1, 16);
    std::uniform_real_distribution<double> coord(-1e6, 1e6);
    const std::size_t nr = dim(rng), nc = dim(rng);
    Grid g = oracle::random_grid(rng, nr, nc, -1e3, 1e3, 0.1, 0.5 + trial);
    GridHeader h = g.header();
    h.xll = coord(rng);
    h.yll = coord(rng);
    g = Grid(h, std::vector<double>(g.values().begin(), g.values().end()));
    const Grid back = grid_from_string(grid_to_string(g));
    ASSERT_EQ(back, g);
    EXPECT_EQ(grid_to_string(back), grid_to_string(g));
  }
}

TEST(Grid, RejectsNonFiniteAndWrongSize) {
  const GridHeader h{2, 1, 0, 0, 1, -9999};
  EXPECT_THROW(Grid(h, {1.0}), ValidationError);
  EXPECT_THROW(Grid(h, {1.0, std::nan("")}), ValidationError);
  EXPECT_THROW(Grid(GridHeader{0, 1, 0, 0, 1, -9999}, {}), ValidationError);
  EXPECT_THROW(Grid(GridHeader{1, 1, 0, 0, 0, -9999}, {1.0}), ValidationError);
}

TEST(CellOps, MapCellsPassesNodataThrough) {
  const Grid g({2, 1, 0, 0, 1, -9999}, {1.0, -9999});
  const Grid out = map_cells(g, [](double v) { return v + 1; });
  EXPECT_EQ(out[0], 2.0);
  EXPECT_EQ(out[1], -9999.0);
  EXPECT_EQ(map_cells(g, [](double v) { return v; }), g);
  const Grid big({1, 1, 0, 0, 1, -9999}, {12.0});
  EXPECT_EQ(map_cells(big, [](double v) { return std::clamp(v, 1.0, 9.0); })[0], 9.0);
}

TEST(CellOps, ZipCellsSumAndNodata) {
  const GridHeader h{2, 1, 0, 0, 1, -9999};
  const Grid a(h, {2.0, 1.0}), b(h, {3.0, -9999});
  const Grid s = zip_cells({&a, &b}, [](std::span<const double> v) { return v[0] + v[1]; });
  EXPECT_EQ(s[0], 5.0);
  EXPECT_TRUE(s.is_nodata_at(1));
}

TEST(CellOps, MisalignmentNamesField) {
  const Grid a({2, 2, 0, 0, 30, -9999}, {1, 2, 3, 4});
  const Grid b({2, 2, 0, 0, 90, -9999}, {1, 2, 3, 4});
  try {
    zip_cells({&a, &b}, [](std::span<const double> v) { return v[0]; });
    FAIL();
  } catch (const AlignmentError& e) {
    EXPECT_NE(std::string(e.what()).find("cellsize 30 vs 90"), std::string::npos) << e.what();
  }
}

TEST(CellOps, ZipNeverInventsOrDropsValues) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const Grid a = oracle::random_grid(rng, 9, 7, 0, 1, 0.3);
    const Grid b = oracle::random_grid(rng, 9, 7, 0, 1, 0.3);
    const Grid out = zip_cells({&a, &b}, [](std::span<const double> v) { return v[0] * v[1]; });
    for (std::size_t i = 0; i < out.size(); ++i) {
      EXPECT_EQ(out.is_nodata_at(i), a.is_nodata_at(i) || b.is_nodata_at(i));
    }
  }
}

TEST(CellOps, AlignmentIsEquivalence) {
  const GridHeader a{3, 3, 0, 0, 10, -9999};
  GridHeader b = a, c = a;
  EXPECT_TRUE(aligned(a, a));
  EXPECT_EQ(aligned(a, b), aligned(b, a));
  EXPECT_TRUE(aligned(a, b) && aligned(b, c) && aligned(a, c));
  c.yll = 5;
  EXPECT_FALSE(aligned(a, c));
  EXPECT_EQ(misalignment(a, c), "yllcorner 0 vs 5");
}

TEST(CellArea, SquareMetricCells) {
  EXPECT_DOUBLE_EQ(cell_area_km2({1, 1, 0, 0, 1000, -9999}), 1.0);
  EXPECT_NEAR(cell_area_km2({1, 1, 0, 0, 30, -9999}), 0.0009, 1e-18);
  EXPECT_DOUBLE_EQ(cell_area_km2({1, 1, 0, 0, 500, -9999}), 0.25);
}

TEST(Grid, CellCentresRowZeroIsNorth) {
  const Grid g = Grid::filled({4, 3, 100, 200, 10, -9999}, 0);
  EXPECT_DOUBLE_EQ(g.cell_x(0), 105);
  EXPECT_DOUBLE_EQ(g.cell_y(0), 225);
  EXPECT_DOUBLE_EQ(g.cell_y(2), 205);
}

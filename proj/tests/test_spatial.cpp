#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "solarsite/spatial.hpp"

using namespace solarsite;

namespace {

// DEM sampled from z = a*x + b*y' + c, where y' grows southward with the row index.
Grid plane(std::size_t nr, std::size_t nc, double cellsize, double a, double b, double c) {
  GridHeader h{nc, nr, 0, 0, cellsize, -9999};
  std::vector<double> v(nr * nc);
  for (std::size_t r = 0; r < nr; ++r)
    for (std::size_t k = 0; k < nc; ++k) v[r * nc + k] = a * (k * cellsize) + b * (r * cellsize) + c;
  return Grid(h, v);
}

MaskGrid single_source(std::size_t nr, std::size_t nc, std::size_t r, std::size_t c, double cellsize = 1) {
  std::vector<double> v(nr * nc, 0.0);
  v[r * nc + c] = 1.0;
  return MaskGrid(Grid({nc, nr, 0, 0, cellsize, -9999}, v));
}

}  // namespace

TEST(Terrain, EastwardRisingPlane) {
  const auto t = slope_aspect(plane(6, 7, 30, 0.05, 0, 10));
  for (std::size_t r = 1; r + 1 < 6; ++r)
    for (std::size_t c = 1; c + 1 < 7; ++c) {
      EXPECT_NEAR(t.slope_percent(r, c), 5.0, 1e-9);
      EXPECT_NEAR(t.aspect_azimuth(r, c), 270.0, 1e-9);
    }
}

TEST(Terrain, SouthwardRisingPlaneFacesNorth) {
  const auto t = slope_aspect(plane(5, 5, 10, 0, 0.02, 0));
  EXPECT_NEAR(t.slope_percent(2, 2), 2.0, 1e-9);
  EXPECT_NEAR(t.aspect_azimuth(2, 2), 0.0, 1e-9);
}

TEST(Terrain, ConstantDemIsFlat) {
  const auto t = slope_aspect(Grid::filled({5, 5, 0, 0, 30, -9999}, 42));
  EXPECT_EQ(t.slope_percent(2, 2), 0.0);
  EXPECT_EQ(t.aspect_azimuth(2, 2), kFlatAspect);
}

TEST(Terrain, EdgesAndNodataNeighboursAreNodata) {
  std::vector<double> v(25, 1.0);
  v[1 * 5 + 1] = -9999;
  const auto t = slope_aspect(Grid({5, 5, 0, 0, 1, -9999}, v));
  EXPECT_TRUE(t.slope_percent.is_nodata_at(0));
  EXPECT_TRUE(t.slope_percent.is_nodata_at(2 * 5 + 2));   // neighbour of the hole
  EXPECT_FALSE(t.slope_percent.is_nodata_at(3 * 5 + 3));  // 3x3 window clear of the hole
  EXPECT_TRUE(t.aspect_azimuth.is_nodata_at(4 * 5 + 4));
}

TEST(Terrain, RandomPlanesMatchClosedForm) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> g(-0.3, 0.3);
  for (int t = 0; t < 20; ++t) {
    const double a = g(rng), b = g(rng);
    const auto d = slope_aspect(plane(8, 9, 25, a, b, 100));
    const double slope = 100 * std::hypot(a, b);
    // downhill direction: (-a) east, (+b) north since y' grows south
    double az = std::atan2(-a, b) * 180 / std::numbers::pi;
    if (az < 0) az += 360;
    for (std::size_t r = 1; r < 7; ++r)
      for (std::size_t c = 1; c < 8; ++c) {
        EXPECT_NEAR(d.slope_percent(r, c), slope, 1e-9 * slope);
        EXPECT_NEAR(d.aspect_azimuth(r, c), az, 1e-9 * az + 1e-12);
      }
  }
}

TEST(Distance, Pythagoras) {
  const Grid d = distance_transform(single_source(6, 6, 0, 0));
  EXPECT_DOUBLE_EQ(d(3, 4), 5.0);
  EXPECT_DOUBLE_EQ(d(0, 0), 0.0);
}

TEST(Distance, AllSources) {
  const Grid d = distance_transform(MaskGrid(Grid::filled({4, 3, 0, 0, 30, -9999}, 1.0)));
  for (double v : d.values()) EXPECT_EQ(v, 0.0);
}

TEST(Distance, EmptySourceSet) {
  try {
    distance_transform(MaskGrid::empty({4, 4, 0, 0, 1, -9999}));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_STREQ(e.what(), "empty source set");
  }
}

TEST(Distance, MatchesBruteForce) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> dim(1, 40);
  for (int t = 0; t < 60; ++t) {
    const std::size_t nr = dim(rng), nc = dim(rng);
    const double p = std::array{0.002, 0.02, 0.2, 0.7}[t % 4];
    auto m = oracle::random_mask(rng, nr, nc, p);
    if (m.set_count() == 0) continue;
    std::vector<char> src(m.grid().size());
    for (std::size_t i = 0; i < src.size(); ++i) src[i] = m.is_set(i);
    ASSERT_EQ(detail::squared_edt(src, nr, nc), oracle::brute_squared_edt(src, nr, nc)) << nr << "x" << nc;
  }
}

TEST(Distance, LipschitzAcrossNeighbours) {
  std::mt19937_64 rng(9);
  const auto m = oracle::random_mask(rng, 30, 30, 0.01);
  const Grid d = distance_transform(m);
  const double cs = d.header().cellsize;
  for (std::size_t r = 0; r + 1 < 30; ++r)
    for (std::size_t c = 0; c + 1 < 30; ++c) {
      EXPECT_LE(std::abs(d(r, c) - d(r + 1, c)), cs * std::sqrt(2.0) + 1e-9);
      EXPECT_LE(std::abs(d(r, c) - d(r, c + 1)), cs * std::sqrt(2.0) + 1e-9);
      EXPECT_LE(std::abs(d(r, c) - d(r + 1, c + 1)), cs * std::sqrt(2.0) + 1e-9);
    }
}

TEST(Distance, NodataMaskCellsStayNodata) {
  std::vector<double> v(9, 0.0);
  v[0] = 1;
  v[8] = -9999;
  const Grid d = distance_transform(MaskGrid(Grid({3, 3, 0, 0, 1, -9999}, v)));
  EXPECT_TRUE(d.is_nodata_at(8));
  EXPECT_DOUBLE_EQ(d[4], std::sqrt(2.0));
}

TEST(Buffer, RadiusZeroIsSources) {
  std::mt19937_64 rng(1);
  const auto m = oracle::random_mask(rng, 12, 12, 0.1);
  EXPECT_EQ(buffer_mask(m, 0).grid(), m.grid());
}

TEST(Buffer, RadiusOneAndHalf) {
  const MaskGrid b = buffer_mask(single_source(5, 5, 2, 2), 1.5);
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 5; ++c) {
      const bool near = std::abs(int(r) - 2) <= 1 && std::abs(int(c) - 2) <= 1;
      EXPECT_EQ(b.is_set(r * 5 + c), near) << r << "," << c;
    }
}

TEST(Buffer, HugeRadiusCoversAll) {
  EXPECT_EQ(buffer_mask(single_source(7, 3, 0, 0, 10), 1e6).set_count(), 21u);
}

TEST(Buffer, MonotoneInRadius) {
  std::mt19937_64 rng(2);
  const auto m = oracle::random_mask(rng, 20, 20, 0.02);
  if (m.set_count() == 0) GTEST_SKIP();
  MaskGrid prev = buffer_mask(m, 0);
  for (double r : {500.0, 1000.0, 1500.0, 3000.0, 7000.0}) {
    const MaskGrid cur = buffer_mask(m, r);
    for (std::size_t i = 0; i < 400; ++i) EXPECT_LE(prev.is_set(i), cur.is_set(i));
    prev = cur;
  }
}

TEST(Mask, RejectsNonBinary) {
  EXPECT_THROW(MaskGrid(Grid({2, 1, 0, 0, 1, -9999}, {0.0, 0.5})), ValidationError);
}

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "solarsite/reclass.hpp"

using namespace solarsite;

TEST(Reclass, GhiBands) {
  const auto r = default_rule(CriterionId::GHI);
  EXPECT_EQ(grade_value(r, 5.0), 9);
  EXPECT_EQ(grade_value(r, 2.6), 1);
  EXPECT_EQ(grade_value(r, 2.0), 1);
  EXPECT_EQ(grade_value(r, 2.88), 1);  // upper edge of band 1
  EXPECT_EQ(grade_value(r, 2.881), 2);
  EXPECT_EQ(grade_value(r, 4.84), 8);
  EXPECT_EQ(grade_value(r, 4.8400001), 9);
  EXPECT_EQ(grade_value(r, 7.0), 9);
}

TEST(Reclass, UpperInclusiveEdges) {
  const AscendingBands r{0.0, 1.0};
  for (int n = 1; n <= 8; ++n) {
    EXPECT_EQ(grade_value(r, n), n);
    EXPECT_EQ(grade_value(r, n + 1e-9), n + 1);
  }
}

TEST(Reclass, Humidity) {
  const auto r = default_rule(CriterionId::H);
  EXPECT_EQ(grade_value(r, 92), 1);
  EXPECT_EQ(grade_value(r, 91.5), 1);
  EXPECT_EQ(grade_value(r, 83), 9);
  EXPECT_EQ(grade_value(r, 84.5), 8);
}

TEST(Reclass, Temperature) {
  const auto r = default_rule(CriterionId::T);
  EXPECT_EQ(grade_value(r, 27.8), 1);
  EXPECT_EQ(grade_value(r, 27.79), 2);
  EXPECT_EQ(grade_value(r, 20.8), 8);
  EXPECT_EQ(grade_value(r, 20.79), 9);
  EXPECT_EQ(grade_value(r, 17.1), 9);
}

TEST(Reclass, Slope) {
  const auto r = default_rule(CriterionId::S);
  EXPECT_EQ(grade_value(r, 0.4), 9);
  EXPECT_EQ(grade_value(r, 8.5), 1);
  EXPECT_EQ(grade_value(r, 40), 1);
}

TEST(Reclass, Proximity) {
  const auto r = default_rule(CriterionId::Gp);
  EXPECT_EQ(grade_value(r, 0.05), std::nullopt);
  EXPECT_EQ(grade_value(r, 0.1), std::nullopt);
  EXPECT_EQ(grade_value(r, 0.5), 9);
  EXPECT_EQ(grade_value(r, 12), 1);
  EXPECT_EQ(grade_value(r, 10), 1);
  EXPECT_EQ(grade_value(r, 8.91), 1);
  EXPECT_EQ(grade_value(r, 8.9), 2);  // lower edge of band 1 is open
  EXPECT_EQ(grade_value(r, 1.2), 9);
  EXPECT_EQ(grade_value(r, 1.21), 8);
}

TEST(Reclass, Aspect) {
  const auto r = default_rule(CriterionId::Az);
  EXPECT_EQ(grade_value(r, 10), 9);
  EXPECT_EQ(grade_value(r, 45), 5);
  EXPECT_EQ(grade_value(r, 90), 1);
  EXPECT_EQ(grade_value(r, 180), 9);
  EXPECT_EQ(grade_value(r, 270), 1);
  EXPECT_EQ(grade_value(r, 350), 9);
  EXPECT_EQ(grade_value(r, kFlatAspect), 9);
}

TEST(Reclass, InvalidRule) {
  const Grid g = Grid::filled({2, 2, 0, 0, 1, -9999}, 1.0);
  EXPECT_THROW(reclassify(g, AscendingBands{0, 0}), ValidationError);
  EXPECT_THROW(reclassify(g, DescendingBands{0, -1}), ValidationError);
  EXPECT_THROW(reclassify(g, ProximityBands{1, 1, 2}), ValidationError);
}

TEST(Reclass, MonotoneByRuleIntent) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-5, 20);
  const AscendingBands asc{2.6, 0.28};
  const DescendingBands desc{9, 1};
  const ProximityBands prox{10, 1.1, 0.1};
  for (int t = 0; t < 5000; ++t) {
    double a = u(rng), b = u(rng);
    if (a < b) std::swap(a, b);
    EXPECT_GE(*grade_value(asc, a), *grade_value(asc, b));
    EXPECT_LE(*grade_value(desc, a), *grade_value(desc, b));
    if (b > prox.buffer) EXPECT_LE(*grade_value(prox, a), *grade_value(prox, b));
  }
}

TEST(Reclass, GradeAllMatchesOracle) {
  std::mt19937_64 rng(13);
  std::vector<CriterionLayer> layers;
  const std::array<std::pair<double, double>, 9> ranges = {
      {{2, 5.5}, {16, 29}, {80, 93}, {0, 120}, {0, 12}, {0, 359.999}, {0, 12}, {0, 12}, {0, 12}}};
  for (std::size_t k = 0; k < kAllCriteria.size(); ++k) {
    CriterionLayer l;
    l.id = kAllCriteria[k];
    l.rule = default_rule(l.id);
    l.source = oracle::random_grid(rng, 15, 12, ranges[k].first, ranges[k].second, 0.05);
    layers.push_back(std::move(l));
  }
  const auto report = grade_all(layers);
  ASSERT_EQ(report.layers.size(), 9u);
  EXPECT_TRUE(report.warnings.empty());
  for (std::size_t k = 0; k < 9; ++k) {
    const auto& l = report.layers[k];
    EXPECT_EQ(l.id, kAllCriteria[k]);
    ASSERT_TRUE(l.grade);
    EXPECT_EQ(l.grade->header(), l.source.header());
    for (std::size_t i = 0; i < l.source.size(); ++i) {
      const double v = l.source[i];
      if (l.source.is_nodata(v)) {
        EXPECT_TRUE(l.grade->is_nodata_at(i));
        continue;
      }
      const auto want = oracle::grade(l.rule, v);
      if (want) {
        EXPECT_EQ((*l.grade)[i], *want) << to_string(l.id) << " v=" << v;
      } else {
        EXPECT_TRUE(l.grade->is_nodata_at(i));
      }
    }
  }
}

TEST(Reclass, AllNodataLayerWarns) {
  CriterionLayer l;
  l.id = CriterionId::T;
  l.rule = default_rule(l.id);
  l.source = Grid::filled({3, 3, 0, 0, 1, -9999}, -9999);
  const auto report = grade_all({l});
  ASSERT_EQ(report.warnings.size(), 1u);
  EXPECT_EQ(report.layers[0].grade->valid_count(), 0u);
}

TEST(Reclass, CriterionNames) {
  for (auto id : kAllCriteria) EXPECT_EQ(criterion_from_string(to_string(id)), id);
  EXPECT_THROW(criterion_from_string("X"), ValidationError);
}

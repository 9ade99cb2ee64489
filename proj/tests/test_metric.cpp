#include <gtest/gtest.h>

#include <random>

#include "dad/metric.hpp"

using namespace dad;

namespace {

MetricSpace circle_sample(std::size_t n) {
  std::vector<std::vector<double>> pts;
  for (std::size_t j = 0; j < n; ++j) pts.push_back({static_cast<double>(j) / static_cast<double>(n)});
  return MetricSpace::from_coords(MetricKind::Torus, pts);
}

MetricSpace grid(std::size_t w, MetricKind kind) {
  std::vector<std::vector<double>> pts;
  for (std::size_t i = 0; i < w; ++i)
    for (std::size_t j = 0; j < w; ++j)
      pts.push_back({static_cast<double>(i) / static_cast<double>(w), static_cast<double>(j) / static_cast<double>(w)});
  return MetricSpace::from_coords(kind, pts);
}

}  // namespace

TEST(Metric, CoordinateDistances) {
  auto s = MetricSpace::from_coords(MetricKind::L2, {{0, 0}, {3, 4}});
  EXPECT_DOUBLE_EQ(s.distance(0, 1), 5.0);
  auto t = MetricSpace::from_coords(MetricKind::Torus, {{0.05, 0.5}, {0.95, 0.1}});
  EXPECT_NEAR(t.distance(0, 1), 0.4, 1e-12);
  EXPECT_TRUE(t.check().ok());
}

TEST(Metric, TableValidation) {
  EXPECT_NO_THROW(MetricSpace::from_table(3, {0, 1, 2, 1, 0, 1, 2, 1, 0}));
  EXPECT_THROW(MetricSpace::from_table(3, {0, 1, 3, 1, 0, 1, 3, 1, 0}), PreconditionError);
  EXPECT_THROW(MetricSpace::from_table(2, {0, 1, 2, 0}), PreconditionError);
  EXPECT_THROW(MetricSpace::from_table(2, {0, 0, 0, 0}), PreconditionError);
}

TEST(Doubling, LineSampleIsTwoDoubling) {
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 100; ++i) pts.push_back({static_cast<double>(i)});
  auto s = MetricSpace::from_coords(MetricKind::L1, pts);
  auto est = doubling_estimate(s, {1, 2, 5, 10});
  EXPECT_EQ(est.M, 2u);
}

TEST(Doubling, GreedyNeverBeatsExact) {
  auto s = grid(8, MetricKind::L2);
  for (double r : {0.125, 0.2}) {
    auto est = doubling_estimate(s, {r}, std::vector<std::size_t>{0, 9, 27});
    std::size_t exact = 0;
    for (std::size_t x : {0u, 9u, 27u}) exact = std::max(exact, min_ball_cover(s, x, 2 * r, r));
    EXPECT_GE(est.M, exact);
  }
}

TEST(Cantor, CircleSample) {
  auto s = circle_sample(400);
  auto M = doubling_estimate(s, {0.025, 0.05}).M;
  auto res = cantor_decompose(s, 0.05, 15, M);
  EXPECT_TRUE(res.check.ok());
  EXPECT_LT(res.check.max_diameter, 0.05);
  EXPECT_GT(res.check.min_separation, 0.75);
  EXPECT_FALSE(res.bound_miss);
}

TEST(Cantor, ExponentValues) {
  EXPECT_EQ(cantor_exponent(15), 7u);
  EXPECT_EQ(cantor_exponent(2), 5u);
  EXPECT_EQ(cantor_exponent(1), 4u);
  EXPECT_EQ(cantor_exponent(5), 5u);
}

TEST(Cantor, TwoDoublingSpaceBound) {
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 200; ++i) pts.push_back({static_cast<double>(i) / 200.0});
  auto s = MetricSpace::from_coords(MetricKind::L1, pts);
  auto res = cantor_decompose(s, 0.05, 2, 2);
  EXPECT_EQ(res.family_bound, BigInt(32));
  EXPECT_LE(res.dec.family_count(), 32u);
}

TEST(Cantor, PropertyRandomCloudsCertified) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < 150; ++i) pts.push_back({u(rng), u(rng)});
    auto s = MetricSpace::from_coords(MetricKind::L2, pts);
    double eps = 0.03 + 0.02 * u(rng);
    auto res = cantor_decompose(s, eps, 3, doubling_estimate(s, {eps / 2, eps}).M);
    EXPECT_TRUE(res.check.ok());
  }
}

TEST(Cantor, ConverseBallMeetsFewSets) {
  auto s = grid(20, MetricKind::Linf);
  double eps = 0.08;
  auto res = cantor_decompose(s, eps, 2, 4);
  EXPECT_LE(max_sets_meeting_ball(s, res.dec, eps), res.dec.family_count());
}

TEST(ValidateDecomposition, MergedCloseSetsNamed) {
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 10; ++i) pts.push_back({static_cast<double>(i)});
  auto s = MetricSpace::from_coords(MetricKind::L1, pts);
  Decomposition d;
  d.eps = 2;
  d.delta = 2;
  d.families = {{{0, 1}, {3, 4}, {8, 9}}, {{2}, {5, 6}}, {{7}}};
  auto chk = validate_decomposition(s, d);
  ASSERT_FALSE(chk.ok());
  EXPECT_NE(chk.violation->find("sets 0,1"), std::string::npos);
}

TEST(ValidateDecomposition, EmptyFamilyIsVacuous) {
  auto s = MetricSpace::from_coords(MetricKind::L1, {{0}, {10}});
  Decomposition d;
  d.eps = 1;
  d.delta = 3;
  d.families = {{{0}, {1}}, {}};
  EXPECT_TRUE(validate_decomposition(s, d).ok());
}

TEST(PathologicalCantor, DepthTwo) {
  auto p = pathological_cantor(2);
  ASSERT_EQ(p.space.size(), 2u);
  EXPECT_NEAR(p.space.distance(0, 1), 1.0 / 8.0, 1e-15);
  EXPECT_TRUE(p.space.check().ok());
}

TEST(PathologicalCantor, RadiusHalfNeedsOneBall) {
  auto p = pathological_cantor(4);
  for (std::size_t x = 0; x < p.space.size(); x += 5) EXPECT_EQ(min_ball_cover(p.space, x, 1.0, 0.5), 1u);
}

// Exact minimal cover sizes of a 1/2^k-ball by 1/2^{k+1}-balls, maximised over
// centers. Frozen from an independent exact-rational search.
TEST(PathologicalCantor, MeasuredCoverNumbers) {
  auto p4 = pathological_cantor(4);
  auto p5 = pathological_cantor(5);
  auto worst = [](const MetricSpace& s, int k) {
    std::size_t m = 0;
    for (std::size_t x = 0; x < s.size(); ++x)
      m = std::max(m, min_ball_cover(s, x, std::ldexp(1.0, -k), std::ldexp(1.0, -k - 1)));
    return m;
  };
  EXPECT_EQ(worst(p4.space, 3), 3u);
  EXPECT_EQ(worst(p5.space, 2), 2u);
  EXPECT_EQ(worst(p5.space, 3), 4u);
  EXPECT_EQ(worst(p5.space, 4), 4u);
  EXPECT_EQ(min_ball_cover(p5.space, 0, 1.0 / 16, 1.0 / 32), 3u);
}

TEST(PathologicalCantor, CapEnforced) {
  EXPECT_THROW(pathological_cantor(8), ResourceCapError);
  EXPECT_THROW(pathological_cantor(1), PreconditionError);
}

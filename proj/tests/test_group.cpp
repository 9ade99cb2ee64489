#include <gtest/gtest.h>

#include <random>

#include "dad/bound.hpp"
#include "dad/brick_cover.hpp"
#include "dad/group.hpp"

using namespace dad;

namespace {

// Oracle: count lattice points with l1 norm <= t by direct enumeration.
std::uint64_t brute_l1_ball(int a, int t) {
  if (a == 0) return 1;
  std::uint64_t total = 0;
  for (int x = -t; x <= t; ++x) total += brute_l1_ball(a - 1, t - std::abs(x));
  return total;
}

}  // namespace

TEST(GroupParse, RoundTripsSpecs) {
  for (std::string s : {"Z", "Z^2", "Z/12", "Z/12 x Z/12", "F_2", "Z^2 ^3", "Z x Z/5"}) {
    auto g = parse_group(s);
    EXPECT_EQ(parse_group(g.spec()), g) << s;
  }
  EXPECT_THROW(parse_group("Q"), Error);
  EXPECT_THROW(parse_group("Z/0"), Error);
}

TEST(GroupElements, FreeGroupReduction) {
  auto f = GroupModel::free_group(2);
  auto a = f.parse_element("a");
  auto A = f.parse_element("A");
  EXPECT_TRUE(f.is_identity(f.multiply(a, A)));
  auto w = f.parse_element("abAB");
  EXPECT_EQ(f.format(w), "abAB");
  EXPECT_EQ(f.format(f.inverse(w)), "baBA");
}

TEST(WordBall, FreeGroupRadiusTwoHasSeventeen) {
  auto f = GroupModel::free_group(2);
  EXPECT_EQ(word_ball(f, 2).elements.size(), 17u);
  EXPECT_EQ(ball_count(f, 2u), Bound(17));
}

TEST(WordLength, CyclicTenElementSeven) {
  auto g = GroupModel::cyclic(10);
  EXPECT_EQ(word_length(g, g.parse_element("7")), 3);
  EXPECT_EQ(g.base_length(g.parse_element("7")), 3u);
}

TEST(WordLength, UnreachableThrows) {
  auto g = GroupModel::free_abelian(2).power(1);
  EXPECT_THROW(word_length(g, Element{3, 4}, 10), Error);
}

TEST(Growth, LatticeProfile) {
  auto p = growth_profile(GroupModel::free_abelian(2), 4);
  std::vector<std::uint64_t> want{1, 5, 13, 25, 41};
  EXPECT_EQ(p.counts, want);
  ASSERT_TRUE(p.fit);
  EXPECT_EQ(p.fit->degree, 2);
}

TEST(Growth, IntegersDegreeOne) {
  auto p = growth_profile(GroupModel::free_abelian(1), 10);
  ASSERT_TRUE(p.fit);
  EXPECT_EQ(p.fit->degree, 1);
  EXPECT_EQ(p.fit->C, 3u);
}

TEST(Growth, FreeGroupHasNoPolynomialFit) {
  auto p = growth_profile(GroupModel::free_group(2), 6);
  EXPECT_FALSE(p.fit);
}

TEST(BallCount, ClosedFormMatchesEnumeration) {
  for (int a = 0; a <= 3; ++a) {
    for (int t = 0; t <= 6; ++t) {
      EXPECT_EQ(ball_count(GroupModel::free_abelian(a), static_cast<std::uint64_t>(t)),
                Bound(brute_l1_ball(a, t)));
    }
  }
  std::vector<GroupModel> models{GroupModel::cyclic(7),
                                 GroupModel::abelian({12, 12}),
                                 GroupModel::abelian({0, 5}),
                                 GroupModel::abelian({0, 0, 3}),
                                 GroupModel::free_group(1),
                                 GroupModel::free_group(3),
                                 GroupModel::free_abelian(2).power(3),
                                 GroupModel::cyclic(20).power(2)};
  for (const auto& g : models) {
    for (int t = 0; t <= 5; ++t) {
      auto want = word_ball(g, t).elements.size();
      EXPECT_EQ(ball_count(g, static_cast<std::uint64_t>(t)), Bound(want)) << g.spec() << " t=" << t;
    }
  }
}

TEST(BallCount, SaturatesForHugeRadius) {
  Bound huge(BigInt(1) << 5000);
  EXPECT_TRUE(huge.is_saturated());
  EXPECT_TRUE(ball_count(GroupModel::free_abelian(2), huge).is_saturated());
  EXPECT_EQ(ball_count(GroupModel::cyclic(9), huge), Bound(9));
}

TEST(BallCount, PropertyMonotoneInRadius) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    int a = static_cast<int>(rng() % 4);
    auto g = GroupModel::free_abelian(a);
    std::uint64_t r = rng() % 1000;
    EXPECT_LE(ball_count(g, r), ball_count(g, r + 1));
  }
}

TEST(GroupElements, PropertyGroupAxiomsOnRandomElements) {
  std::mt19937_64 rng(11);
  std::vector<GroupModel> models{GroupModel::abelian({0, 6}), GroupModel::free_group(2),
                                 GroupModel::abelian({5, 5, 0})};
  for (const auto& g : models) {
    auto ball = word_ball(g, 3);
    for (int k = 0; k < 200; ++k) {
      const auto& x = ball.elements[rng() % ball.elements.size()];
      const auto& y = ball.elements[rng() % ball.elements.size()];
      const auto& z = ball.elements[rng() % ball.elements.size()];
      EXPECT_EQ(g.multiply(g.multiply(x, y), z), g.multiply(x, g.multiply(y, z)));
      EXPECT_TRUE(g.is_identity(g.multiply(x, g.inverse(x))));
      EXPECT_EQ(g.parse_element(g.format(x)), x);
      EXPECT_EQ(g.base_length(x), static_cast<std::uint64_t>(word_length(g, x)));
    }
  }
}

TEST(BrickCover, OneDimensionalLayout) {
  auto c = zd_brick_cover(1, 1);
  EXPECT_EQ(c.side, 4);
  EXPECT_TRUE(c.in_family({1}, 0));
  EXPECT_TRUE(c.in_family({2}, 0));
  EXPECT_FALSE(c.in_family({0}, 0));
  EXPECT_TRUE(c.in_family({3}, 1));
  EXPECT_TRUE(c.in_family({0}, 1));
}

TEST(BrickCover, EveryResidueIsBadForExactlyOneFamily) {
  for (int d = 1; d <= 3; ++d) {
    for (std::int64_t r = 1; r <= 4; ++r) {
      auto c = zd_brick_cover(d, r);
      for (std::int64_t x = -c.side; x < 2 * c.side; ++x) {
        int bad = 0;
        for (int j = 0; j < c.families(); ++j) {
          if (!c.in_family(Element{x}, j)) ++bad;
        }
        EXPECT_EQ(bad, 1);
      }
    }
  }
}

TEST(BrickCover, WindowScanCertifiesPlane) {
  for (std::int64_t r : {1, 2, 3}) {
    auto c = zd_brick_cover(2, r);
    auto chk = scan_brick_window(c, 100);
    EXPECT_TRUE(chk.covered);
    EXPECT_TRUE(chk.within_bound);
    for (auto m : chk.max_component_diameter) EXPECT_LE(m, c.diameter_bound());
  }
}

TEST(BrickCover, WindowScanLine) {
  auto c = zd_brick_cover(1, 5);
  auto chk = scan_brick_window(c, 400);
  EXPECT_TRUE(chk.covered);
  EXPECT_TRUE(chk.within_bound);
}

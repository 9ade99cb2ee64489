#include <gtest/gtest.h>

#include <random>

#include "dad/cover.hpp"
#include "dad/greedy.hpp"
#include "dad/partial_system.hpp"

using namespace dad;

namespace {

// Random restriction of Z^d acting on a torus: always a valid partial system.
PartialSystem random_subsystem(std::mt19937_64& rng, std::vector<Point>* kept = nullptr) {
  int d = 1 + static_cast<int>(rng() % 2);
  std::vector<std::int64_t> moduli;
  std::vector<Element> images;
  for (int i = 0; i < d; ++i) {
    moduli.push_back(3 + static_cast<std::int64_t>(rng() % 6));
  }
  for (int i = 0; i < d; ++i) {
    Element e(static_cast<std::size_t>(d), 0);
    e[static_cast<std::size_t>(i)] = 1 + static_cast<std::int64_t>(rng() % 2);
    images.push_back(e);
  }
  auto t = translation_system(GroupModel::free_abelian(d), moduli, images);
  std::vector<Point> subset;
  for (Point x = 0; x < t.system.size(); ++x)
    if (rng() % 3) subset.push_back(x);
  if (kept) *kept = subset;
  return restrict_system(t.system, subset).system;
}

// Oracle: all-pairs undirected graph distance by Floyd-Warshall.
std::vector<std::vector<std::int64_t>> floyd(const PartialSystem& sys) {
  const auto n = sys.size();
  const std::int64_t inf = 1 << 28;
  std::vector<std::vector<std::int64_t>> d(n, std::vector<std::int64_t>(n, inf));
  for (Point x = 0; x < n; ++x) {
    d[x][x] = 0;
    for (std::size_t s = 1; s < sys.generator_count(); ++s)
      if (auto y = sys.apply(s, x)) d[x][*y] = std::min<std::int64_t>(d[x][*y], 1);
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

}  // namespace

TEST(PartialSystem, CyclicShiftIsValid) {
  auto sys = cyclic_shift_system(12);
  EXPECT_TRUE(check_axioms(sys, 30).ok());
  EXPECT_EQ(*sys.apply(1, 11), 0u);
}

TEST(PartialSystem, RestrictionDomain) {
  auto sys = cyclic_shift_system(12);
  auto plus = *sys.group().generator_index(Element{1});
  auto res = restrict_system(sys, {0, 1, 2, 3, 4, 5});
  for (Point x = 0; x < 6; ++x) EXPECT_EQ(res.system.apply(plus, x).has_value(), x <= 4) << x;
  EXPECT_TRUE(check_axioms(res.system, 20).ok());
}

TEST(PartialSystem, InverseViolationDetected) {
  PartialSystem sys(GroupModel::free_abelian(1), 3);
  sys.set(1, 0, 1);
  auto rep = check_axioms(sys, 2);
  ASSERT_FALSE(rep.ok());
  EXPECT_EQ(rep.violations[0].kind, AxiomViolation::Kind::Inverse);
}

TEST(PartialSystem, CoherenceViolationNeedsHorizonTwo) {
  auto G = GroupModel::free_abelian(2);
  auto a = *G.generator_index(Element{1, 0});
  auto b = *G.generator_index(Element{0, 1});
  PartialSystem sys(G, 5);
  sys.set_pair(a, 0, 1);
  sys.set_pair(b, 1, 2);
  sys.set_pair(b, 0, 3);
  sys.set_pair(a, 3, 4);
  EXPECT_TRUE(check_axioms(sys, 1).ok());
  auto rep = check_axioms(sys, 2);
  ASSERT_FALSE(rep.ok());
  EXPECT_EQ(rep.violations[0].kind, AxiomViolation::Kind::Coherence);
  EXPECT_EQ(rep.violations[0].element, (Element{1, 1}));
  EXPECT_TRUE(validate_axioms(sys, 1).ok());
  EXPECT_EQ(sys.horizon(), 1);
  EXPECT_THROW(s_components(sys, all_points(sys), 2), PreconditionError);
}

TEST(Components, IntermediatesMayLeaveSubset) {
  auto sys = cyclic_shift_system(12);
  auto c1 = s_components(sys, {0, 1, 5, 6}, 1);
  ASSERT_EQ(c1.classes.size(), 2u);
  EXPECT_EQ(c1.classes[0], (std::vector<Point>{0, 1}));
  EXPECT_EQ(c1.classes[1], (std::vector<Point>{5, 6}));
  EXPECT_EQ(s_components(sys, {0, 1, 5, 6}, 4).classes.size(), 1u);
  EXPECT_EQ(s_components(sys, {0, 2}, 2).classes.size(), 1u);
  EXPECT_EQ(s_components(sys, {0, 2}, 1).classes.size(), 2u);
}

TEST(Components, MatchFloydOracleOnRandomSystems) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 60; ++trial) {
    auto sys = random_subsystem(rng);
    sys.set_horizon(kUnboundedHorizon);
    auto dist = floyd(sys);
    std::vector<Point> A;
    for (Point x = 0; x < sys.size(); ++x)
      if (rng() % 2) A.push_back(x);
    for (std::int64_t r : {0, 1, 2, 3, 100}) {
      auto comps = s_components(sys, A, r);
      std::vector<std::size_t> cls(sys.size(), SIZE_MAX);
      for (std::size_t c = 0; c < comps.classes.size(); ++c)
        for (auto p : comps.classes[c]) cls[p] = c;
      // Same class iff connected through a chain in A with steps of length <= r.
      std::vector<std::size_t> label(A.size());
      for (std::size_t i = 0; i < A.size(); ++i) label[i] = i;
      bool changed = true;
      while (changed) {
        changed = false;
        for (std::size_t i = 0; i < A.size(); ++i)
          for (std::size_t j = 0; j < A.size(); ++j)
            if (dist[A[i]][A[j]] <= r && label[i] != label[j]) {
              auto m = std::min(label[i], label[j]);
              label[i] = label[j] = m;
              changed = true;
            }
      }
      for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t j = 0; j < A.size(); ++j)
          EXPECT_EQ(label[i] == label[j], cls[A[i]] == cls[A[j]]);
    }
  }
}

TEST(Components, PropertyRestrictionPreservesValidity) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    auto sys = random_subsystem(rng);
    EXPECT_TRUE(check_axioms(sys, 4).ok());
    std::vector<Point> B;
    for (Point x = 0; x < sys.size(); ++x)
      if (rng() % 2) B.push_back(x);
    auto res = restrict_system(sys, B);
    EXPECT_TRUE(check_axioms(res.system, 4).ok());
  }
}

TEST(Components, PropertyMonotoneInScale) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 60; ++trial) {
    auto sys = random_subsystem(rng);
    sys.set_horizon(kUnboundedHorizon);
    auto A = all_points(sys);
    for (std::int64_t r = 0; r < 5; ++r) {
      auto fine = s_components(sys, A, r);
      auto coarse = s_components(sys, A, r + 1);
      std::vector<std::size_t> cls(sys.size());
      for (std::size_t c = 0; c < coarse.classes.size(); ++c)
        for (auto p : coarse.classes[c]) cls[p] = c;
      for (const auto& c : fine.classes)
        for (auto p : c) EXPECT_EQ(cls[p], cls[c.front()]);
    }
  }
}

TEST(OrbitBall, CyclicBall) {
  auto sys = cyclic_shift_system(12);
  EXPECT_EQ(orbit_ball(sys, 0, 2), (std::vector<Point>{0, 1, 2, 10, 11}));
  EXPECT_EQ(orbit_ball(sys, 0, 6).size(), 12u);
}

TEST(LocalFreeness, CyclicFourStabilizer) {
  auto sys = cyclic_shift_system(4);
  auto w = local_freeness(sys, 4);
  ASSERT_TRUE(w);
  EXPECT_EQ(sys.group().format(w->first), "+4");
  EXPECT_TRUE(sys.group().is_identity(w->second));
  EXPECT_FALSE(local_freeness(sys, 1));
  EXPECT_TRUE(local_freeness(sys, 2));  // +2 and -2 collide
}

TEST(LocalFreeness, CyclicTwelve) {
  auto sys = cyclic_shift_system(12);
  EXPECT_FALSE(local_freeness(sys, 5));
  EXPECT_TRUE(local_freeness(sys, 6));
}

TEST(CayleyChart, TorusChartIsEquivariant) {
  auto t = translation_system(GroupModel::free_abelian(2), {20, 20}, {Element{1, 0}, Element{0, 1}});
  auto chart = cayley_chart(t.system, 0, 3);
  EXPECT_EQ(chart.elements.size(), 25u);
  EXPECT_EQ(chart.at(t.id({2, 19})), (Element{2, -1}));
  EXPECT_THROW(cayley_chart(cyclic_shift_system(4), 0, 3), PreconditionError);
}

TEST(CayleyChart, BfsChartCountsWrapConflicts) {
  auto chart = bfs_chart(cyclic_shift_system(10), 0);
  EXPECT_EQ(chart.elements.size(), 10u);
  EXPECT_EQ(chart.conflicts, 1u);
}

TEST(SystemGrowth, DominatedByGroup) {
  auto g = system_growth(cyclic_shift_system(100), 8);
  EXPECT_TRUE(g.dominated);
  EXPECT_EQ(g.profile.counts[3], 7u);
  ASSERT_TRUE(g.profile.fit);
  EXPECT_EQ(g.profile.fit->degree, 1);
}

TEST(CheckCover, DetectsUncoveredAndOversized) {
  auto sys = cyclic_shift_system(12);
  Cover c;
  c.ground = all_points(sys);
  c.families = {{{0, 1, 2, 3, 4, 5}}, {{6, 7, 8, 9, 10}}};
  auto chk = check_cover(sys, c, 1, Bound(6));
  ASSERT_FALSE(chk.ok());
  EXPECT_EQ(chk.violation->kind, CoverViolation::Kind::Uncovered);
  EXPECT_EQ(chk.violation->point, 11u);
  c.families[1][0].push_back(11);
  EXPECT_TRUE(check_cover(sys, c, 1, Bound(6)).ok());
  auto over = check_cover(sys, c, 1, Bound(5));
  ASSERT_FALSE(over.ok());
  EXPECT_EQ(over.violation->kind, CoverViolation::Kind::Oversized);
  EXPECT_EQ(over.violation->family, 0u);
}

TEST(GreedyColor, EmptyRelationOneClass) {
  auto c = greedy_color(Relation::from_pairs(5, {}), 0);
  ASSERT_EQ(c.classes.size(), 1u);
  EXPECT_EQ(c.classes[0].size(), 5u);
}

TEST(GreedyColor, FiveCycle) {
  std::vector<std::pair<std::size_t, std::size_t>> p{{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}};
  auto c = greedy_color(Relation::from_pairs(5, p), 2);
  EXPECT_EQ(c.color, (std::vector<std::size_t>{0, 1, 0, 1, 2}));
  EXPECT_THROW(greedy_color(Relation::from_pairs(5, p), 1), DegreeError);
}

TEST(GreedyColor, PropertyClassesAreIndependent) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = 1 + rng() % 30;
    std::vector<std::pair<std::size_t, std::size_t>> p;
    for (std::size_t k = 0; k < n * 2; ++k) p.emplace_back(rng() % n, rng() % n);
    auto rel = Relation::from_pairs(n, p);
    auto D = rel.max_degree();
    auto c = greedy_color(rel, D);
    EXPECT_EQ(c.classes.size(), D + 1);
    for (std::size_t i = 0; i < n; ++i)
      for (auto j : rel.adj[i]) EXPECT_NE(c.color[i], c.color[j]);
  }
}

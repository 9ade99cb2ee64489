#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <random>
#include <sstream>

#include "dad/cli.hpp"

using namespace dad;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int st = run_command(args, out, err);
  return {st, out.str(), err.str()};
}

fs::path scratch() {
  static fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("dad_io_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string put(const std::string& name, const std::string& text) {
  auto p = (scratch() / name).string();
  write_file(p, text);
  return p;
}

GroupModel random_group(std::mt19937_64& rng) {
  switch (rng() % 6) {
    case 0: return GroupModel::free_abelian(1);
    case 1: return GroupModel::free_abelian(2);
    case 2: return GroupModel::cyclic(2 + static_cast<std::int64_t>(rng() % 9));
    case 3: return GroupModel::free_group(2);
    case 4: return parse_group("Z/3 x Z/4");
    default: return GroupModel::free_abelian(1 + static_cast<int>(rng() % 2)).power(2 + static_cast<int>(rng() % 2));
  }
}

// Random partial bijections entered in inverse pairs.
PartialSystem random_system(std::mt19937_64& rng) {
  auto G = random_group(rng);
  std::size_t n = 1 + rng() % 12;
  PartialSystem sys(G, n);
  for (std::size_t s = 1; s < G.generators().size(); ++s) {
    auto inv = G.inverse_generator(s);
    if (inv < s) continue;
    std::vector<Point> img(n);
    std::iota(img.begin(), img.end(), 0);
    std::shuffle(img.begin(), img.end(), rng);
    for (Point x = 0; x < n; ++x) {
      if (rng() % 3 == 0) continue;
      // An order-two generator pairs x with img[x] only when both are free.
      if (inv == s && (sys.apply(s, x) || sys.apply(s, img[x]))) continue;
      sys.set_pair(s, x, img[x]);
    }
  }
  auto h = rng() % 4;
  sys.set_horizon(h == 0 ? kUnboundedHorizon : static_cast<std::int64_t>(h));
  return sys;
}

}  // namespace

TEST(SystemFormat, CyclicTenRoundTrip) {
  auto sys = cyclic_shift_system(10);
  auto text = serialize_system(sys);
  EXPECT_NE(text.find("gen +1 9 0"), std::string::npos);
  auto back = parse_system(text);
  EXPECT_TRUE(same_system(sys, back));
  EXPECT_EQ(serialize_system(back), text);
}

TEST(SystemFormat, DuplicateEntryLine) {
  std::string text = "points 5\ngroup Z\nhorizon 2\ngen +1 3 3\ngen +1 3 4\n";
  try {
    parse_system(text);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 5u);
    EXPECT_NE(std::string(e.what()).find("duplicate"), std::string::npos);
  }
}

TEST(SystemFormat, NonSymmetricRejected) {
  std::string text = "points 3\ngroup Z\nhorizon 1\n# shift\ngen +1 0 1\n";
  try {
    parse_system(text);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 5u);
    EXPECT_NE(std::string(e.what()).find("not symmetric"), std::string::npos);
  }
}

TEST(SystemFormat, ErrorsCarryLineNumbers) {
  EXPECT_THROW(parse_system("points 3\ngroup Q\n"), ParseError);
  EXPECT_THROW(parse_system("points 3\ngroup Z\ngen +2 0 1\n"), ParseError);
  EXPECT_THROW(parse_system("points 3\ngroup Z\ngen +1 0 7\n"), ParseError);
  EXPECT_THROW(parse_system("group Z\n"), ParseError);
  EXPECT_THROW(parse_system("points 3\ngroup Z\nwat\n"), ParseError);
  try {
    parse_system("points 2\n\ngroup Z\nhorizon x\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
}

TEST(SystemFormat, PropertyRandomRoundTrip) {
  std::mt19937_64 rng(500);
  for (int seed = 0; seed < 500; ++seed) {
    auto sys = random_system(rng);
    auto text = serialize_system(sys);
    auto back = parse_system(text);
    ASSERT_TRUE(same_system(sys, back)) << text;
    ASSERT_EQ(serialize_system(back), text);
  }
}

TEST(CoverFormat, RoundTripWithMetadata) {
  Cover c;
  c.ground = {0, 1, 2, 3, 5};
  c.families = {{{0, 1}, {5}}, {}, {{2, 3}}};
  auto text = serialize_cover(c, 2, Bound(7));
  auto back = parse_cover(text);
  EXPECT_EQ(back.cover.ground, c.ground);
  EXPECT_EQ(back.cover.families, c.families);
  EXPECT_EQ(*back.scale, 2);
  EXPECT_EQ(*back.bound, Bound(7));
  EXPECT_EQ(serialize_cover(back.cover, 2, Bound(7)), text);
  EXPECT_EQ(*parse_cover(serialize_cover(c, 1, Bound::saturated())).bound, Bound::saturated());
}

TEST(CoverFormat, GroundDefaultsToUnion) {
  auto cf = parse_cover("families 2\nfamily 0 set 0: 4 1\nfamily 1 set 0: 2\n");
  EXPECT_EQ(cf.cover.ground, (std::vector<Point>{1, 2, 4}));
}

TEST(CoverFormat, Errors) {
  EXPECT_THROW(parse_cover("family 0 set 0: 1\n"), ParseError);
  EXPECT_THROW(parse_cover("families 1\nfamily 0 set 1: 1\n"), ParseError);
  EXPECT_THROW(parse_cover("families 1\nfamily 2 set 0: 1\n"), ParseError);
  EXPECT_THROW(parse_cover("families 1\nfamily 0 set 0: 9\n", 5), ParseError);
  EXPECT_THROW(parse_cover("families 1\n: 3\n"), ParseError);
}

TEST(CoverFormat, PropertyRandomRoundTrip) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 200; ++t) {
    Cover c;
    std::size_t n = 1 + rng() % 30;
    for (Point x = 0; x < n; ++x)
      if (rng() % 4) c.ground.push_back(x);
    c.families.assign(rng() % 4, {});
    for (auto& fam : c.families) {
      auto sets = rng() % 4;
      for (std::size_t j = 0; j < sets; ++j) {
        std::vector<Point> s;
        for (Point x = 0; x < n; ++x)
          if (rng() % 5 == 0) s.push_back(x);
        fam.push_back(s);
      }
    }
    auto back = parse_cover(serialize_cover(c));
    ASSERT_EQ(back.cover.ground, c.ground);
    ASSERT_EQ(back.cover.families, c.families);
  }
}

TEST(SpaceFormat, CoordinatesExact) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (auto kind : {MetricKind::L1, MetricKind::L2, MetricKind::Linf, MetricKind::Torus}) {
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < 20; ++i) pts.push_back({u(rng), u(rng) / 3});
    auto s = MetricSpace::from_coords(kind, pts);
    auto back = parse_space(serialize_space(s));
    EXPECT_TRUE(same_space(s, back));
  }
}

TEST(SpaceFormat, ExplicitTable) {
  auto s = MetricSpace::from_table(3, {0, 1, 1.5, 1, 0, 0.75, 1.5, 0.75, 0});
  auto text = serialize_space(s);
  EXPECT_TRUE(same_space(s, parse_space(text)));
  EXPECT_THROW(parse_space("metric explicit\npoints 3\ndist 0 1 1\ndist 0 2 5\ndist 1 2 1\n"), ParseError);
  EXPECT_THROW(parse_space("metric explicit\npoints 3\ndist 0 1 1\n"), ParseError);
  EXPECT_THROW(parse_space("metric l7\n"), ParseError);
}

TEST(DecompositionFormat, RoundTrip) {
  Decomposition d;
  d.eps = 0.1;
  d.delta = 1.5;
  d.families = {{{0, 3}, {7}}, {{1, 2}}};
  auto back = parse_decomposition(serialize_decomposition(d));
  EXPECT_EQ(back.families, d.families);
  EXPECT_EQ(back.eps, d.eps);
  EXPECT_EQ(back.delta, d.delta);
}

TEST(RelationFormat, RoundTrip) {
  auto r = Relation::from_pairs(5, {{0, 1}, {1, 2}, {4, 0}});
  auto back = parse_relation(serialize_relation(r));
  EXPECT_EQ(back.adj, r.adj);
  EXPECT_THROW(parse_relation("items 2\nrel 0 5\n"), ParseError);
}

TEST(Cli, UnknownVerbIsUsage) {
  auto r = run({"frobnicate"});
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("validate"), std::string::npos);
  EXPECT_EQ(run({}).status, 2);
}

TEST(Cli, CheckCoverCertified) {
  auto sys = cyclic_shift_system(40);
  auto t = transport_cover(zd_brick_cover(1, 1), sys);
  auto sp = put("z40.txt", serialize_system(sys));
  auto cp = put("z40_cover.txt", serialize_cover(t.cover));
  auto r = run({"check-cover", sp, cp, "--radius", "1", "--bound", "9"});
  EXPECT_EQ(r.status, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("status certified"), std::string::npos);
  ASSERT_GT(t.check.max_component, 1u);
  auto low = run({"check-cover", sp, cp, "--radius", "1", "--bound", std::to_string(t.check.max_component - 1)});
  EXPECT_EQ(low.status, 1);
  EXPECT_NE(low.out.find("violation: family"), std::string::npos);
}

TEST(Cli, BruteMinCyclicEight) {
  auto sp = put("z8.txt", serialize_system(cyclic_shift_system(8)));
  auto r = run({"brute-min", sp, "--radius", "1", "--dim", "0", "--bound", "7"});
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.out.find("no cover exists"), std::string::npos);
  auto yes = run({"brute-min", sp, "--radius", "1", "--dim", "1", "--bound", "4"});
  EXPECT_EQ(yes.status, 0);
}

TEST(Cli, ParseErrorIsUsage) {
  auto sp = put("bad.txt", "points 5\ngroup Z\nhorizon 2\ngen +1 3 3\ngen +1 3 4\n");
  auto r = run({"validate", sp});
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("line 5"), std::string::npos);
}

TEST(Cli, ValidateReportsViolation) {
  // Z/4 with the generator stepping by one on a 3-cycle: four steps do not return.
  auto sp = put("bad_cycle.txt",
                "points 3\ngroup Z/4\nhorizon 4\n"
                "gen +1 0 1\ngen +1 1 2\ngen +1 2 0\ngen -1 0 2\ngen -1 1 0\ngen -1 2 1\n");
  auto r = run({"validate", sp});
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.out.find("violation"), std::string::npos);
}

TEST(Cli, PrintedCertificatesReverify) {
  auto sys = translation_system(GroupModel::free_abelian(2), {12, 12}, {Element{1, 0}, Element{0, 1}}).system;
  auto sp = put("t12.txt", serialize_system(sys));
  for (std::string verb : {"transport", "refine"}) {
    auto cp = (scratch() / (verb + "_out.txt")).string();
    auto r = run({verb, sp, "--dim", "2", "--radius", "1", "--out", cp});
    ASSERT_EQ(r.status, 0) << r.out << r.err;
    auto cf = parse_cover(read_file(cp));
    ASSERT_TRUE(cf.scale && cf.bound);
    auto again = run({"check-cover", sp, cp, "--radius", std::to_string(*cf.scale), "--bound",
                      cf.bound->str()});
    EXPECT_EQ(again.status, 0) << verb << "\n" << again.out;
  }
  auto pp = (scratch() / "poly_out.txt").string();
  ASSERT_EQ(run({"poly-cover", sp, "--R", "2", "--out", pp}).status, 0);
  auto cf = parse_cover(read_file(pp));
  EXPECT_EQ(run({"check-cover", sp, pp, "--radius", std::to_string(*cf.scale), "--bound", cf.bound->str()}).status, 0);
}

TEST(Cli, UnionWithBrickControl) {
  auto sys = cyclic_shift_system(60);
  std::vector<Point> a, b;
  for (Point x = 0; x < 60; ++x) (x < 30 ? a : b).push_back(x);
  auto sp = put("z60.txt", serialize_system(sys));
  auto c0 = put("u0.txt", serialize_cover(transport_cover(zd_brick_cover(1, 1), sys, a).cover));
  auto c1 = put("u1.txt", serialize_cover(transport_cover(zd_brick_cover(1, 11), sys, b).cover));
  auto r = run({"union", sp, c0, c1, "--radius", "1", "--brick", "1"});
  EXPECT_EQ(r.status, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("i=1 r=11"), std::string::npos);
  auto tab = run({"union", sp, c0, c1, "--radius", "1", "--control", "0:1:9", "--control", "1:11:2"});
  EXPECT_EQ(tab.status, 1);  // piece 1 does not meet a bound of 2 at scale 11
  auto missing = run({"union", sp, c0, c1, "--radius", "1", "--control", "0:1:9"});
  EXPECT_EQ(missing.status, 2);
}

TEST(Cli, GreedyColor) {
  auto rp = put("rel.txt", "items 4\nrel 0 1\nrel 1 2\nrel 2 3\n");
  EXPECT_EQ(run({"greedy-color", rp, "--degree", "2"}).status, 0);
  auto r = run({"greedy-color", rp, "--degree", "1"});
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.out.find("degree exceeds"), std::string::npos);
}

TEST(Cli, DecomposeAndApprox) {
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 100; ++i) pts.push_back({i / 100.0});
  auto sp = put("circle.txt", serialize_space(MetricSpace::from_coords(MetricKind::Torus, pts)));
  auto dp = (scratch() / "dec.txt").string();
  auto r = run({"decompose", sp, "--epsilon", "0.05", "--k", "3", "--out", dp});
  EXPECT_EQ(r.status, 0) << r.err;
  auto d = parse_decomposition(read_file(dp));
  EXPECT_TRUE(validate_decomposition(parse_space(read_file(sp)), d).ok());

  auto ap = (scratch() / "approx.txt").string();
  auto a = run({"approx", "--action", "rot:13/89", "--epsilon", "0.02", "--out", ap});
  EXPECT_EQ(a.status, 0);
  EXPECT_NE(a.out.find("equivariance error 0.000000000"), std::string::npos);
  EXPECT_EQ(run({"validate", ap}).status, 0);
  EXPECT_EQ(run({"approx", "--action", "rot:1/10", "--epsilon", "0.05"}).status, 2);
}

TEST(Cli, PipelineDeterministic) {
  std::vector<std::string> args{"pipeline", "--action", "cyclic:30", "--no-timing"};
  auto a = run(args);
  auto b = run(args);
  EXPECT_EQ(a.status, 0) << a.out << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("stage\tkey\tvalue"), std::string::npos);
  auto rp = (scratch() / "report.txt").string();
  args.insert(args.end(), {"--out", rp});
  EXPECT_EQ(run(args).status, 0);
  EXPECT_EQ(read_file(rp), a.out);
}

#pragma once

// Cover constructions: transport of Cayley-graph covers, the finite union
// schedule, polynomial-growth covers, refinement of an outer cover by local
// covers, and exhaustive minimum-cover search.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "dad/bound.hpp"
#include "dad/brick_cover.hpp"
#include "dad/cover.hpp"
#include "dad/error.hpp"
#include "dad/greedy.hpp"
#include "dad/group.hpp"
#include "dad/partial_system.hpp"

namespace dad {

// ---------------------------------------------------------------------------
// Transport

struct TransportResult {
  Cover cover;
  std::int64_t move_scale = 0;  // scale r in the system's own generating set
  Bound bound;                  // #B_e^M(C_F(Gamma))
  CoverCheck check;
  std::size_t chart_conflicts = 0;
};

inline bool is_free_abelian_of_rank(const GroupModel& g, int d) {
  if (g.kind() != GroupModel::Kind::Abelian) return false;
  if (static_cast<int>(g.moduli().size()) != d) return false;
  return std::all_of(g.moduli().begin(), g.moduli().end(), [](auto m) { return m == 0; });
}

/// Pulls a brick cover of Z^d back to the system along one breadth-first
/// chart per orbit, based at the least point of the subset in that orbit.
/// Brick scale is measured in the base generating set F; when the system's
/// model is F^p the system-side scale is floor(scale / p).
inline TransportResult transport_cover(const BrickCover& geo, const PartialSystem& sys,
                                       std::optional<std::vector<Point>> subset = std::nullopt,
                                       bool require_freeness = true) {
  const auto& G = sys.group();
  if (!is_free_abelian_of_rank(G, geo.dim))
    throw PreconditionError("transport needs the system group to be Z^" + std::to_string(geo.dim) +
                            ", got " + G.spec());
  TransportResult out;
  out.move_scale = geo.scale / G.power();
  if (out.move_scale < 1) throw PreconditionError("brick scale below one system step");
  if (require_freeness) {
    if (auto w = local_freeness(sys, out.move_scale)) {
      throw PreconditionError("not locally free at point " + std::to_string(w->point) + ": " +
                              G.format(w->first) + " and " + G.format(w->second) + " both reach " +
                              std::to_string(w->image));
    }
  }
  std::vector<Point> A = subset ? *subset : all_points(sys);
  std::sort(A.begin(), A.end());
  A.erase(std::unique(A.begin(), A.end()), A.end());
  auto label = orbit_labels(sys);
  std::map<std::size_t, Chart> charts;
  std::map<std::tuple<int, std::size_t, Element>, std::vector<Point>> sets;
  for (auto p : A) {
    auto it = charts.find(label[p]);
    if (it == charts.end()) {
      it = charts.emplace(label[p], bfs_chart(sys, p)).first;
      out.chart_conflicts += it->second.conflicts;
    }
    const auto& g = it->second.at(p);
    int j = geo.family_of(g);
    sets[{j, label[p], geo.brick_of(g, j)}].push_back(p);
  }
  out.cover.ground = A;
  out.cover.families.assign(static_cast<std::size_t>(geo.families()), {});
  for (auto& [key, pts] : sets) out.cover.families[static_cast<std::size_t>(std::get<0>(key))].push_back(pts);
  out.cover.normalize();
  out.bound = ball_count(G.base(), static_cast<std::uint64_t>(geo.diameter_bound()));
  out.check = check_cover(sys, out.cover, out.move_scale, out.bound);
  return out;
}

// ---------------------------------------------------------------------------
// Union schedule

/// #B_e^{(D-1)(R+1)+1} in the Cayley graph of F^r.
inline Bound union_bound(const Bound& r, const Bound& R, const Bound& D, const GroupModel& group) {
  if (r.is_zero() || R.is_zero() || D.is_zero()) throw PreconditionError("r, R, D must be >= 1");
  Bound exponent = (D - 1) * (R + Bound(1)) + Bound(1);
  return ball_count(group, exponent * r);
}

/// A control function tabulated at the radii where it is needed.
class ControlTable {
 public:
  void set(const Bound& r, const Bound& M) { entries_[r] = M; }
  bool has(const Bound& r) const { return entries_.count(r) > 0; }
  const Bound& at(const Bound& r) const {
    auto it = entries_.find(r);
    if (it == entries_.end()) throw PreconditionError("control function not tabulated at " + r.str());
    return it->second;
  }
  const std::map<Bound, Bound>& entries() const { return entries_; }

 private:
  std::map<Bound, Bound> entries_;
};

using ControlFn = std::function<Bound(const Bound& scale)>;

struct Schedule {
  std::vector<Bound> r;  // r_0..r_K
  std::vector<Bound> f;  // f_i(r_i)
  std::vector<Bound> R;  // R_0..R_K
  std::size_t K() const { return R.size() - 1; }
  const Bound& final_bound() const { return R.back(); }
};

/// r_0 = r, R_0 = f_0(r); r_i = r (R_{i-1} + 2) and
/// R_i = #B_e^{(R_{i-1} - 1)(f_i(r_i) + 1) + 1}(C_{F^r}).
inline Schedule union_schedule(const std::vector<ControlTable>& f, const Bound& r,
                               const GroupModel& group) {
  if (f.empty()) throw PreconditionError("need at least one control function");
  if (r.is_zero()) throw PreconditionError("r must be >= 1");
  Schedule s;
  s.r.push_back(r);
  s.f.push_back(f[0].at(r));
  s.R.push_back(s.f[0]);
  for (std::size_t i = 1; i < f.size(); ++i) {
    const Bound& prev = s.R.back();
    if (prev.is_zero()) throw PreconditionError("control values must be >= 1");
    Bound ri = r * (prev + Bound(2));
    Bound fi = f[i].at(ri);
    Bound exponent = (prev - 1) * (fi + Bound(1)) + Bound(1);
    s.r.push_back(ri);
    s.f.push_back(fi);
    s.R.push_back(ball_count(group, exponent * r));
  }
  return s;
}

/// Tabulates f_i lazily at the scheduled radii and returns the schedule
/// computed by union_schedule from the resulting tables.
inline std::pair<Schedule, std::vector<ControlTable>> tabulate_schedule(
    const std::function<Bound(std::size_t, const Bound&)>& f, std::size_t K, const Bound& r,
    const GroupModel& group) {
  std::vector<ControlTable> tables(K + 1);
  tables[0].set(r, f(0, r));
  Bound prev = tables[0].at(r);
  for (std::size_t i = 1; i <= K; ++i) {
    if (prev.is_zero()) throw PreconditionError("control values must be >= 1");
    Bound ri = r * (prev + Bound(2));
    tables[i].set(ri, f(i, ri));
    std::vector<ControlTable> head(tables.begin(), tables.begin() + static_cast<std::ptrdiff_t>(i) + 1);
    prev = union_schedule(head, r, group).R.back();
  }
  return {union_schedule(tables, r, group), tables};
}

class UnionError : public PreconditionError {
 public:
  UnionError(std::size_t piece, const std::string& what)
      : PreconditionError("piece " + std::to_string(piece) + " fails its certificate: " + what),
        piece_(piece) {}
  std::size_t piece() const { return piece_; }

 private:
  std::size_t piece_;
};

struct UnionResult {
  Cover cover;
  CoverCheck check;
  std::vector<CoverCheck> piece_checks;
};

/// Familywise union of piece covers. Piece i must be a (d, F^{r_i}, f_i(r_i))
/// cover of its ground set; this is re-verified before the union is formed.
inline UnionResult union_covers(const PartialSystem& sys, const std::vector<Cover>& pieces,
                                std::int64_t r, const Schedule& schedule) {
  if (pieces.size() != schedule.R.size())
    throw PreconditionError("schedule has " + std::to_string(schedule.R.size()) + " pieces, got " +
                            std::to_string(pieces.size()));
  UnionResult out;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    auto chk = check_cover(sys, pieces[i], clamp_scale(schedule.r[i], sys), schedule.f[i]);
    if (!chk.ok()) throw UnionError(i, chk.violation->describe());
    out.piece_checks.push_back(chk);
  }
  if (pieces.size() == 1) {
    out.cover = pieces[0];
  } else {
    std::size_t fams = 0;
    for (const auto& p : pieces) fams = std::max(fams, p.families.size());
    out.cover.families.assign(fams, {});
    for (const auto& p : pieces) {
      out.cover.ground.insert(out.cover.ground.end(), p.ground.begin(), p.ground.end());
      for (std::size_t j = 0; j < p.families.size(); ++j)
        for (const auto& s : p.families[j]) out.cover.families[j].push_back(s);
    }
    std::sort(out.cover.ground.begin(), out.cover.ground.end());
    out.cover.ground.erase(std::unique(out.cover.ground.begin(), out.cover.ground.end()),
                           out.cover.ground.end());
  }
  out.check = check_cover(sys, out.cover, r, schedule.final_bound());
  return out;
}

// ---------------------------------------------------------------------------
// Polynomial growth covers

struct PolyGrowthResult {
  std::uint64_t K = 0;  // 4^d + 1 classes
  std::uint64_t m = 0;
  BigInt S0;
  std::int64_t R = 0;
  std::int64_t Rn = 0;
  std::vector<Point> net;
  std::vector<std::vector<Point>> sets;  // B_x^{2 Rn} for x in net
  Coloring coloring;
  Cover cover;
  Bound bound;  // max #B_x^{2 Rn}
  CoverCheck check;
  std::uint64_t max_net_in_ball = 0;     // max_z #(B_z^{3 Rn} ∩ net)
  std::vector<Point> ratio_misses;       // z where that count exceeds #B^{4Rn}/#B^{Rn}
};

/// Least m with K^m >= C R^d 4^{dm}.
inline std::uint64_t poly_growth_exponent(std::uint64_t K, std::uint64_t C, std::int64_t R, int d) {
  using boost::multiprecision::pow;
  BigInt base = BigInt(C) * pow(BigInt(R), static_cast<unsigned>(d));
  BigInt four_d = pow(BigInt(4), static_cast<unsigned>(d));
  BigInt lhs = 1, rhs = base;
  for (std::uint64_t m = 0; m < 10'000'000; ++m) {
    if (lhs >= rhs) return m;
    lhs *= K;
    rhs *= four_d;
  }
  throw ResourceCapError("doubling exponent search exceeded cap");
}

inline PolyGrowthResult poly_growth_cover(const PartialSystem& sys, const PolynomialFit& fit,
                                          std::int64_t R) {
  if (R <= 1) throw PreconditionError("R must be > 1");
  if (fit.degree < 1 || fit.C < 1) throw PreconditionError("growth fit must have C, d >= 1");
  using boost::multiprecision::pow;
  PolyGrowthResult out;
  const int d = fit.degree;
  out.K = pow(BigInt(4), static_cast<unsigned>(d)).convert_to<std::uint64_t>() + 1;
  out.m = poly_growth_exponent(out.K, fit.C, R, d);
  out.S0 = pow(BigInt(4), static_cast<unsigned>(out.m + 1)) * R;
  out.R = R;
  const auto n = static_cast<std::int64_t>(sys.size());
  auto clamp = [&](std::int64_t s) { return std::min<std::int64_t>(s, std::max<std::int64_t>(n, 1)); };

  Reach reach(sys);
  // Find a doubling scale.
  std::int64_t Rn = R;
  std::vector<std::uint64_t> growth;
  for (;; ++Rn) {
    if (BigInt(4) * Rn > out.S0) throw Error("no doubling scale found");
    sys.require_scale(clamp(4 * Rn));
    bool ok = true;
    growth.assign(static_cast<std::size_t>(clamp(4 * Rn)) + 1, 0);
    for (Point x = 0; x < sys.size(); ++x) {
      std::vector<std::uint64_t> c(growth.size(), 0);
      for (auto y : reach.from(x, clamp(4 * Rn))) c[static_cast<std::size_t>(reach.dist(y))] += 1;
      for (std::size_t k = 1; k < c.size(); ++k) c[k] += c[k - 1];
      for (std::size_t k = 0; k < c.size(); ++k) growth[k] = std::max(growth[k], c[k]);
      if (c.back() > out.K * c[static_cast<std::size_t>(clamp(Rn))]) ok = false;
    }
    if (ok) break;
  }
  out.Rn = Rn;
  // Growth certificate up to the radii actually used.
  for (std::size_t k = 1; k < growth.size(); ++k) {
    BigInt rhs = BigInt(fit.C) * pow(BigInt(k), static_cast<unsigned>(d));
    if (BigInt(growth[k]) > rhs)
      throw PreconditionError("growth certificate fails at radius " + std::to_string(k) + ": " +
                              std::to_string(growth[k]) + " points");
  }
  // Maximal family with pairwise disjoint Rn-balls, chosen in id order.
  std::vector<char> claimed(sys.size(), 0);
  for (Point x = 0; x < sys.size(); ++x) {
    const auto& ball = reach.from(x, clamp(Rn));
    if (std::any_of(ball.begin(), ball.end(), [&](Point p) { return claimed[p] != 0; })) continue;
    out.net.push_back(x);
    for (auto p : ball) claimed[p] = 1;
  }
  std::vector<std::int64_t> net_index(sys.size(), kUndefined);
  for (std::size_t i = 0; i < out.net.size(); ++i) net_index[out.net[i]] = static_cast<std::int64_t>(i);
  std::uint64_t max_set = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  sys.require_scale(clamp(5 * Rn));
  for (std::size_t i = 0; i < out.net.size(); ++i) {
    auto set = reach.from(out.net[i], clamp(2 * Rn));
    std::sort(set.begin(), set.end());
    max_set = std::max<std::uint64_t>(max_set, set.size());
    out.sets.push_back(std::move(set));
    // V_x and V_y are within Rn moves iff d(x, y) <= 5 Rn.
    for (auto p : reach.from(out.net[i], clamp(5 * Rn)))
      if (net_index[p] != kUndefined && static_cast<std::size_t>(net_index[p]) > i)
        pairs.emplace_back(i, static_cast<std::size_t>(net_index[p]));
  }
  for (Point z = 0; z < sys.size(); ++z) {
    std::uint64_t in3 = 0, b1 = 0, b4 = 0;
    for (auto p : reach.from(z, clamp(4 * Rn))) {
      auto dist = reach.dist(p);
      if (dist <= clamp(3 * Rn) && net_index[p] != kUndefined) ++in3;
      if (dist <= clamp(Rn)) ++b1;
      ++b4;
    }
    out.max_net_in_ball = std::max(out.max_net_in_ball, in3);
    if (in3 * b1 > b4) out.ratio_misses.push_back(z);
  }
  out.coloring = greedy_color(Relation::from_pairs(out.net.size(), pairs), out.K - 1);
  out.cover.ground = all_points(sys);
  out.cover.families.assign(out.K, {});
  for (std::size_t c = 0; c < out.coloring.classes.size(); ++c)
    for (auto i : out.coloring.classes[c]) out.cover.families[c].push_back(out.sets[i]);
  out.bound = Bound(max_set);
  out.check = check_cover(sys, out.cover, clamp(Rn), out.bound);
  return out;
}

// ---------------------------------------------------------------------------
// Refinement

struct LocalCover {
  Cover cover;
  Bound bound;
};

/// Given a component of the outer cover and a scale (in the system's own
/// generating set), returns a cover of the component certified at that scale.
using LocalProvider =
    std::function<LocalCover(const PartialSystem&, const std::vector<Point>&, const Bound&)>;

/// f(s) = #B_e^{M} in C_F(Z^d) with M = d * 2 (s p)(d + 1), the brick cover's
/// diameter bound at base scale s p for a system generated by F^p.
inline ControlFn brick_control(const GroupModel& sys_group, int dim) {
  GroupModel base = sys_group.base();
  auto p = static_cast<std::uint64_t>(sys_group.power());
  auto per = static_cast<std::uint64_t>(dim) * 2 * static_cast<std::uint64_t>(dim + 1) * p;
  return [base, per](const Bound& s) { return ball_count(base, Bound(per) * s); };
}

/// Local covers from brick covers of Z^d transported along a breadth-first
/// chart of the component's orbit. Scales past the system size are clamped,
/// since moves saturate there; the returned bound is for the requested scale.
inline LocalProvider brick_provider(int dim) {
  return [dim](const PartialSystem& sys, const std::vector<Point>& comp, const Bound& scale) {
    const auto p = static_cast<std::uint64_t>(sys.group().power());
    auto cap = static_cast<std::uint64_t>(sys.size() + 1) * p;
    auto rho = static_cast<std::int64_t>(std::min<std::uint64_t>((scale * Bound(p)).clamp_u64(), cap));
    auto t = transport_cover(zd_brick_cover(dim, std::max<std::int64_t>(rho, 1)), sys, comp, false);
    return LocalCover{t.cover, brick_control(sys.group(), dim)(scale)};
  };
}

class RefineError : public PreconditionError {
 public:
  RefineError(std::vector<Point> component, const std::string& what)
      : PreconditionError("local cover fails on component starting at point " +
                          std::to_string(component.empty() ? 0 : component.front()) + ": " + what),
        component_(std::move(component)) {}
  const std::vector<Point>& component() const { return component_; }

 private:
  std::vector<Point> component_;
};

struct RefineResult {
  Schedule schedule;
  std::size_t components = 0;
  UnionResult result;
};

/// Covers each F^{R_K}-component of each nonempty outer family by a local
/// cover at the scheduled scale, unions the local covers per family, then
/// unions across families. K + 1 is the number of nonempty outer families.
inline RefineResult refine_cover(const PartialSystem& sys, const Cover& outer, const Bound& outer_scale,
                                 const ControlFn& f, const LocalProvider& provider, std::int64_t r) {
  std::vector<std::size_t> fams;
  for (std::size_t i = 0; i < outer.families.size(); ++i)
    if (!outer.family_union(i).empty()) fams.push_back(i);
  if (fams.empty()) throw PreconditionError("outer cover is empty");
  RefineResult out;
  out.schedule = tabulate_schedule([&](std::size_t, const Bound& s) { return f(s); }, fams.size() - 1,
                                   Bound(static_cast<std::uint64_t>(r)), sys.group())
                     .first;
  const Bound& RK = out.schedule.final_bound();
  if (outer_scale < RK)
    throw PreconditionError("outer cover scale " + outer_scale.str() + " is below R_K = " + RK.str());
  const auto sK = clamp_scale(RK, sys);
  std::vector<Cover> pieces;
  for (std::size_t i = 0; i < fams.size(); ++i) {
    Cover piece;
    piece.ground = outer.family_union(fams[i]);
    const Bound& ri = out.schedule.r[i];
    auto comps = s_components(sys, piece.ground, sK);
    for (const auto& comp : comps.classes) {
      ++out.components;
      auto local = provider(sys, comp, ri);
      if (local.cover.ground != comp) throw RefineError(comp, "provider returned a different ground set");
      auto chk = check_cover(sys, local.cover, clamp_scale(ri, sys), out.schedule.f[i]);
      if (!chk.ok()) throw RefineError(comp, chk.violation->describe());
      if (piece.families.size() < local.cover.families.size()) piece.families.resize(local.cover.families.size());
      for (std::size_t k = 0; k < local.cover.families.size(); ++k)
        for (auto& s : local.cover.families[k]) piece.families[k].push_back(s);
    }
    pieces.push_back(std::move(piece));
  }
  out.result = union_covers(sys, pieces, r, out.schedule);
  return out;
}

struct RefineDriverResult {
  PolyGrowthResult outer;
  RefineResult refined;
  std::size_t rounds = 0;
};

/// Chooses K' so that the polynomial-growth outer cover at scale R_{K'} has at
/// most K' + 1 nonempty families, then refines it.
inline RefineDriverResult refine_with_poly_outer(const PartialSystem& sys, const PolynomialFit& fit,
                                                 std::int64_t r, const ControlFn& f,
                                                 const LocalProvider& provider) {
  RefineDriverResult out;
  std::size_t K = 0;
  for (;;) {
    ++out.rounds;
    auto sched = tabulate_schedule([&](std::size_t, const Bound& s) { return f(s); }, K,
                                   Bound(static_cast<std::uint64_t>(r)), sys.group())
                     .first;
    auto R = std::max<std::int64_t>(2, clamp_scale(sched.final_bound(), sys));
    out.outer = poly_growth_cover(sys, fit, R);
    auto used = out.outer.cover.nonempty_families();
    if (used <= K + 1) {
      // Components at the clamped scale equal those at R_{K'}.
      Bound scale = std::max(sched.final_bound(), Bound(static_cast<std::uint64_t>(out.outer.Rn)));
      out.refined = refine_cover(sys, out.outer.cover, scale, f, provider, r);
      return out;
    }
    K = used - 1;
  }
}

// ---------------------------------------------------------------------------
// Exhaustive minimum cover search

struct BruteResult {
  bool exists = false;
  std::optional<Cover> witness;
  std::uint64_t nodes = 0;
};

inline constexpr std::size_t kBruteCap = 14;

/// Decides whether the subset (default: all points) has a (d, F^r, M)-cover.
/// Partitions suffice: shrinking sets never enlarges components.
inline BruteResult brute_min_cover(const PartialSystem& sys, std::int64_t r, int d, std::uint64_t M,
                                   std::optional<std::vector<Point>> subset = std::nullopt,
                                   std::size_t cap = kBruteCap) {
  std::vector<Point> pts = subset ? *subset : all_points(sys);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() > cap)
    throw ResourceCapError("brute force limited to " + std::to_string(cap) + " points, got " +
                           std::to_string(pts.size()));
  if (d < 0) throw PreconditionError("dimension must be >= 0");
  sys.require_scale(std::min<std::int64_t>(r, static_cast<std::int64_t>(sys.size())));
  const std::size_t n = pts.size();
  std::vector<std::int64_t> index(sys.size(), kUndefined);
  for (std::size_t i = 0; i < n; ++i) index[pts[i]] = static_cast<std::int64_t>(i);
  std::vector<std::vector<std::size_t>> adj(n);
  Reach reach(sys);
  for (std::size_t i = 0; i < n; ++i)
    for (auto p : reach.from(pts[i], r))
      if (index[p] != kUndefined && static_cast<std::size_t>(index[p]) != i)
        adj[i].push_back(static_cast<std::size_t>(index[p]));

  BruteResult out;
  std::vector<int> fam(n, -1);
  std::vector<std::size_t> stack;
  std::vector<char> seen(n, 0);
  auto component_size = [&](std::size_t i) {
    std::fill(seen.begin(), seen.end(), 0);
    stack.assign(1, i);
    seen[i] = 1;
    std::size_t count = 0;
    while (!stack.empty()) {
      auto a = stack.back();
      stack.pop_back();
      ++count;
      for (auto b : adj[a])
        if (!seen[b] && fam[b] == fam[i]) {
          seen[b] = 1;
          stack.push_back(b);
        }
    }
    return count;
  };
  std::function<bool(std::size_t, int)> go = [&](std::size_t i, int used) -> bool {
    if (i == n) return true;
    for (int j = 0; j <= std::min(d, used); ++j) {
      ++out.nodes;
      fam[i] = j;
      if (component_size(i) <= M && go(i + 1, std::max(used, j + 1))) return true;
    }
    fam[i] = -1;
    return false;
  };
  out.exists = go(0, 0);
  if (out.exists) {
    Cover c;
    c.ground = pts;
    c.families.assign(static_cast<std::size_t>(d) + 1, {});
    for (std::size_t i = 0; i < n; ++i) c.families[static_cast<std::size_t>(fam[i])].push_back({pts[i]});
    // Merge singletons into F^r-components per family.
    Cover merged;
    merged.ground = pts;
    for (std::size_t j = 0; j < c.families.size(); ++j) {
      auto comps = s_components(sys, c.family_union(j), r);
      merged.families.push_back(comps.classes);
    }
    out.witness = merged;
  }
  return out;
}

}  // namespace dad

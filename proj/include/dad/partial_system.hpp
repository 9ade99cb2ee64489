#pragma once

// Finite partial dynamical systems Gamma -> X given by generator tables.
//
// Points are 0..n-1. Every generator s of the model (identity first) carries a
// partial injection theta_s stored as a table with -1 for "undefined". A
// system is only trusted up to its validated horizon: coherence
// theta_g theta_h <= theta_gh is checked for words of length <= horizon.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "dad/error.hpp"
#include "dad/group.hpp"

namespace dad {

using Point = std::size_t;
inline constexpr std::int64_t kUndefined = -1;
inline constexpr std::int64_t kUnboundedHorizon = std::numeric_limits<std::int64_t>::max();

inline std::size_t point_cap_from_env() {
  if (const char* v = std::getenv("DAD_MAX_POINTS")) {
    try {
      return static_cast<std::size_t>(std::stoull(v));
    } catch (...) {
    }
  }
  return 2'000'000;
}

class PartialSystem {
 public:
  PartialSystem(GroupModel group, std::size_t points) : group_(std::move(group)), n_(points) {
    if (points > point_cap_from_env()) throw ResourceCapError("too many points");
    maps_.assign(group_.generators().size(), std::vector<std::int64_t>(points, kUndefined));
    for (std::size_t x = 0; x < points; ++x) maps_[0][x] = static_cast<std::int64_t>(x);
  }

  const GroupModel& group() const { return group_; }
  std::size_t size() const { return n_; }
  std::size_t generator_count() const { return maps_.size(); }
  std::int64_t horizon() const { return horizon_; }
  bool horizon_unbounded() const { return horizon_ == kUnboundedHorizon; }

  /// theta_s(x), or nullopt when x is outside the domain of theta_s.
  std::optional<Point> apply(std::size_t gen, Point x) const {
    auto y = maps_[gen][x];
    if (y == kUndefined) return std::nullopt;
    return static_cast<Point>(y);
  }

  std::int64_t raw(std::size_t gen, Point x) const { return maps_[gen][x]; }

  /// Sets theta_s(x) = y only; the inverse table is the caller's business.
  void set(std::size_t gen, Point x, Point y) {
    if (gen == 0 && x != y) throw PreconditionError("identity generator must act trivially");
    check_point(x);
    check_point(y);
    maps_[gen][x] = static_cast<std::int64_t>(y);
  }

  /// Sets theta_s(x) = y and theta_{s^-1}(y) = x.
  void set_pair(std::size_t gen, Point x, Point y) {
    set(gen, x, y);
    set(group_.inverse_generator(gen), y, x);
  }

  void clear(std::size_t gen, Point x) { maps_[gen][x] = kUndefined; }

  void set_horizon(std::int64_t h) { horizon_ = h; }

  /// Throws unless F^r-moves at scale r are within the validated horizon.
  void require_scale(std::int64_t r) const {
    if (r < 0) throw PreconditionError("scale must be >= 0");
    if (r > horizon_)
      throw PreconditionError("scale " + std::to_string(r) + " exceeds validated horizon " +
                              std::to_string(horizon_));
  }

 private:
  void check_point(Point x) const {
    if (x >= n_) throw PreconditionError("point " + std::to_string(x) + " out of range");
  }

  GroupModel group_;
  std::size_t n_;
  std::vector<std::vector<std::int64_t>> maps_;
  std::int64_t horizon_ = 0;
};

// ---------------------------------------------------------------------------
// Axiom validation

struct AxiomViolation {
  enum class Kind { Identity, Inverse, Coherence };
  Kind kind;
  Point point = 0;
  std::size_t generator = 0;
  Element element;  // coherence: group element with two images
  std::string detail;
};

struct ValidationReport {
  std::int64_t horizon = 0;
  std::int64_t checked_depth = 0;
  std::vector<AxiomViolation> violations;
  bool ok() const { return violations.empty(); }
};

namespace detail {

/// All (element, point) pairs reachable from x by words of length <= depth,
/// keyed by element. Calls on_conflict(element, first, second) when one
/// element reaches two points.
template <class OnConflict>
ElementMap<Point> element_reach(const PartialSystem& sys, Point x, std::int64_t depth,
                                OnConflict&& on_conflict,
                                std::size_t cap = kDefaultElementCap) {
  const auto& G = sys.group();
  const auto& gens = G.generators();
  ElementMap<Point> seen;
  seen.emplace(G.identity(), x);
  std::vector<std::pair<Element, Point>> frontier{{G.identity(), x}};
  for (std::int64_t step = 1; step <= depth && !frontier.empty(); ++step) {
    std::vector<std::pair<Element, Point>> next;
    for (const auto& [g, y] : frontier) {
      for (std::size_t s = 1; s < gens.size(); ++s) {
        auto z = sys.apply(s, y);
        if (!z) continue;
        auto h = G.multiply(gens[s], g);
        auto [it, fresh] = seen.emplace(h, *z);
        if (fresh) {
          if (seen.size() > cap) throw ResourceCapError("orbit exploration exceeds element cap");
          next.emplace_back(std::move(h), *z);
        } else if (it->second != *z) {
          if (!on_conflict(it->first, it->second, *z)) return seen;
        }
      }
    }
    frontier = std::move(next);
  }
  return seen;
}

}  // namespace detail

/// Checks the identity and inverse laws everywhere and coherence for words of
/// length <= horizon. Does not modify the system.
inline ValidationReport check_axioms(const PartialSystem& sys, std::int64_t horizon) {
  ValidationReport rep;
  rep.horizon = horizon;
  const auto& G = sys.group();
  for (Point x = 0; x < sys.size(); ++x) {
    if (sys.raw(0, x) != static_cast<std::int64_t>(x))
      rep.violations.push_back({AxiomViolation::Kind::Identity, x, 0, G.identity(),
                                "identity does not fix point"});
  }
  for (std::size_t s = 1; s < sys.generator_count(); ++s) {
    auto inv = G.inverse_generator(s);
    for (Point x = 0; x < sys.size(); ++x) {
      auto y = sys.apply(s, x);
      if (!y) continue;
      auto back = sys.apply(inv, *y);
      if (!back || *back != x) {
        rep.violations.push_back({AxiomViolation::Kind::Inverse, x, s, G.generators()[s],
                                  "inverse generator does not undo " + G.format(G.generators()[s])});
      }
    }
  }
  if (!rep.ok()) return rep;
  // An unbounded horizon cannot be checked exhaustively; it is checked to
  // depth 2n + 2 and reported as such.
  rep.checked_depth = horizon == kUnboundedHorizon
                          ? static_cast<std::int64_t>(sys.size()) * 2 + 2
                          : horizon;
  for (Point x = 0; x < sys.size(); ++x) {
    detail::element_reach(sys, x, rep.checked_depth, [&](const Element& g, Point a, Point b) {
      rep.violations.push_back({AxiomViolation::Kind::Coherence, x, 0, g,
                                "element " + G.format(g) + " sends point to both " +
                                    std::to_string(a) + " and " + std::to_string(b)});
      return false;
    });
    if (!rep.ok()) break;
  }
  return rep;
}

/// Validates and, on success, records the horizon in the system.
inline ValidationReport validate_axioms(PartialSystem& sys, std::int64_t horizon) {
  auto rep = check_axioms(sys, horizon);
  if (rep.ok()) sys.set_horizon(horizon);
  return rep;
}

// ---------------------------------------------------------------------------
// Translation systems: Gamma acting on a finite abelian group by a homomorphism.

struct TranslationSystem {
  PartialSystem system;
  std::vector<std::int64_t> moduli;  // target Z/q_1 x ... x Z/q_k, mixed radix ids

  Element coords(Point x) const {
    Element c(moduli.size());
    for (std::size_t i = 0; i < moduli.size(); ++i) {
      c[i] = static_cast<std::int64_t>(x % static_cast<std::size_t>(moduli[i]));
      x /= static_cast<std::size_t>(moduli[i]);
    }
    return c;
  }
  Point id(const Element& c) const {
    Point x = 0;
    Point mul = 1;
    for (std::size_t i = 0; i < moduli.size(); ++i) {
      auto v = ((c[i] % moduli[i]) + moduli[i]) % moduli[i];
      x += static_cast<Point>(v) * mul;
      mul *= static_cast<Point>(moduli[i]);
    }
    return x;
  }
};

/// Gamma = Z^d (possibly powered) acting on prod Z/q_i, where the i-th
/// standard basis vector of Z^d translates by images[i]. A genuine action,
/// so the horizon is unbounded.
inline TranslationSystem translation_system(const GroupModel& acting,
                                            std::vector<std::int64_t> moduli,
                                            const std::vector<Element>& images) {
  if (acting.kind() != GroupModel::Kind::Abelian)
    throw PreconditionError("translation systems need an abelian acting group");
  for (auto m : acting.moduli())
    if (m != 0) throw PreconditionError("acting group must be free abelian");
  if (images.size() != acting.moduli().size())
    throw PreconditionError("need one image per basis vector");
  std::size_t n = 1;
  for (auto q : moduli) {
    if (q < 1) throw PreconditionError("moduli must be >= 1");
    n *= static_cast<std::size_t>(q);
    if (n > point_cap_from_env()) throw ResourceCapError("too many points");
  }
  TranslationSystem out{PartialSystem(acting, n), moduli};
  const auto& gens = acting.generators();
  for (std::size_t s = 1; s < gens.size(); ++s) {
    Element shift(moduli.size(), 0);
    for (std::size_t b = 0; b < images.size(); ++b)
      for (std::size_t i = 0; i < moduli.size(); ++i) shift[i] += gens[s][b] * images[b][i];
    for (Point x = 0; x < n; ++x) {
      auto c = out.coords(x);
      for (std::size_t i = 0; i < c.size(); ++i) c[i] += shift[i];
      out.system.set(s, x, out.id(c));
    }
  }
  out.system.set_horizon(kUnboundedHorizon);
  return out;
}

/// Z acting on Z/n by +1.
inline PartialSystem cyclic_shift_system(std::int64_t n) {
  return translation_system(GroupModel::free_abelian(1), {n}, {Element{1}}).system;
}

// ---------------------------------------------------------------------------
// Restriction

struct Restriction {
  PartialSystem system;
  std::vector<Point> to_parent;  // new id -> old id
};

/// The restricted system Gamma -> A: theta^A_g = theta_g on A ∩ theta_g^-1(A).
/// Points are renumbered in increasing order of their old ids.
inline Restriction restrict_system(const PartialSystem& sys, std::vector<Point> subset) {
  std::sort(subset.begin(), subset.end());
  subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
  std::vector<std::int64_t> to_new(sys.size(), kUndefined);
  for (std::size_t i = 0; i < subset.size(); ++i) {
    if (subset[i] >= sys.size()) throw PreconditionError("subset point out of range");
    to_new[subset[i]] = static_cast<std::int64_t>(i);
  }
  Restriction out{PartialSystem(sys.group(), subset.size()), subset};
  for (std::size_t s = 1; s < sys.generator_count(); ++s) {
    for (std::size_t i = 0; i < subset.size(); ++i) {
      auto y = sys.apply(s, subset[i]);
      if (y && to_new[*y] != kUndefined) out.system.set(s, i, static_cast<Point>(to_new[*y]));
    }
  }
  out.system.set_horizon(sys.horizon());
  return out;
}

// ---------------------------------------------------------------------------
// Moves, components, balls

/// Points reachable from x by at most `depth` generator steps; the returned
/// vector holds the BFS depth of each point (-1 when unreached).
class Reach {
 public:
  explicit Reach(const PartialSystem& sys) : sys_(sys), dist_(sys.size(), -1) {}

  /// Returns the reached points in BFS order. Reuses internal buffers.
  const std::vector<Point>& from(Point x, std::int64_t depth) {
    for (auto p : order_) dist_[p] = -1;
    order_.clear();
    dist_[x] = 0;
    order_.push_back(x);
    for (std::size_t head = 0; head < order_.size(); ++head) {
      auto y = order_[head];
      if (dist_[y] >= depth) continue;
      for (std::size_t s = 1; s < sys_.generator_count(); ++s) {
        auto z = sys_.raw(s, y);
        if (z == kUndefined || dist_[static_cast<Point>(z)] != -1) continue;
        dist_[static_cast<Point>(z)] = dist_[y] + 1;
        order_.push_back(static_cast<Point>(z));
      }
    }
    return order_;
  }

  std::int64_t dist(Point p) const { return dist_[p]; }

 private:
  const PartialSystem& sys_;
  std::vector<std::int64_t> dist_;
  std::vector<Point> order_;
};

/// Connected components of the whole system under single generator steps.
inline std::vector<std::size_t> orbit_labels(const PartialSystem& sys) {
  std::vector<std::size_t> label(sys.size(), SIZE_MAX);
  std::size_t next = 0;
  Reach reach(sys);
  for (Point x = 0; x < sys.size(); ++x) {
    if (label[x] != SIZE_MAX) continue;
    for (auto p : reach.from(x, kUnboundedHorizon)) label[p] = next;
    ++next;
  }
  return label;
}

struct ComponentPartition {
  std::vector<Point> base;                 // sorted subset
  std::int64_t scale = 0;                  // r
  std::vector<std::vector<Point>> classes; // sorted, ordered by least element

  std::size_t max_size() const {
    std::size_t m = 0;
    for (const auto& c : classes) m = std::max(m, c.size());
    return m;
  }
};

/// Effective move radius: reach saturates after size-1 steps.
inline std::int64_t clamp_scale(const Bound& r, const PartialSystem& sys) {
  auto cap = static_cast<std::uint64_t>(std::max<std::size_t>(sys.size(), 1));
  return static_cast<std::int64_t>(std::min<std::uint64_t>(r.clamp_u64(), cap));
}

/// Finest partition of A into classes closed under F^r-moves that start and
/// end in A; intermediate points may lie anywhere in X.
inline ComponentPartition s_components(const PartialSystem& sys, std::vector<Point> subset,
                                       std::int64_t r) {
  sys.require_scale(std::min<std::int64_t>(r, static_cast<std::int64_t>(sys.size())));
  std::sort(subset.begin(), subset.end());
  subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
  ComponentPartition out;
  out.base = subset;
  out.scale = r;
  std::vector<std::int64_t> index(sys.size(), kUndefined);
  for (std::size_t i = 0; i < subset.size(); ++i) {
    if (subset[i] >= sys.size()) throw PreconditionError("subset point out of range");
    index[subset[i]] = static_cast<std::int64_t>(i);
  }
  std::vector<std::size_t> parent(subset.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  if (r >= static_cast<std::int64_t>(sys.size()) - 1 && !subset.empty()) {
    auto label = orbit_labels(sys);
    std::vector<std::int64_t> first(sys.size(), kUndefined);
    for (std::size_t i = 0; i < subset.size(); ++i) {
      auto& f = first[label[subset[i]]];
      if (f == kUndefined) f = static_cast<std::int64_t>(i);
      else parent[find(i)] = find(static_cast<std::size_t>(f));
    }
  } else {
    Reach reach(sys);
    for (std::size_t i = 0; i < subset.size(); ++i) {
      for (auto p : reach.from(subset[i], r)) {
        if (index[p] != kUndefined) parent[find(i)] = find(static_cast<std::size_t>(index[p]));
      }
    }
  }
  std::vector<std::int64_t> slot(subset.size(), kUndefined);
  for (std::size_t i = 0; i < subset.size(); ++i) {
    auto root = find(i);
    if (slot[root] == kUndefined) {
      slot[root] = static_cast<std::int64_t>(out.classes.size());
      out.classes.emplace_back();
    }
    out.classes[static_cast<std::size_t>(slot[root])].push_back(subset[i]);
  }
  return out;
}

inline std::vector<Point> all_points(const PartialSystem& sys) {
  std::vector<Point> v(sys.size());
  std::iota(v.begin(), v.end(), 0);
  return v;
}

/// Points theta_g(x) for |g| <= P, sorted.
inline std::vector<Point> orbit_ball(const PartialSystem& sys, Point x, std::int64_t P) {
  if (x >= sys.size()) throw PreconditionError("point out of range");
  Reach reach(sys);
  auto v = reach.from(x, P);
  std::sort(v.begin(), v.end());
  return v;
}

// ---------------------------------------------------------------------------
// Local freeness and charts

struct FreenessWitness {
  Point point = 0;
  Element first;
  Element second;
  Point image = 0;
};

/// Finds x and gamma != gamma' in B^P with theta_gamma(x) = theta_gamma'(x).
/// Stabilizers (gamma' = e) are reported before other collisions.
inline std::optional<FreenessWitness> local_freeness(const PartialSystem& sys, std::int64_t P,
                                                     std::optional<Point> only = std::nullopt) {
  const auto& G = sys.group();
  auto scan = [&](Point x, bool stabilizers_only) -> std::optional<FreenessWitness> {
    auto reach = detail::element_reach(sys, x, P, [](const Element&, Point, Point) { return true; });
    std::vector<std::pair<Element, Point>> items(reach.begin(), reach.end());
    auto key = [&](const Element& g) { return std::make_pair(G.base_length(g), G.format(g)); };
    std::sort(items.begin(), items.end(),
              [&](const auto& a, const auto& b) { return key(a.first) < key(b.first); });
    if (stabilizers_only) {
      for (const auto& [g, y] : items)
        if (y == x && !G.is_identity(g)) return FreenessWitness{x, g, G.identity(), y};
      return std::nullopt;
    }
    std::vector<std::int64_t> owner(sys.size(), kUndefined);
    for (std::size_t i = 0; i < items.size(); ++i) {
      auto y = items[i].second;
      if (owner[y] != kUndefined)
        return FreenessWitness{x, items[i].first, items[static_cast<std::size_t>(owner[y])].first, y};
      owner[y] = static_cast<std::int64_t>(i);
    }
    return std::nullopt;
  };
  std::vector<Point> pts = only ? std::vector<Point>{*only} : all_points(sys);
  for (bool stab : {true, false}) {
    for (auto x : pts)
      if (auto w = scan(x, stab)) return w;
  }
  return std::nullopt;
}

struct Chart {
  Point base = 0;
  std::vector<std::int64_t> slot;  // point -> index into elements, or -1
  std::vector<Element> elements;
  std::size_t conflicts = 0;       // edges where f(theta_s y) != s f(y)

  bool contains(Point p) const { return slot[p] != kUndefined; }
  const Element& at(Point p) const { return elements[static_cast<std::size_t>(slot[p])]; }
};

/// Equivariant map theta_g(x) -> g on the orbit ball of radius P. Requires
/// local freeness at x; throws with the witness otherwise.
inline Chart cayley_chart(const PartialSystem& sys, Point x, std::int64_t P) {
  if (auto w = local_freeness(sys, P, x)) {
    const auto& G = sys.group();
    throw PreconditionError("not locally free at point " + std::to_string(w->point) + ": " +
                            G.format(w->first) + " and " + G.format(w->second) +
                            " both reach " + std::to_string(w->image));
  }
  const auto& G = sys.group();
  auto reach = detail::element_reach(sys, x, P, [](const Element&, Point, Point) { return true; });
  Chart c;
  c.base = x;
  c.slot.assign(sys.size(), kUndefined);
  for (const auto& [g, y] : reach) {
    c.slot[y] = static_cast<std::int64_t>(c.elements.size());
    c.elements.push_back(g);
  }
  const auto& gens = G.generators();
  for (Point y = 0; y < sys.size(); ++y) {
    if (!c.contains(y)) continue;
    for (std::size_t s = 1; s < gens.size(); ++s) {
      auto z = sys.apply(s, y);
      if (!z || !c.contains(*z)) continue;
      if (c.at(*z) != G.multiply(gens[s], c.at(y)))
        throw PreconditionError("chart is not equivariant at point " + std::to_string(y) +
                                " under " + G.format(gens[s]));
    }
  }
  return c;
}

/// Breadth-first spanning-tree chart of the orbit of x: f(x) = e and
/// f(theta_s y) = s f(y) along tree edges. Never fails; non-tree edges that
/// disagree are counted in `conflicts`.
inline Chart bfs_chart(const PartialSystem& sys, Point x) {
  const auto& G = sys.group();
  const auto& gens = G.generators();
  Chart c;
  c.base = x;
  c.slot.assign(sys.size(), kUndefined);
  c.slot[x] = 0;
  c.elements.push_back(G.identity());
  std::vector<Point> order{x};
  for (std::size_t head = 0; head < order.size(); ++head) {
    auto y = order[head];
    for (std::size_t s = 1; s < gens.size(); ++s) {
      auto z = sys.apply(s, y);
      if (!z) continue;
      auto img = G.multiply(gens[s], c.at(y));
      if (!c.contains(*z)) {
        c.slot[*z] = static_cast<std::int64_t>(c.elements.size());
        c.elements.push_back(std::move(img));
        order.push_back(*z);
      } else if (c.at(*z) != img) {
        ++c.conflicts;
      }
    }
  }
  c.conflicts /= 2;  // each disagreeing edge is seen from both ends
  return c;
}

// ---------------------------------------------------------------------------
// Growth

struct SystemGrowth {
  GrowthProfile profile;             // G(r) = max_x #{theta_g(x) : |g| <= r}
  std::vector<std::uint64_t> group;  // #B_e^r in the acting group
  bool dominated = true;             // G(r) <= #B_e^r for every sampled r
};

inline SystemGrowth system_growth(const PartialSystem& sys, int max_radius) {
  if (max_radius < 1) throw PreconditionError("max_radius must be >= 1");
  SystemGrowth out;
  auto& p = out.profile;
  p.counts.assign(static_cast<std::size_t>(max_radius) + 1, 0);
  Reach reach(sys);
  for (Point x = 0; x < sys.size(); ++x) {
    std::vector<std::uint64_t> c(static_cast<std::size_t>(max_radius) + 1, 0);
    for (auto y : reach.from(x, max_radius)) c[static_cast<std::size_t>(reach.dist(y))] += 1;
    for (std::size_t r = 1; r < c.size(); ++r) c[r] += c[r - 1];
    for (std::size_t r = 0; r < c.size(); ++r) p.counts[r] = std::max(p.counts[r], c[r]);
  }
  for (int r = 0; r <= max_radius; ++r) {
    p.radii.push_back(r);
    auto b = ball_count(sys.group(), static_cast<std::uint64_t>(r));
    out.group.push_back(b.clamp_u64());
    if (!b.admits(BigInt(p.counts[static_cast<std::size_t>(r)]))) out.dominated = false;
  }
  if (sys.size() > 0)
    p.fit = fit_polynomial(p.counts, std::max<std::uint64_t>(p.counts[1], 1),
                           default_max_degree(sys.group()));
  return out;
}

}  // namespace dad

#pragma once

// Finite metric spaces, doubling estimates and Cantor-like decompositions.
//
// Distances are doubles compared with an absolute tolerance kMetricTol. Points
// of the torus metric are coordinates in turns (each circle has length 1).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dad/bound.hpp"
#include "dad/error.hpp"
#include "dad/greedy.hpp"

namespace dad {

inline constexpr double kMetricTol = 1e-9;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class MetricKind { L1, L2, Linf, Torus, Explicit };

inline std::string metric_name(MetricKind k) {
  switch (k) {
    case MetricKind::L1: return "l1";
    case MetricKind::L2: return "l2";
    case MetricKind::Linf: return "linf";
    case MetricKind::Torus: return "torus";
    case MetricKind::Explicit: return "explicit";
  }
  return {};
}

inline MetricKind parse_metric_kind(const std::string& s) {
  if (s == "l1") return MetricKind::L1;
  if (s == "l2") return MetricKind::L2;
  if (s == "linf") return MetricKind::Linf;
  if (s == "torus") return MetricKind::Torus;
  if (s == "explicit") return MetricKind::Explicit;
  throw PreconditionError("unknown metric '" + s + "'");
}

/// Distance on R/Z.
inline double circle_distance(double a, double b) {
  double d = std::fmod(std::fabs(a - b), 1.0);
  return std::min(d, 1.0 - d);
}

struct MetricCheck {
  bool exhaustive = true;
  std::uint64_t triples = 0;
  std::optional<std::string> violation;
  bool ok() const { return !violation; }
};

class MetricSpace {
 public:
  static MetricSpace from_coords(MetricKind kind, std::vector<std::vector<double>> coords) {
    if (kind == MetricKind::Explicit) throw PreconditionError("explicit metrics need a table");
    MetricSpace s;
    s.kind_ = kind;
    s.n_ = coords.size();
    s.dim_ = coords.empty() ? 0 : coords[0].size();
    for (const auto& c : coords) {
      if (c.size() != s.dim_) throw PreconditionError("points have different dimensions");
      for (auto v : c)
        if (!std::isfinite(v)) throw PreconditionError("non-finite coordinate");
    }
    s.coords_.reserve(s.n_ * s.dim_);
    for (const auto& c : coords) s.coords_.insert(s.coords_.end(), c.begin(), c.end());
    return s;
  }

  /// Row-major n x n table; validated as a metric (triangle inequality checked
  /// exhaustively up to 600 points, sampled beyond).
  static MetricSpace from_table(std::size_t n, std::vector<double> table) {
    if (table.size() != n * n) throw PreconditionError("distance table has wrong size");
    MetricSpace s;
    s.kind_ = MetricKind::Explicit;
    s.n_ = n;
    s.table_ = std::move(table);
    auto chk = s.check();
    if (!chk.ok()) throw PreconditionError("not a metric: " + *chk.violation);
    return s;
  }

  MetricKind kind() const { return kind_; }
  std::size_t size() const { return n_; }
  std::size_t dim() const { return dim_; }
  const double* coords(std::size_t i) const { return coords_.data() + i * dim_; }

  double distance(std::size_t i, std::size_t j) const {
    if (kind_ == MetricKind::Explicit) return table_[i * n_ + j];
    const double* a = coords(i);
    const double* b = coords(j);
    double acc = 0;
    for (std::size_t k = 0; k < dim_; ++k) {
      double d = kind_ == MetricKind::Torus ? circle_distance(a[k], b[k]) : std::fabs(a[k] - b[k]);
      switch (kind_) {
        case MetricKind::L1: acc += d; break;
        case MetricKind::L2: acc += d * d; break;
        default: acc = std::max(acc, d); break;
      }
    }
    return kind_ == MetricKind::L2 ? std::sqrt(acc) : acc;
  }

  MetricCheck check(std::size_t exhaustive_limit = 600, std::uint64_t samples = 200'000,
                    std::uint64_t seed = 1) const {
    MetricCheck out;
    auto d = [&](std::size_t i, std::size_t j) { return distance(i, j); };
    for (std::size_t i = 0; i < n_; ++i) {
      if (std::fabs(d(i, i)) > kMetricTol) {
        out.violation = "d(" + std::to_string(i) + "," + std::to_string(i) + ") != 0";
        return out;
      }
      for (std::size_t j = i + 1; j < n_; ++j) {
        if (!(d(i, j) > kMetricTol)) {
          out.violation = "distinct points " + std::to_string(i) + "," + std::to_string(j) + " at distance 0";
          return out;
        }
        if (std::fabs(d(i, j) - d(j, i)) > kMetricTol) {
          out.violation = "asymmetric at " + std::to_string(i) + "," + std::to_string(j);
          return out;
        }
      }
    }
    auto tri = [&](std::size_t i, std::size_t j, std::size_t k) {
      ++out.triples;
      if (d(i, k) > d(i, j) + d(j, k) + kMetricTol) {
        out.violation = "triangle inequality fails at " + std::to_string(i) + "," + std::to_string(j) +
                        "," + std::to_string(k);
        return false;
      }
      return true;
    };
    if (n_ <= exhaustive_limit) {
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j)
          for (std::size_t k = 0; k < n_; ++k)
            if (!tri(i, j, k)) return out;
    } else {
      out.exhaustive = false;
      std::mt19937_64 rng(seed);
      for (std::uint64_t t = 0; t < samples; ++t)
        if (!tri(rng() % n_, rng() % n_, rng() % n_)) return out;
    }
    return out;
  }

  /// Closed ball, in index order.
  std::vector<std::size_t> ball(std::size_t x, double r) const {
    std::vector<std::size_t> out;
    for (std::size_t y = 0; y < n_; ++y)
      if (distance(x, y) <= r + kMetricTol) out.push_back(y);
    return out;
  }

 private:
  MetricKind kind_ = MetricKind::L1;
  std::size_t n_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> coords_;
  std::vector<double> table_;
};

// ---------------------------------------------------------------------------
// Doubling

namespace detail {

using Bits = std::vector<std::uint64_t>;

inline std::size_t popcount_and_not(const Bits& a, const Bits& covered) {
  std::size_t c = 0;
  for (std::size_t w = 0; w < a.size(); ++w) c += static_cast<std::size_t>(__builtin_popcountll(a[w] & ~covered[w]));
  return c;
}

/// For each candidate center, the bitset of targets within distance r.
inline std::vector<Bits> coverage_sets(const MetricSpace& s, const std::vector<std::size_t>& targets,
                                       const std::vector<std::size_t>& candidates, double r) {
  const std::size_t words = (targets.size() + 63) / 64;
  std::vector<Bits> out(candidates.size(), Bits(words, 0));
  for (std::size_t c = 0; c < candidates.size(); ++c)
    for (std::size_t t = 0; t < targets.size(); ++t)
      if (s.distance(candidates[c], targets[t]) <= r + kMetricTol) out[c][t / 64] |= 1ULL << (t % 64);
  return out;
}

}  // namespace detail

struct ScaleDoubling {
  double scale = 0;
  std::size_t M = 0;           // max over centers of the greedy cover size
  std::size_t worst_center = 0;
};

struct DoublingEstimate {
  std::vector<ScaleDoubling> scales;
  std::size_t M = 0;
};

/// Greedy upper estimate of the doubling constant: for each scale r and center
/// x, cover the closed ball B_x^{2r} by closed r-balls centred at points of the
/// space, always taking the ball covering most uncovered points.
inline DoublingEstimate doubling_estimate(const MetricSpace& s, const std::vector<double>& scales,
                                          std::optional<std::vector<std::size_t>> centers = std::nullopt) {
  DoublingEstimate out;
  std::vector<std::size_t> xs;
  if (centers) xs = *centers;
  else {
    xs.resize(s.size());
    std::iota(xs.begin(), xs.end(), 0);
  }
  for (double r : scales) {
    if (!(r > 0)) throw PreconditionError("scales must be positive");
    ScaleDoubling sd;
    sd.scale = r;
    for (auto x : xs) {
      auto targets = s.ball(x, 2 * r);
      auto cands = s.ball(x, 3 * r);
      auto cov = detail::coverage_sets(s, targets, cands, r);
      detail::Bits covered((targets.size() + 63) / 64, 0);
      std::size_t left = targets.size(), used = 0;
      while (left > 0) {
        std::size_t best = 0, gain = 0;
        for (std::size_t c = 0; c < cands.size(); ++c) {
          auto g = detail::popcount_and_not(cov[c], covered);
          if (g > gain) {
            gain = g;
            best = c;
          }
        }
        for (std::size_t w = 0; w < covered.size(); ++w) covered[w] |= cov[best][w];
        left -= gain;
        ++used;
      }
      if (used > sd.M) {
        sd.M = used;
        sd.worst_center = x;
      }
    }
    out.M = std::max(out.M, sd.M);
    out.scales.push_back(sd);
  }
  return out;
}

/// Least number of closed r-balls (centred anywhere in the space) covering the
/// closed ball B_x^R. Exact search.
inline std::size_t min_ball_cover(const MetricSpace& s, std::size_t x, double R, double r,
                                  std::vector<std::size_t>* witness = nullptr) {
  auto targets = s.ball(x, R);
  std::vector<std::size_t> cands(s.size());
  std::iota(cands.begin(), cands.end(), 0);
  auto cov = detail::coverage_sets(s, targets, cands, r);
  // Drop candidates that cover nothing.
  std::vector<std::size_t> useful;
  for (std::size_t c = 0; c < cands.size(); ++c)
    if (std::any_of(cov[c].begin(), cov[c].end(), [](auto w) { return w != 0; })) useful.push_back(c);
  const std::size_t words = (targets.size() + 63) / 64;
  std::vector<std::size_t> chosen;
  std::function<bool(detail::Bits&, std::size_t)> search = [&](detail::Bits& covered, std::size_t budget) -> bool {
    std::size_t first = targets.size();
    for (std::size_t t = 0; t < targets.size(); ++t)
      if (!(covered[t / 64] >> (t % 64) & 1ULL)) {
        first = t;
        break;
      }
    if (first == targets.size()) return true;
    if (budget == 0) return false;
    for (auto c : useful) {
      if (!(cov[c][first / 64] >> (first % 64) & 1ULL)) continue;
      detail::Bits next = covered;
      for (std::size_t w = 0; w < words; ++w) next[w] |= cov[c][w];
      chosen.push_back(cands[c]);
      if (search(next, budget - 1)) return true;
      chosen.pop_back();
    }
    return false;
  };
  for (std::size_t k = 1;; ++k) {
    detail::Bits covered(words, 0);
    chosen.clear();
    if (search(covered, k)) {
      if (witness) *witness = chosen;
      return k;
    }
  }
}

// ---------------------------------------------------------------------------
// Decompositions

struct Decomposition {
  double eps = 0;
  double delta = 0;
  std::vector<std::vector<std::vector<std::size_t>>> families;  // family -> set -> points
  std::vector<std::vector<std::size_t>> centers;                 // family -> set -> center (optional)

  std::size_t family_count() const { return families.size(); }
  std::size_t set_count() const {
    std::size_t c = 0;
    for (const auto& f : families) c += f.size();
    return c;
  }
};

struct DecompositionCheck {
  bool covered = true;
  double max_diameter = 0;
  double min_separation = kInfinity;  // over distinct sets in one family
  std::optional<std::string> violation;
  bool ok() const { return !violation; }
};

/// Checks diam(U) < eps for every set and d(U, V) > delta for distinct sets of
/// one family. Pairs whose anchors are far apart are skipped using the bound
/// d(U, V) >= d(a, b) - rad(U) - rad(V).
inline DecompositionCheck validate_decomposition(const MetricSpace& s, const Decomposition& dec) {
  DecompositionCheck out;
  std::vector<char> seen(s.size(), 0);
  for (const auto& fam : dec.families)
    for (const auto& set : fam)
      for (auto p : set) {
        if (p >= s.size()) throw PreconditionError("decomposition point out of range");
        seen[p] = 1;
      }
  for (std::size_t p = 0; p < s.size(); ++p)
    if (!seen[p]) {
      out.covered = false;
      out.violation = "point " + std::to_string(p) + " is not covered";
      return out;
    }
  for (std::size_t f = 0; f < dec.families.size(); ++f) {
    const auto& fam = dec.families[f];
    std::vector<double> radius(fam.size(), 0);
    for (std::size_t u = 0; u < fam.size(); ++u) {
      const auto& set = fam[u];
      if (set.empty()) continue;
      for (std::size_t a = 0; a < set.size(); ++a) {
        radius[u] = std::max(radius[u], s.distance(set[0], set[a]));
        for (std::size_t b = a + 1; b < set.size(); ++b) {
          double d = s.distance(set[a], set[b]);
          out.max_diameter = std::max(out.max_diameter, d);
          if (!(d < dec.eps - kMetricTol) && !out.violation)
            out.violation = "family " + std::to_string(f) + " set " + std::to_string(u) +
                            " has diameter " + std::to_string(d) + " >= eps";
        }
      }
    }
    for (std::size_t u = 0; u < fam.size(); ++u) {
      for (std::size_t v = u + 1; v < fam.size(); ++v) {
        if (fam[u].empty() || fam[v].empty()) continue;
        double lower = s.distance(fam[u][0], fam[v][0]) - radius[u] - radius[v];
        double sep = kInfinity;
        if (lower > dec.delta + kMetricTol && lower >= out.min_separation) {
          continue;
        }
        for (auto a : fam[u])
          for (auto b : fam[v]) sep = std::min(sep, s.distance(a, b));
        out.min_separation = std::min(out.min_separation, sep);
        if (!(sep > dec.delta + kMetricTol) && !out.violation)
          out.violation = "family " + std::to_string(f) + " sets " + std::to_string(u) + "," +
                          std::to_string(v) + " are only " + std::to_string(sep) + " apart";
      }
    }
  }
  return out;
}

struct CantorResult {
  Decomposition dec;
  DecompositionCheck check;
  double rho = 0;                // net radius, below eps / 2
  std::vector<std::size_t> net;  // centers
  BigInt family_bound;           // M^{ceil(2 + log2(k + 3))}
  bool bound_miss = false;
};

inline unsigned cantor_exponent(std::uint64_t k) {
  return static_cast<unsigned>(std::ceil(2.0 + std::log2(static_cast<double>(k + 3)) - 1e-12));
}

/// (K, eps, k eps)-decomposition: a greedy net with radius just below eps/2
/// (preferred points are tried first), each point assigned to its nearest
/// center, and centers within (k + 3) eps of each other sorted into families
/// by greedy coloring.
inline CantorResult cantor_decompose(const MetricSpace& s, double eps, std::uint64_t k, std::uint64_t M,
                                     const std::vector<std::size_t>& preferred = {}) {
  if (!(eps > 0)) throw PreconditionError("eps must be positive");
  if (k < 1) throw PreconditionError("k must be >= 1");
  CantorResult out;
  out.rho = eps / 2 * (1 - 1e-6);
  std::vector<double> nearest(s.size(), kInfinity);
  std::vector<std::size_t> owner(s.size(), SIZE_MAX);
  auto consider = [&](std::size_t x) {
    if (nearest[x] <= out.rho) return;
    auto c = out.net.size();
    out.net.push_back(x);
    for (std::size_t y = 0; y < s.size(); ++y) {
      double d = s.distance(x, y);
      if (d < nearest[y]) {
        nearest[y] = d;
        owner[y] = c;
      }
    }
  };
  for (auto x : preferred) {
    if (x >= s.size()) throw PreconditionError("preferred point out of range");
    consider(x);
  }
  for (std::size_t x = 0; x < s.size(); ++x) consider(x);

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  const double sep = static_cast<double>(k + 3) * eps;
  for (std::size_t a = 0; a < out.net.size(); ++a)
    for (std::size_t b = a + 1; b < out.net.size(); ++b)
      if (s.distance(out.net[a], out.net[b]) <= sep + kMetricTol) pairs.emplace_back(a, b);
  auto rel = Relation::from_pairs(out.net.size(), pairs);
  auto col = greedy_color(rel, rel.max_degree());
  std::vector<std::vector<std::size_t>> members(out.net.size());
  for (std::size_t y = 0; y < s.size(); ++y) members[owner[y]].push_back(y);
  out.dec.eps = eps;
  out.dec.delta = static_cast<double>(k) * eps;
  for (const auto& cls : col.classes) {
    if (cls.empty()) continue;
    out.dec.families.emplace_back();
    out.dec.centers.emplace_back();
    for (auto c : cls) {
      out.dec.families.back().push_back(members[c]);
      out.dec.centers.back().push_back(out.net[c]);
    }
  }
  out.family_bound = boost::multiprecision::pow(BigInt(M), cantor_exponent(k));
  out.bound_miss = BigInt(out.dec.family_count()) > out.family_bound;
  out.check = validate_decomposition(s, out.dec);
  if (!out.check.ok()) throw Error("decomposition failed its own certificate: " + *out.check.violation);
  return out;
}

/// Largest number of sets of the decomposition meeting a closed ball of the
/// given radius.
inline std::size_t max_sets_meeting_ball(const MetricSpace& s, const Decomposition& dec, double radius) {
  std::vector<std::size_t> set_of(s.size(), SIZE_MAX);
  std::vector<std::vector<std::size_t>> sets;
  for (const auto& fam : dec.families)
    for (const auto& set : fam) {
      for (auto p : set) set_of[p] = sets.size();
      sets.push_back(set);
    }
  std::size_t best = 0;
  std::vector<std::size_t> stamp(sets.size(), SIZE_MAX);
  for (std::size_t x = 0; x < s.size(); ++x) {
    std::size_t count = 0;
    for (auto y : s.ball(x, radius)) {
      auto id = set_of[y];
      if (id != SIZE_MAX && stamp[id] != x) {
        stamp[id] = x;
        ++count;
      }
    }
    best = std::max(best, count);
  }
  return best;
}

// ---------------------------------------------------------------------------
// A Cantor set with infinite doubling dimension, truncated.

struct SequenceSpace {
  MetricSpace space;
  std::vector<std::vector<int>> sequences;  // a_n in 1..n
};

/// Sequences (a_1, ..., a_depth) with a_n in {1..n} and
/// d(a, b) = sum |a_n - b_n| / (n 2^n).
inline SequenceSpace pathological_cantor(int depth, std::size_t cap = 5040) {
  if (depth < 2) throw PreconditionError("depth must be >= 2");
  std::size_t n = 1;
  for (int i = 1; i <= depth; ++i) {
    n *= static_cast<std::size_t>(i);
    if (n > cap) throw ResourceCapError("truncation has more than " + std::to_string(cap) + " points");
  }
  std::vector<std::vector<int>> seqs{{}};
  for (int i = 1; i <= depth; ++i) {
    std::vector<std::vector<int>> next;
    for (const auto& s : seqs)
      for (int a = 1; a <= i; ++a) {
        auto t = s;
        t.push_back(a);
        next.push_back(std::move(t));
      }
    seqs = std::move(next);
  }
  std::vector<double> table(n * n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double d = 0;
      for (int k = 1; k <= depth; ++k)
        d += std::abs(seqs[i][static_cast<std::size_t>(k - 1)] - seqs[j][static_cast<std::size_t>(k - 1)]) /
             (static_cast<double>(k) * std::ldexp(1.0, k));
      table[i * n + j] = d;
    }
  // The formula is an l1 sum of metrics, so the triangle check is skipped for
  // large truncations by sampling inside from_table.
  return SequenceSpace{MetricSpace::from_table(n, std::move(table)), std::move(seqs)};
}

}  // namespace dad

#pragma once

// Translation actions of Z^d on tori, their finite approximating systems, the
// piece systems built on a Cantor-like decomposition, and the end-to-end
// experiment that assembles a certified cover of the approximating system.
//
// Angles are in turns. A rotation p/q moves every point by p/q; the torus
// action moves axis i by p_i/q_i. The approximating set E is the grid of
// points j/q, on which the action is exact.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dad/cover_engine.hpp"
#include "dad/io.hpp"
#include "dad/metric.hpp"
#include "dad/partial_system.hpp"

namespace dad {

struct ActionSpec {
  enum class Kind { Rotation, Torus, Cyclic };
  Kind kind = Kind::Rotation;
  std::vector<std::int64_t> p;  // per axis, reduced
  std::vector<std::int64_t> q;

  int dim() const { return static_cast<int>(q.size()); }

  std::string str() const {
    std::string s = kind == Kind::Rotation ? "rot:" : kind == Kind::Torus ? "torus:" : "cyclic:";
    if (kind == Kind::Cyclic) return s + std::to_string(q[0]);
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(p[i]) + "/" + std::to_string(q[i]);
    }
    return s;
  }

  /// Least word length of a nontrivial element acting trivially on the circle
  /// factor(s): the action of Z^d factors through prod Z/q_i.
  std::int64_t first_relation() const { return *std::min_element(q.begin(), q.end()); }
};

inline ActionSpec parse_action(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos) throw PreconditionError("action must look like rot:p/q, torus:p/q,p/q or cyclic:n");
  std::string kind = text.substr(0, colon);
  std::string rest = text.substr(colon + 1);
  ActionSpec a;
  auto fraction = [&](const std::string& f) {
    auto slash = f.find('/');
    if (slash == std::string::npos) throw PreconditionError("expected p/q, got '" + f + "'");
    std::int64_t p = 0, q = 0;
    try {
      p = std::stoll(f.substr(0, slash));
      q = std::stoll(f.substr(slash + 1));
    } catch (...) {
      throw PreconditionError("expected p/q, got '" + f + "'");
    }
    if (q < 1) throw PreconditionError("denominator must be >= 1");
    auto g = std::gcd(p, q);
    p /= g;
    q /= g;
    a.p.push_back(((p % q) + q) % q);
    a.q.push_back(q);
  };
  if (kind == "rot") {
    a.kind = ActionSpec::Kind::Rotation;
    fraction(rest);
  } else if (kind == "torus") {
    a.kind = ActionSpec::Kind::Torus;
    std::stringstream ss(rest);
    std::string part;
    while (std::getline(ss, part, ',')) fraction(part);
    if (a.q.size() < 2) throw PreconditionError("torus action needs at least two axes");
  } else if (kind == "cyclic") {
    a.kind = ActionSpec::Kind::Cyclic;
    std::int64_t n = 0;
    try {
      n = std::stoll(rest);
    } catch (...) {
      throw PreconditionError("expected cyclic:n");
    }
    if (n < 1) throw PreconditionError("cyclic order must be >= 1");
    a.p = {1};
    a.q = {n};
  } else {
    throw PreconditionError("unknown action kind '" + kind + "'");
  }
  return a;
}

struct ActionCheck {
  ActionSpec spec;
  std::int64_t horizon = 0;
  std::int64_t first_relation = 0;
  double isometry_defect = 0;  // max |d(gx, gy) - d(x, y)| on samples
};

/// Accepts the action only if it is free up to the horizon, i.e. no word of
/// length <= horizon acts trivially.
inline ActionCheck build_action(const ActionSpec& spec, std::int64_t horizon) {
  ActionCheck out{spec, horizon, spec.first_relation(), 0};
  if (spec.kind != ActionSpec::Kind::Cyclic && out.first_relation <= horizon)
    throw PreconditionError("action is not free up to the horizon: " + std::to_string(out.first_relation) +
                            " steps along an axis return every point to itself");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> x(spec.q.size()), y(spec.q.size()), gx(x.size()), gy(x.size());
    double dxy = 0, dg = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = u(rng);
      y[i] = u(rng);
      double shift = static_cast<double>(spec.p[i]) / static_cast<double>(spec.q[i]);
      gx[i] = std::fmod(x[i] + shift, 1.0);
      gy[i] = std::fmod(y[i] + shift, 1.0);
      dxy = std::max(dxy, circle_distance(x[i], y[i]));
      dg = std::max(dg, circle_distance(gx[i], gy[i]));
    }
    out.isometry_defect = std::max(out.isometry_defect, std::fabs(dxy - dg));
  }
  return out;
}

struct Approximation {
  ActionSpec spec;
  TranslationSystem translation;  // Z^d acting on prod Z/q_i; point j has angle j/q
  std::int64_t F_scale = 1;
  double eps = 0;
  double spacing = 0;               // max_i 1/q_i
  double equivariance_error = 0;    // max over E and B^F_scale, in turns
  const PartialSystem& system() const { return translation.system; }
};

/// The grid E = prod {j/q_i} with the restricted action. Equivariance is checked
/// exactly on integer coordinates for every word of length <= F_scale.
inline Approximation approximate_action(const ActionSpec& spec, std::int64_t F_scale, double eps) {
  const int d = spec.dim();
  for (auto q : spec.q)
    if (!(1.0 / static_cast<double>(q) < eps))
      throw PreconditionError("cannot achieve eps = " + std::to_string(eps) + " with denominator " +
                              std::to_string(q) + "; need denominators above " + std::to_string(1.0 / eps));
  std::vector<Element> images;
  for (int i = 0; i < d; ++i) {
    Element e(static_cast<std::size_t>(d), 0);
    e[static_cast<std::size_t>(i)] = spec.p[static_cast<std::size_t>(i)];
    images.push_back(e);
  }
  Approximation out{spec, translation_system(GroupModel::free_abelian(d), spec.q, images), F_scale, eps, 0, 0};
  for (auto q : spec.q) out.spacing = std::max(out.spacing, 1.0 / static_cast<double>(q));
  auto ball = word_ball(GroupModel::free_abelian(d), static_cast<int>(F_scale));
  const auto& G = out.system().group();
  for (Point e = 0; e < out.system().size(); ++e) {
    auto c = out.translation.coords(e);
    for (const auto& g : ball.elements) {
      // theta_g(e) by composing generator steps along a geodesic word.
      Point y = e;
      Element rest = g;
      for (std::size_t i = 0; i < rest.size(); ++i) {
        while (rest[i] != 0) {
          Element step(rest.size(), 0);
          step[i] = rest[i] > 0 ? 1 : -1;
          y = *out.system().apply(*G.generator_index(step), y);
          rest[i] -= step[i];
        }
      }
      auto got = out.translation.coords(y);
      for (std::size_t i = 0; i < c.size(); ++i) {
        auto q = spec.q[i];
        auto want = (((c[i] + g[i] * spec.p[i]) % q) + q) % q;
        double err = circle_distance(static_cast<double>(got[i]) / static_cast<double>(q),
                                     static_cast<double>(want) / static_cast<double>(q));
        out.equivariance_error = std::max(out.equivariance_error, err);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fine sample of X containing E

struct FineSample {
  MetricSpace space;
  std::int64_t refine = 1;
  std::vector<std::int64_t> dims;     // s q_i
  std::vector<std::size_t> e_to_fine;
  std::vector<std::int64_t> fine_to_e;  // -1 off E

  Element coords(std::size_t f) const {
    Element c(dims.size());
    for (std::size_t i = 0; i < dims.size(); ++i) {
      c[i] = static_cast<std::int64_t>(f % static_cast<std::size_t>(dims[i]));
      f /= static_cast<std::size_t>(dims[i]);
    }
    return c;
  }
  std::size_t index(const Element& c) const {
    std::size_t f = 0, mul = 1;
    for (std::size_t i = 0; i < dims.size(); ++i) {
      auto v = ((c[i] % dims[i]) + dims[i]) % dims[i];
      f += static_cast<std::size_t>(v) * mul;
      mul *= static_cast<std::size_t>(dims[i]);
    }
    return f;
  }
  /// Exact image of a fine point under g in Z^d.
  std::size_t translate(std::size_t f, const Element& g, const ActionSpec& spec) const {
    auto c = coords(f);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += g[i] * spec.p[i] * refine;
    return index(c);
  }
  double resolution() const {
    double r = 0;
    for (auto n : dims) r = std::max(r, 1.0 / static_cast<double>(n));
    return r;
  }
};

inline std::int64_t default_refine(const ActionSpec& spec) {
  switch (spec.kind) {
    case ActionSpec::Kind::Rotation: return 8;
    case ActionSpec::Kind::Torus: return 9;
    case ActionSpec::Kind::Cyclic: return 1;
  }
  return 1;
}

inline FineSample fine_sample(const Approximation& approx, std::int64_t refine) {
  if (refine < 1) throw PreconditionError("refinement must be >= 1");
  FineSample fs{MetricSpace{}, refine, {}, {}, {}};
  std::size_t n = 1;
  for (auto q : approx.spec.q) {
    fs.dims.push_back(q * refine);
    n *= static_cast<std::size_t>(q * refine);
    if (n > point_cap_from_env()) throw ResourceCapError("fine sample too large");
  }
  std::vector<std::vector<double>> pts(n, std::vector<double>(fs.dims.size()));
  for (std::size_t f = 0; f < n; ++f) {
    auto c = fs.coords(f);
    for (std::size_t i = 0; i < c.size(); ++i) pts[f][i] = static_cast<double>(c[i]) / static_cast<double>(fs.dims[i]);
  }
  fs.space = MetricSpace::from_coords(MetricKind::Torus, std::move(pts));
  fs.fine_to_e.assign(n, kUndefined);
  for (Point e = 0; e < approx.system().size(); ++e) {
    auto c = approx.translation.coords(e);
    for (auto& v : c) v *= refine;
    auto f = fs.index(c);
    fs.e_to_fine.push_back(f);
    fs.fine_to_e[f] = static_cast<std::int64_t>(e);
  }
  return fs;
}

// ---------------------------------------------------------------------------
// Piece systems

struct PieceSystem {
  std::vector<std::vector<std::size_t>> pieces;   // fine indices
  PartialSystem system{GroupModel::free_abelian(1), 0};
  std::vector<std::vector<Point>> e_points;        // E ∩ U (approximating ids)
  std::size_t strays = 0;                          // approximating points placed off E
  std::vector<std::string> condition_i;            // sampled violations
  std::optional<FreenessWitness> condition_ii;
  ValidationReport validation;
};

struct PieceSystems {
  std::int64_t r = 1;
  std::int64_t P = 1;
  double eps = 0;
  double eps0_margin = 0;  // min over nonzero h in B^{2(P+1)r} of |h v|
  double resolution = 0;   // fine sample spacing used for condition (i)
  std::vector<PieceSystem> families;
};

/// Every nonzero h with |h| <= 2(P+1)r must move points by at least eps.
inline double eps0_margin(const ActionSpec& spec, std::int64_t r, std::int64_t P, double eps) {
  auto ball = word_ball(GroupModel::free_abelian(spec.dim()), static_cast<int>(2 * (P + 1) * r));
  double best = kInfinity;
  for (const auto& h : ball.elements) {
    if (std::all_of(h.begin(), h.end(), [](auto v) { return v == 0; })) continue;
    double m = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      auto q = spec.q[i];
      auto num = (((h[i] * spec.p[i]) % q) + q) % q;
      m = std::max(m, circle_distance(0, static_cast<double>(num) / static_cast<double>(q)));
    }
    if (m < eps - kMetricTol) {
      std::string hs;
      for (std::size_t i = 0; i < h.size(); ++i) hs += (i ? "," : "") + std::to_string(h[i]);
      throw PreconditionError("eps is above eps0: translation by (" + hs + ") moves points only " +
                              std::to_string(m));
    }
    best = std::min(best, m);
  }
  return best;
}

/// Builds one partial system per family of the decomposition. Piece U carries
/// the approximating points within it; approximating points near but off the
/// family are reassigned to unused sample points of the nearest piece; maps
/// descend from the action on E, and theta_g(U) is kept only where g U meets
/// the image piece.
inline PieceSystems build_piece_systems(const Approximation& approx, const FineSample& fine,
                                        const Decomposition& dec, std::int64_t r, std::int64_t P) {
  const auto& spec = approx.spec;
  const double eps = dec.eps;
  PieceSystems out;
  out.r = r;
  out.P = P;
  out.eps = eps;
  out.resolution = fine.resolution();
  const bool discrete = fine.refine == 1;
  if (!discrete) out.eps0_margin = eps0_margin(spec, r, P, eps);
  const int d = spec.dim();
  const GroupModel group = GroupModel::free_abelian(d).power(static_cast<int>(r));
  const auto& letters = group.generators();
  const auto n_fine = fine.space.size();

  for (const auto& fam : dec.families) {
    PieceSystem ps;
    ps.pieces = fam;
    std::vector<std::int64_t> piece_of(n_fine, kUndefined);
    for (std::size_t u = 0; u < fam.size(); ++u)
      for (auto f : fam[u]) piece_of[f] = static_cast<std::int64_t>(u);
    ps.e_points.assign(fam.size(), {});
    // x~ for every approximating point of the family's 2 eps neighbourhood.
    std::map<Point, std::size_t> tilde;  // approximating id -> fine index
    std::vector<char> used(n_fine, 0);
    for (std::size_t u = 0; u < fam.size(); ++u)
      for (auto f : fam[u])
        if (fine.fine_to_e[f] != kUndefined) {
          auto e = static_cast<Point>(fine.fine_to_e[f]);
          ps.e_points[u].push_back(e);
          tilde[e] = f;
          used[f] = 1;
        }
    if (!discrete) {
      // Approximating points within 2 eps of the family but outside it.
      std::vector<Point> strays;
      {
        std::vector<char> mark(approx.system().size(), 0);
        for (const auto& set : fam)
          for (auto f : set) {
            auto c = fine.coords(f);
            std::vector<std::int64_t> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
            for (std::size_t i = 0; i < static_cast<std::size_t>(d); ++i) {
              auto rad = static_cast<std::int64_t>(std::ceil(2 * eps * static_cast<double>(fine.dims[i])));
              lo[i] = static_cast<std::int64_t>(std::floor(static_cast<double>(c[i] - rad) / static_cast<double>(fine.refine)));
              hi[i] = static_cast<std::int64_t>(std::ceil(static_cast<double>(c[i] + rad) / static_cast<double>(fine.refine)));
            }
            Element j = lo;
            for (;;) {
              Element ec(static_cast<std::size_t>(d));
              for (std::size_t i = 0; i < ec.size(); ++i) ec[i] = j[i] * fine.refine;
              auto g = fine.index(ec);
              auto e = static_cast<Point>(fine.fine_to_e[g]);
              if (!mark[e] && piece_of[g] == kUndefined && fine.space.distance(g, f) < 2 * eps) {
                mark[e] = 1;
                strays.push_back(e);
              }
              std::size_t i = 0;
              for (; i < j.size(); ++i) {
                if (++j[i] <= hi[i]) break;
                j[i] = lo[i];
              }
              if (i == j.size()) break;
            }
          }
      }
      std::sort(strays.begin(), strays.end());
      for (auto e : strays) {
        auto fe = fine.e_to_fine[e];
        double best = kInfinity;
        std::size_t arg = SIZE_MAX;
        for (const auto& set : fam)
          for (auto f : set) {
            if (used[f]) continue;
            double dist = fine.space.distance(fe, f);
            if (dist < best - kMetricTol || (std::fabs(dist - best) <= kMetricTol && f < arg)) {
              best = dist;
              arg = f;
            }
          }
        if (arg == SIZE_MAX || !(best < 3 * eps))
          throw PreconditionError("sample too coarse: no unused sample point within 3 eps of approximating point " +
                                  std::to_string(e));
        used[arg] = 1;
        tilde[e] = arg;
        ++ps.strays;
      }
    }
    for (std::size_t u = 0; u < fam.size(); ++u)
      if (ps.e_points[u].empty() &&
          std::none_of(tilde.begin(), tilde.end(), [&](const auto& kv) { return piece_of[kv.second] == static_cast<std::int64_t>(u); }))
        throw PreconditionError("piece without an approximating point");

    PartialSystem sys(group, fam.size());
    for (std::size_t s = 1; s < letters.size(); ++s) {
      const auto& g = letters[s];
      std::vector<std::int64_t> image(fam.size(), kUndefined);
      for (const auto& [e, f] : tilde) {
        // alpha_g(x~_e) = x~_{g e} when g e is also an approximating point of the family.
        Point ge = e;
        {
          auto c = approx.translation.coords(e);
          for (std::size_t i = 0; i < c.size(); ++i) c[i] += g[i] * spec.p[i];
          ge = approx.translation.id(c);
        }
        auto it = tilde.find(ge);
        if (it == tilde.end()) continue;
        auto U = piece_of[f];
        auto V = piece_of[it->second];
        auto& slot = image[static_cast<std::size_t>(U)];
        if (slot != kUndefined && slot != V)
          throw Error("descent is not well defined for " + group.format(g) + " on piece " + std::to_string(U));
        slot = V;
      }
      for (std::size_t u = 0; u < fam.size(); ++u) {
        if (image[u] == kUndefined) continue;
        auto V = static_cast<std::size_t>(image[u]);
        // Keep theta_g(U) = V only when g U meets V on the sample.
        bool meets = std::any_of(fam[u].begin(), fam[u].end(), [&](std::size_t f) {
          return piece_of[fine.translate(f, g, spec)] == static_cast<std::int64_t>(V);
        });
        if (meets) sys.set(s, u, V);
      }
    }
    for (std::size_t s = 1; s < letters.size(); ++s) {
      std::vector<char> hit(fam.size(), 0);
      for (std::size_t u = 0; u < fam.size(); ++u)
        if (auto v = sys.apply(s, u)) {
          if (hit[*v]) throw Error("descended map " + group.format(letters[s]) + " is not injective");
          hit[*v] = 1;
        }
    }
    // Condition (i) on the sample: g U meets V implies theta_g(U) = V.
    for (std::size_t s = 1; s < letters.size(); ++s)
      for (std::size_t u = 0; u < fam.size(); ++u)
        for (auto f : fam[u]) {
          auto v = piece_of[fine.translate(f, letters[s], spec)];
          if (v == kUndefined) continue;
          auto got = sys.apply(s, u);
          if (!got || *got != static_cast<std::size_t>(v)) {
            ps.condition_i.push_back("piece " + std::to_string(u) + " meets piece " + std::to_string(v) +
                                     " under " + group.format(letters[s]));
            break;
          }
        }
    const auto horizon = std::max<std::int64_t>(P + 1, static_cast<std::int64_t>(fam.size()));
    ps.validation = validate_axioms(sys, horizon);
    if (!ps.validation.ok()) throw Error("piece system fails the axioms: " + ps.validation.violations[0].detail);
    ps.condition_ii = local_freeness(sys, P + 1);
    ps.system = std::move(sys);
    out.families.push_back(std::move(ps));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lebesgue-number restriction of an outer cover of X to a piece system

struct LebesgueResult {
  double lambda = 0;
  double threshold = 0;  // lambda / (3 (D + 1))
  std::vector<std::size_t> assignment;  // piece -> outer set
  Cover cover;
  CoverCheck check;
};

/// The outer cover is given by sample sets V_m. Each piece goes to the V_m
/// whose complement is farthest from it.
inline LebesgueResult lebesgue_restrict(const MetricSpace& sample, const std::vector<std::vector<std::size_t>>& outer,
                                        const PieceSystem& ps, std::uint64_t D, double eps) {
  const auto n = sample.size();
  std::vector<std::vector<double>> to_comp(outer.size(), std::vector<double>(n, kInfinity));
  for (std::size_t m = 0; m < outer.size(); ++m) {
    std::vector<char> in(n, 0);
    for (auto x : outer[m]) in[x] = 1;
    for (std::size_t x = 0; x < n; ++x) {
      if (!in[x]) {
        to_comp[m][x] = 0;
        continue;
      }
      for (std::size_t y = 0; y < n; ++y)
        if (!in[y]) to_comp[m][x] = std::min(to_comp[m][x], sample.distance(x, y));
    }
  }
  LebesgueResult out;
  out.lambda = kInfinity;
  for (std::size_t x = 0; x < n; ++x) {
    double best = 0;
    for (std::size_t m = 0; m < outer.size(); ++m) best = std::max(best, to_comp[m][x]);
    out.lambda = std::min(out.lambda, best);
  }
  out.threshold = out.lambda / (3.0 * static_cast<double>(D + 1));
  if (!(eps < out.threshold))
    throw PreconditionError("eps must be below lambda / (3 (D + 1)) = " + std::to_string(out.threshold));
  out.cover.ground = all_points(ps.system);
  out.cover.families.assign(outer.size(), {});
  for (std::size_t u = 0; u < ps.pieces.size(); ++u) {
    std::size_t arg = 0;
    double best = -1;
    for (std::size_t m = 0; m < outer.size(); ++m) {
      double depth = kInfinity;
      for (auto f : ps.pieces[u]) depth = std::min(depth, to_comp[m][f]);
      if (depth > best) {
        best = depth;
        arg = m;
      }
    }
    if (!(best > 0)) throw Error("piece " + std::to_string(u) + " lies in no outer set");
    out.assignment.push_back(arg);
    out.cover.families[arg].push_back({u});
  }
  out.check = check_cover(ps.system, out.cover, 1, Bound(D));
  return out;
}

// ---------------------------------------------------------------------------
// End-to-end experiment

struct PipelineOptions {
  std::string action = "rot:13/89";
  std::int64_t r = 1;
  double eps = 0.02;
  std::uint64_t k = 15;
  std::int64_t P = 6;
  std::uint64_t seed = 1;
  std::optional<std::int64_t> refine;
};

struct Stage {
  std::string name;
  double seconds = 0;
  std::vector<std::pair<std::string, std::string>> fields;
};

struct LowerBound {
  std::string kind;       // "connectivity+brute" etc
  std::size_t largest_component = 0;
  std::vector<Point> window;
  std::int64_t r = 1;
  int dim = 0;
  std::uint64_t M = 0;
  bool exists = true;     // brute force result; false certifies the bound
};

struct PipelineReport {
  PipelineOptions options;
  std::vector<Stage> stages;
  Cover cover;
  CoverCheck check;
  Schedule schedule;
  std::size_t families = 0;
  LowerBound lower;
  bool certified = false;
};

namespace detail {

template <class T>
std::string num(const T& v) {
  if constexpr (std::is_floating_point_v<T>) {
    return std::isfinite(v) ? format_fixed(v) : (v > 0 ? "inf" : "-inf");
  } else {
    std::ostringstream os;
    os << v;
    return os.str();
  }
}

}  // namespace detail

inline PipelineReport pipeline_experiment(const PipelineOptions& opt) {
  using clock = std::chrono::steady_clock;
  PipelineReport rep;
  rep.options = opt;
  auto t0 = clock::now();
  auto stage = [&](const std::string& name) -> Stage& {
    auto now = clock::now();
    if (!rep.stages.empty()) rep.stages.back().seconds = std::chrono::duration<double>(now - t0).count();
    t0 = now;
    rep.stages.push_back(Stage{name, 0, {}});
    return rep.stages.back();
  };
  auto finish = [&] {
    rep.stages.back().seconds = std::chrono::duration<double>(clock::now() - t0).count();
  };

  auto spec = parse_action(opt.action);
  const int d = spec.dim();
  {
    auto& s = stage("action");
    auto chk = build_action(spec, 2 * (opt.P + 1) * opt.r);
    s.fields = {{"action", spec.str()},
                {"acting group", GroupModel::free_abelian(d).spec()},
                {"first relation", detail::num(chk.first_relation)},
                {"isometry defect", detail::num(chk.isometry_defect)}};
  }
  auto& s_approx = stage("approximation");
  auto approx = approximate_action(spec, opt.r, opt.eps);
  s_approx.fields = {{"points", detail::num(approx.system().size())},
                     {"spacing", detail::num(approx.spacing)},
                     {"equivariance error", detail::num(approx.equivariance_error)}};

  auto& s_dec = stage("decomposition");
  auto fine = fine_sample(approx, opt.refine.value_or(default_refine(spec)));
  MetricSpace e_space = [&] {
    std::vector<std::vector<double>> pts;
    for (Point e = 0; e < approx.system().size(); ++e) {
      const double* c = fine.space.coords(fine.e_to_fine[e]);
      pts.emplace_back(c, c + d);
    }
    return MetricSpace::from_coords(MetricKind::Torus, std::move(pts));
  }();
  std::vector<std::size_t> doubling_centers;
  for (std::size_t e = 0; e < e_space.size(); e += std::max<std::size_t>(1, e_space.size() / 64))
    doubling_centers.push_back(e);
  auto doubling = doubling_estimate(e_space, {opt.eps, 2 * opt.eps}, doubling_centers);
  auto cantor = cantor_decompose(fine.space, opt.eps, opt.k, doubling.M, fine.e_to_fine);
  s_dec.fields = {{"sample points", detail::num(fine.space.size())},
                  {"doubling M (greedy)", detail::num(doubling.M)},
                  {"families", detail::num(cantor.dec.family_count())},
                  {"sets", detail::num(cantor.dec.set_count())},
                  {"max diameter", detail::num(cantor.check.max_diameter)},
                  {"min separation", detail::num(cantor.check.min_separation)},
                  {"family bound", cantor.family_bound.str()},
                  {"bound miss", cantor.bound_miss ? "yes" : "no"}};

  auto& s_pieces = stage("piece systems");
  auto pieces = build_piece_systems(approx, fine, cantor.dec, opt.r, opt.P);
  std::size_t cond_i = 0, cond_ii = 0, strays = 0, maps = 0;
  for (const auto& ps : pieces.families) {
    cond_i += ps.condition_i.size();
    cond_ii += ps.condition_ii ? 1 : 0;
    strays += ps.strays;
    for (std::size_t s = 1; s < ps.system.generator_count(); ++s)
      for (Point u = 0; u < ps.system.size(); ++u) maps += ps.system.apply(s, u) ? 1 : 0;
  }
  s_pieces.fields = {{"families", detail::num(pieces.families.size())},
                     {"eps0 margin", detail::num(pieces.eps0_margin)},
                     {"sample resolution", detail::num(pieces.resolution)},
                     {"reassigned points", detail::num(strays)},
                     {"defined map entries", detail::num(maps)},
                     {"condition (i) violations", detail::num(cond_i)},
                     {"condition (ii) violations", detail::num(cond_ii)}};

  // Covers of each piece system, lifted to the approximating points.
  auto& s_local = stage("piece covers");
  const GroupModel piece_group = GroupModel::free_abelian(d).power(static_cast<int>(opt.r));
  auto group_fit = growth_profile(piece_group, 8).fit;
  if (!group_fit) throw Error("acting group has no polynomial fit");
  std::vector<Cover> lifted;
  std::vector<Bound> lifted_bound;
  std::size_t max_refined_families = 0;
  for (const auto& ps : pieces.families) {
    auto f = brick_control(ps.system.group(), d);
    auto res = refine_with_poly_outer(ps.system, *group_fit, 1, f, brick_provider(d));
    if (!res.refined.result.check.ok()) throw Error("piece cover failed: " + res.refined.result.check.violation->describe());
    max_refined_families = std::max(max_refined_families, res.refined.result.cover.family_count());
    Cover c;
    std::size_t max_e = 1;
    for (const auto& ep : ps.e_points) {
      c.ground.insert(c.ground.end(), ep.begin(), ep.end());
      max_e = std::max(max_e, ep.size());
    }
    c.families.assign(static_cast<std::size_t>(d) + 1, {});
    for (std::size_t j = 0; j < res.refined.result.cover.families.size(); ++j)
      for (const auto& set : res.refined.result.cover.families[j]) {
        std::vector<Point> pts;
        for (auto u : set) pts.insert(pts.end(), ps.e_points[u].begin(), ps.e_points[u].end());
        c.families[j].push_back(std::move(pts));
      }
    c.normalize();
    lifted.push_back(std::move(c));
    lifted_bound.push_back(res.refined.schedule.final_bound() * Bound(static_cast<std::uint64_t>(max_e)));
  }
  std::size_t lifted_ok = 0;
  for (std::size_t i = 0; i < lifted.size(); ++i)
    if (check_cover(approx.system(), lifted[i], opt.r, lifted_bound[i]).ok()) ++lifted_ok;
  s_local.fields = {{"piece systems covered", detail::num(pieces.families.size())},
                    {"max families per piece cover", detail::num(max_refined_families)},
                    {"lifted covers certified", detail::num(lifted_ok) + "/" + detail::num(lifted.size())}};

  // Union over families of the decomposition.
  auto& s_union = stage("union");
  std::vector<std::size_t> nonempty;
  for (std::size_t i = 0; i < lifted.size(); ++i)
    if (!lifted[i].ground.empty()) nonempty.push_back(i);
  const auto& sysE = approx.system();
  auto transport_f = brick_control(sysE.group(), d);
  auto [sched, tables] = tabulate_schedule(
      [&](std::size_t i, const Bound& s) { return i == 0 ? lifted_bound[nonempty[0]] : transport_f(s); },
      nonempty.size() - 1, Bound(static_cast<std::uint64_t>(opt.r)), sysE.group());
  std::vector<Cover> union_pieces;
  for (std::size_t i = 0; i < nonempty.size(); ++i) {
    if (i == 0) {
      union_pieces.push_back(lifted[nonempty[0]]);
      continue;
    }
    auto cap = static_cast<std::uint64_t>(sysE.size() + 1);
    auto rho = static_cast<std::int64_t>(std::min<std::uint64_t>(sched.r[i].clamp_u64(), cap));
    union_pieces.push_back(
        transport_cover(zd_brick_cover(d, rho), sysE, lifted[nonempty[i]].ground, false).cover);
  }
  auto uni = union_covers(sysE, union_pieces, opt.r, sched);
  rep.cover = uni.cover;
  rep.check = uni.check;
  rep.schedule = sched;
  rep.families = uni.cover.family_count();
  rep.certified = uni.check.ok() && uni.cover.ground.size() == sysE.size();
  s_union.fields = {{"pieces", detail::num(nonempty.size())},
                    {"R_0", sched.R.front().str()},
                    {"R_K", sched.final_bound().str()},
                    {"families", detail::num(rep.families)},
                    {"observed max component", detail::num(uni.check.max_component)},
                    {"covers all points", uni.cover.ground.size() == sysE.size() ? "yes" : "no"},
                    {"certified", rep.certified ? "yes" : "no"}};

  // Lower bound at dimension d - 1 on a small window.
  auto& s_lower = stage("lower bound");
  {
    auto comps = s_components(sysE, all_points(sysE), opt.r);
    rep.lower.largest_component = comps.max_size();
    const auto& G = sysE.group();
    auto step = [&](Point x, std::size_t axis) {
      Element e(static_cast<std::size_t>(d), 0);
      e[axis] = 1;
      return *sysE.apply(*G.generator_index(e), x);
    };
    if (d == 1) {
      Point x = 0;
      for (int j = 0; j < 12; ++j) {
        rep.lower.window.push_back(x);
        x = step(x, 0);
      }
      rep.lower.r = 1;
      rep.lower.M = 11;
    } else {
      Point row = 0;
      for (int a = 0; a < 3; ++a) {
        Point x = row;
        for (int b = 0; b < 3; ++b) {
          rep.lower.window.push_back(x);
          for (std::size_t axis = 1; axis < static_cast<std::size_t>(d); ++axis) x = step(x, axis);
        }
        row = step(row, 0);
      }
      rep.lower.r = 2;
      rep.lower.M = 2;
    }
    rep.lower.dim = d - 1;
    auto sub = restrict_system(sysE, rep.lower.window);
    auto bf = brute_min_cover(sub.system, rep.lower.r, rep.lower.dim, rep.lower.M);
    rep.lower.exists = bf.exists;
    rep.lower.kind = "restricted window";
    s_lower.fields = {{"largest F^r component of all points", detail::num(rep.lower.largest_component)},
                      {"window points", detail::num(rep.lower.window.size())},
                      {"scale", detail::num(rep.lower.r)},
                      {"dimension tested", detail::num(rep.lower.dim)},
                      {"bound", detail::num(rep.lower.M)},
                      {"cover exists", bf.exists ? "yes" : "no"},
                      {"search nodes", detail::num(bf.nodes)}};
  }
  finish();
  return rep;
}

/// One block per stage, a summary, then a tab-separated table of every field.
/// With timing off the text is a pure function of the options.
inline std::string format_report(const PipelineReport& rep, bool timing = true) {
  std::ostringstream os;
  os << "pipeline " << rep.options.action << " r=" << rep.options.r << " eps=" << format_fixed(rep.options.eps)
     << " k=" << rep.options.k << " P=" << rep.options.P << " seed=" << rep.options.seed << "\n";
  for (const auto& s : rep.stages) {
    os << "\n[" << s.name << "]";
    if (timing) os << "  " << format_fixed(s.seconds) << " s";
    os << "\n";
    for (const auto& [k, v] : s.fields) os << "  " << k << ": " << v << "\n";
  }
  os << "\nsummary\n";
  os << "  families           " << rep.families << "\n";
  os << "  certified bound    " << rep.schedule.final_bound().str() << "\n";
  os << "  observed component " << rep.check.max_component << "\n";
  os << "  lower bound        no (" << rep.lower.dim << ", F^" << rep.lower.r << ", " << rep.lower.M
     << ") cover of window: " << (rep.lower.exists ? "FALSE" : "confirmed") << "\n";
  os << "  status             " << (rep.certified ? "certified" : "NOT certified") << "\n";
  os << "\ntable\nstage\tkey\tvalue\n";
  for (const auto& s : rep.stages) {
    if (timing) os << s.name << "\tseconds\t" << format_fixed(s.seconds) << "\n";
    for (const auto& [k, v] : s.fields) os << s.name << "\t" << k << "\t" << v << "\n";
  }
  return os.str();
}

}  // namespace dad

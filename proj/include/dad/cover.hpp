#pragma once

// Covers of subsets of a partial system by families of sets, and the
// component scanner that certifies (d, F^r, M) bounds.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dad/bound.hpp"
#include "dad/error.hpp"
#include "dad/partial_system.hpp"

namespace dad {

struct Cover {
  std::vector<Point> ground;                            // sorted
  std::vector<std::vector<std::vector<Point>>> families; // family -> sets -> points

  std::size_t family_count() const { return families.size(); }
  std::size_t nonempty_families() const {
    return static_cast<std::size_t>(std::count_if(families.begin(), families.end(), [](const auto& f) {
      return std::any_of(f.begin(), f.end(), [](const auto& s) { return !s.empty(); });
    }));
  }

  std::vector<Point> family_union(std::size_t i) const {
    std::vector<Point> u;
    for (const auto& s : families[i]) u.insert(u.end(), s.begin(), s.end());
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    return u;
  }

  /// Sorts points in sets, drops empty sets, orders sets by least point.
  void normalize() {
    std::sort(ground.begin(), ground.end());
    ground.erase(std::unique(ground.begin(), ground.end()), ground.end());
    for (auto& fam : families) {
      for (auto& s : fam) {
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
      }
      fam.erase(std::remove_if(fam.begin(), fam.end(), [](const auto& s) { return s.empty(); }),
                fam.end());
      std::sort(fam.begin(), fam.end());
    }
  }
};

struct CoverViolation {
  enum class Kind { Uncovered, Outside, Oversized };
  Kind kind;
  Point point = 0;           // uncovered / outside point, or least point of component
  std::size_t family = 0;
  std::vector<Point> component;

  std::string describe() const {
    switch (kind) {
      case Kind::Uncovered:
        return "point " + std::to_string(point) + " is not covered";
      case Kind::Outside:
        return "point " + std::to_string(point) + " of family " + std::to_string(family) +
               " lies outside the ground set";
      case Kind::Oversized:
        return "family " + std::to_string(family) + " has a component of size " +
               std::to_string(component.size()) + " starting at point " + std::to_string(point);
    }
    return {};
  }
};

struct CoverCheck {
  std::int64_t scale = 0;
  Bound bound;
  std::vector<std::uint64_t> max_per_family;
  std::uint64_t max_component = 0;
  std::optional<CoverViolation> violation;

  bool ok() const { return !violation.has_value(); }
};

/// Certifies that the cover covers its ground set and that every F^r-component
/// of every family has at most M points. The first violation found (in
/// family order, components by least element) is reported.
inline CoverCheck check_cover(const PartialSystem& sys, const Cover& cover, std::int64_t r,
                              const Bound& M) {
  CoverCheck out;
  out.scale = r;
  out.bound = M;
  std::vector<char> in_ground(sys.size(), 0), covered(sys.size(), 0);
  for (auto p : cover.ground) {
    if (p >= sys.size()) throw PreconditionError("ground point out of range");
    in_ground[p] = 1;
  }
  for (std::size_t f = 0; f < cover.families.size(); ++f) {
    for (const auto& s : cover.families[f]) {
      for (auto p : s) {
        if (p >= sys.size()) throw PreconditionError("cover point out of range");
        if (!in_ground[p] && !out.violation)
          out.violation = CoverViolation{CoverViolation::Kind::Outside, p, f, {}};
        covered[p] = 1;
      }
    }
  }
  if (!out.violation) {
    for (auto p : cover.ground) {
      if (!covered[p]) {
        out.violation = CoverViolation{CoverViolation::Kind::Uncovered, p, 0, {}};
        break;
      }
    }
  }
  for (std::size_t f = 0; f < cover.families.size(); ++f) {
    auto comps = s_components(sys, cover.family_union(f), r);
    std::uint64_t m = comps.max_size();
    out.max_per_family.push_back(m);
    out.max_component = std::max(out.max_component, m);
    if (!out.violation) {
      for (auto& c : comps.classes) {
        if (!M.admits(BigInt(c.size()))) {
          out.violation = CoverViolation{CoverViolation::Kind::Oversized, c.front(), f, c};
          break;
        }
      }
    }
  }
  return out;
}

}  // namespace dad

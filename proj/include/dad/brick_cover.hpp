#pragma once

// Axis-aligned brick covers of the Cayley graph of Z^d witnessing
// asdim Z^d <= d.
//
// Family j (0 <= j <= d) is the grid of cubes of side L shifted by j*t in
// every coordinate, each cube eroded by a margin m = r. A coordinate x_i is
// "bad" for family j when (x_i - j t) mod L lies within m of a grid line;
// the bad windows of different families are disjoint when t = 2m, so the d
// coordinates of a point rule out at most d families and one always remains.
// Distinct eroded cubes of one family are at l1 distance >= 2m > r, hence
// every r-component is a single eroded cube.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <vector>

#include "dad/bound.hpp"
#include "dad/error.hpp"
#include "dad/group.hpp"

namespace dad {

struct BrickCover {
  int dim = 1;
  std::int64_t scale = 1;   // r
  std::int64_t side = 4;    // L = 2 r (d + 1)
  std::int64_t margin = 1;  // m = r
  std::int64_t shift = 2;   // t = 2 r

  int families() const { return dim + 1; }

  /// Certified diameter bound M(r) = d * L for r-components of each family.
  std::int64_t diameter_bound() const { return dim * side; }

  bool in_family(const Element& g, int j) const {
    for (auto x : g) {
      auto res = ((x - j * shift) % side + side) % side;
      if (res < margin || res >= side - margin) return false;
    }
    return true;
  }

  /// First family containing g.
  int family_of(const Element& g) const {
    for (int j = 0; j < families(); ++j) {
      if (in_family(g, j)) return j;
    }
    throw Error("brick cover does not cover point");  // unreachable by construction
  }

  /// Index of the eroded cube of family j containing g.
  Element brick_of(const Element& g, int j) const {
    Element id(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      auto y = g[i] - j * shift;
      id[i] = (y >= 0 ? y : y - side + 1) / side;
    }
    return id;
  }
};

inline BrickCover zd_brick_cover(int d, std::int64_t r) {
  if (d < 0) throw PreconditionError("dimension must be >= 0");
  if (r < 1) throw PreconditionError("brick cover scale must be >= 1");
  // Keep every coordinate computation inside 64 bits.
  if (r > (std::int64_t{1} << 40)) throw ResourceCapError("brick cover scale too large");
  BrickCover c;
  c.dim = d;
  c.scale = r;
  c.margin = r;
  c.shift = 2 * r;
  c.side = 2 * r * (d + 1);
  return c;
}

/// Result of scanning a finite window of Z^d.
struct BrickWindowCheck {
  bool covered = true;
  std::vector<std::int64_t> max_component_diameter;  // per family, l1
  bool within_bound = true;
};

/// Independent scan: for every family, r-components of the family inside the
/// window [0, width)^d are found by union-find over all pairs within l1
/// distance r, and their l1 diameters measured directly.
inline BrickWindowCheck scan_brick_window(const BrickCover& cover, std::int64_t width) {
  const int d = cover.dim;
  std::vector<Element> pts;
  {
    Element cur(static_cast<std::size_t>(d), 0);
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(width);
    if (total > kDefaultElementCap) throw ResourceCapError("window too large");
    for (std::size_t k = 0; k < total; ++k) {
      std::size_t rem = k;
      for (int i = 0; i < d; ++i) {
        cur[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(rem % static_cast<std::size_t>(width));
        rem /= static_cast<std::size_t>(width);
      }
      pts.push_back(cur);
    }
  }
  auto index_of = [&](const Element& g) -> std::int64_t {
    std::int64_t idx = 0;
    std::int64_t mul = 1;
    for (int i = 0; i < d; ++i) {
      auto v = g[static_cast<std::size_t>(i)];
      if (v < 0 || v >= width) return -1;
      idx += v * mul;
      mul *= width;
    }
    return idx;
  };
  // Offsets of the l1 ball of radius r.
  auto offsets = word_ball(GroupModel::free_abelian(d), static_cast<int>(cover.scale)).elements;

  BrickWindowCheck out;
  out.max_component_diameter.assign(static_cast<std::size_t>(cover.families()), 0);
  std::vector<char> any(pts.size(), 0);
  for (int j = 0; j < cover.families(); ++j) {
    std::vector<char> in(pts.size(), 0);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      in[k] = cover.in_family(pts[k], j) ? 1 : 0;
      any[k] |= in[k];
    }
    std::vector<std::size_t> parent(pts.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (!in[k]) continue;
      for (const auto& off : offsets) {
        Element q = pts[k];
        for (int i = 0; i < d; ++i) q[static_cast<std::size_t>(i)] += off[static_cast<std::size_t>(i)];
        auto idx = index_of(q);
        if (idx < 0 || !in[static_cast<std::size_t>(idx)]) continue;
        parent[find(k)] = find(static_cast<std::size_t>(idx));
      }
    }
    // l1 diameter = max over sign vectors s of (max - min) of <s, x>.
    std::map<std::size_t, std::vector<std::pair<std::int64_t, std::int64_t>>> ext;
    const std::size_t signs = std::size_t{1} << static_cast<unsigned>(std::max(d - 1, 0));
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (!in[k]) continue;
      auto& e = ext[find(k)];
      if (e.empty()) e.assign(signs, {INT64_MAX, INT64_MIN});
      for (std::size_t s = 0; s < signs; ++s) {
        std::int64_t dot = d > 0 ? pts[k][0] : 0;
        for (int i = 1; i < d; ++i) {
          auto v = pts[k][static_cast<std::size_t>(i)];
          dot += ((s >> (i - 1)) & 1u) ? -v : v;
        }
        e[s].first = std::min(e[s].first, dot);
        e[s].second = std::max(e[s].second, dot);
      }
    }
    for (auto& [root, e] : ext) {
      for (auto& [lo, hi] : e) {
        auto& m = out.max_component_diameter[static_cast<std::size_t>(j)];
        m = std::max(m, hi - lo);
      }
    }
    if (out.max_component_diameter[static_cast<std::size_t>(j)] > cover.diameter_bound())
      out.within_bound = false;
  }
  out.covered = std::all_of(any.begin(), any.end(), [](char c) { return c != 0; });
  return out;
}

}  // namespace dad

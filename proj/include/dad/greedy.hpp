#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dad/error.hpp"

namespace dad {

/// Symmetric relation on items 0..n-1 without self-loops.
struct Relation {
  std::size_t n = 0;
  std::vector<std::vector<std::size_t>> adj;  // sorted

  static Relation from_pairs(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
    Relation r;
    r.n = n;
    r.adj.assign(n, {});
    for (auto [a, b] : pairs) {
      if (a >= n || b >= n) throw PreconditionError("relation item out of range");
      if (a == b) continue;
      r.adj[a].push_back(b);
      r.adj[b].push_back(a);
    }
    for (auto& v : r.adj) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    return r;
  }

  std::size_t degree(std::size_t i) const { return adj[i].size(); }
  std::size_t max_degree() const {
    std::size_t m = 0;
    for (const auto& v : adj) m = std::max(m, v.size());
    return m;
  }
};

class DegreeError : public PreconditionError {
 public:
  DegreeError(std::size_t item, std::size_t degree, std::size_t D)
      : PreconditionError("degree exceeds " + std::to_string(D) + ": item " + std::to_string(item) +
                          " has " + std::to_string(degree) + " related items"),
        item_(item),
        degree_(degree) {}
  std::size_t item() const { return item_; }
  std::size_t degree() const { return degree_; }

 private:
  std::size_t item_;
  std::size_t degree_;
};

struct Coloring {
  std::vector<std::size_t> color;                  // item -> class
  std::vector<std::vector<std::size_t>> classes;   // exactly D + 1 classes
};

/// Sorts items into D + 1 classes of pairwise unrelated items: items are taken
/// in index order and each gets the least class not used by an earlier
/// related item.
inline Coloring greedy_color(const Relation& rel, std::size_t D) {
  for (std::size_t i = 0; i < rel.n; ++i)
    if (rel.degree(i) > D) throw DegreeError(i, rel.degree(i), D);
  Coloring c;
  c.color.assign(rel.n, SIZE_MAX);
  c.classes.assign(D + 1, {});
  std::vector<char> used(D + 2, 0);
  for (std::size_t i = 0; i < rel.n; ++i) {
    for (auto j : rel.adj[i])
      if (c.color[j] != SIZE_MAX) used[c.color[j]] = 1;
    std::size_t k = 0;
    while (used[k]) ++k;
    c.color[i] = k;
    c.classes[k].push_back(i);
    for (auto j : rel.adj[i])
      if (c.color[j] != SIZE_MAX) used[c.color[j]] = 0;
  }
  return c;
}

}  // namespace dad

#pragma once

// Line-oriented text formats. Blank lines and lines starting with '#' are
// ignored everywhere. Output is canonical: generators in model order, map
// entries by source point, doubles in shortest round-trip form.
//
// System:
//   points N
//   group <spec>
//   horizon L | inf
//   gen <element> <src> <dst>        (one line per defined non-identity entry)
//
// Cover:
//   ground <points>                  (optional; defaults to the union of sets)
//   families K
//   family i set j: <points>         (sets of a family numbered 0, 1, ...)
//   scale r / bound M|inf            (optional certificate metadata)
//
// Metric space:
//   metric l1|l2|linf|torus          then  point i c_1 ... c_n
//   metric explicit                  then  points N and dist i j v for i < j
//
// Decomposition:
//   decomposition eps <v> delta <v>
//   families K
//   family i set j: <points>
//
// Relation:
//   items N
//   rel a b

#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dad/cover.hpp"
#include "dad/error.hpp"
#include "dad/greedy.hpp"
#include "dad/metric.hpp"
#include "dad/partial_system.hpp"

namespace dad {

inline std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw Error("cannot format number");
  return std::string(buf, p);
}

inline std::string format_fixed(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 9);
  if (ec != std::errc{}) throw Error("cannot format number");
  return std::string(buf, p);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PreconditionError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PreconditionError("cannot write " + path);
  out << text;
}

namespace detail {

struct Line {
  std::size_t number;
  std::vector<std::string> tokens;
  std::string rest;  // text after ':' if present
  bool has_colon = false;
};

inline std::vector<Line> lex(std::string_view text) {
  std::vector<Line> out;
  std::size_t number = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    auto first = raw.find_first_not_of(" \t");
    if (first == std::string_view::npos || raw[first] == '#') continue;
    Line line{number, {}, {}, false};
    std::string_view head = raw;
    if (auto colon = raw.find(':'); colon != std::string_view::npos) {
      line.has_colon = true;
      line.rest = std::string(raw.substr(colon + 1));
      head = raw.substr(0, colon);
    }
    std::istringstream ss{std::string(head)};
    std::string tok;
    while (ss >> tok) line.tokens.push_back(tok);
    if (line.tokens.empty()) line.tokens.push_back(":");
    out.push_back(std::move(line));
  }
  return out;
}

inline std::uint64_t to_u64(const Line& l, const std::string& s) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw ParseError(l.number, "expected a non-negative integer, got '" + s + "'");
  return v;
}

inline double to_double(const Line& l, const std::string& s) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v))
    throw ParseError(l.number, "expected a number, got '" + s + "'");
  return v;
}

inline Bound to_bound(const Line& l, const std::string& s) {
  if (s == "inf") return Bound::saturated();
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
    throw ParseError(l.number, "expected a bound, got '" + s + "'");
  return Bound(BigInt(s));
}

inline std::vector<Point> point_list(const Line& l, const std::string& text, std::size_t limit) {
  std::vector<Point> pts;
  std::istringstream ss(text);
  std::string tok;
  while (ss >> tok) {
    auto v = to_u64(l, tok);
    if (v >= limit) throw ParseError(l.number, "point " + tok + " out of range");
    pts.push_back(v);
  }
  return pts;
}

inline std::string join(const std::vector<Point>& pts) {
  std::string s;
  for (auto p : pts) s += " " + std::to_string(p);
  return s;
}

inline void expect_args(const Line& l, std::size_t n) {
  if (l.tokens.size() != n) throw ParseError(l.number, "'" + l.tokens[0] + "' takes " + std::to_string(n - 1) + " argument(s)");
}

// "family i set j: pts" lines shared by covers and decompositions.
inline void family_line(const Line& l, std::vector<std::vector<std::vector<Point>>>& families,
                        std::size_t limit) {
  if (l.tokens.size() != 4 || l.tokens[2] != "set" || !l.has_colon)
    throw ParseError(l.number, "expected 'family <i> set <j>: <points>'");
  auto i = to_u64(l, l.tokens[1]);
  auto j = to_u64(l, l.tokens[3]);
  if (i >= families.size()) throw ParseError(l.number, "family " + l.tokens[1] + " exceeds the declared count");
  if (j != families[i].size())
    throw ParseError(l.number, "family " + l.tokens[1] + " expects set " + std::to_string(families[i].size()) + " next");
  families[i].push_back(point_list(l, l.rest, limit));
}

inline void family_lines(std::ostringstream& os, const std::vector<std::vector<std::vector<Point>>>& families) {
  os << "families " << families.size() << "\n";
  for (std::size_t i = 0; i < families.size(); ++i)
    for (std::size_t j = 0; j < families[i].size(); ++j)
      os << "family " << i << " set " << j << ":" << join(families[i][j]) << "\n";
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Systems

inline std::string serialize_system(const PartialSystem& sys) {
  std::ostringstream os;
  os << "points " << sys.size() << "\n";
  os << "group " << sys.group().spec() << "\n";
  os << "horizon " << (sys.horizon_unbounded() ? std::string("inf") : std::to_string(sys.horizon())) << "\n";
  const auto& G = sys.group();
  for (std::size_t s = 1; s < sys.generator_count(); ++s) {
    auto label = G.format(G.generators()[s]);
    for (Point x = 0; x < sys.size(); ++x)
      if (auto y = sys.apply(s, x)) os << "gen " << label << " " << x << " " << *y << "\n";
  }
  return os.str();
}

/// Entries must come in inverse pairs: gen s x y requires gen s^-1 y x.
inline PartialSystem parse_system(std::string_view text) {
  auto lines = detail::lex(text);
  std::optional<std::size_t> n;
  std::optional<GroupModel> group;
  std::optional<std::int64_t> horizon;
  std::optional<PartialSystem> sys;
  std::map<std::pair<std::size_t, Point>, std::size_t> entry_line;
  std::size_t last = 0;
  for (const auto& l : lines) {
    last = l.number;
    const auto& key = l.tokens[0];
    if (key == "points") {
      detail::expect_args(l, 2);
      if (n) throw ParseError(l.number, "duplicate 'points'");
      n = detail::to_u64(l, l.tokens[1]);
    } else if (key == "group") {
      if (group) throw ParseError(l.number, "duplicate 'group'");
      std::string spec;
      for (std::size_t i = 1; i < l.tokens.size(); ++i) spec += (i > 1 ? " " : "") + l.tokens[i];
      try {
        group = parse_group(spec);
      } catch (const Error& e) {
        throw ParseError(l.number, e.what());
      }
    } else if (key == "horizon") {
      detail::expect_args(l, 2);
      if (horizon) throw ParseError(l.number, "duplicate 'horizon'");
      horizon = l.tokens[1] == "inf" ? kUnboundedHorizon : static_cast<std::int64_t>(detail::to_u64(l, l.tokens[1]));
    } else if (key == "gen") {
      detail::expect_args(l, 4);
      if (!n || !group) throw ParseError(l.number, "'gen' before 'points' and 'group'");
      if (!sys) sys.emplace(*group, *n);
      Element g;
      try {
        g = group->parse_element(l.tokens[1]);
      } catch (const Error& e) {
        throw ParseError(l.number, e.what());
      }
      auto s = group->generator_index(g);
      if (!s) throw ParseError(l.number, "'" + l.tokens[1] + "' is not a generator of " + group->spec());
      if (*s == 0) throw ParseError(l.number, "identity entries are implicit");
      auto x = detail::to_u64(l, l.tokens[2]);
      auto y = detail::to_u64(l, l.tokens[3]);
      if (x >= *n || y >= *n) throw ParseError(l.number, "point out of range");
      if (!entry_line.emplace(std::pair{*s, x}, l.number).second || sys->apply(*s, x))
        throw ParseError(l.number, "duplicate entry for " + l.tokens[1] + " at point " + l.tokens[2] +
                                       " (first at line " + std::to_string(entry_line[{*s, x}]) + ")");
      sys->set(*s, x, y);
    } else {
      throw ParseError(l.number, "unknown directive '" + key + "'");
    }
  }
  if (!n) throw ParseError(last + 1, "missing 'points'");
  if (!group) throw ParseError(last + 1, "missing 'group'");
  if (!sys) sys.emplace(*group, *n);
  for (std::size_t s = 1; s < sys->generator_count(); ++s) {
    auto inv = group->inverse_generator(s);
    for (Point x = 0; x < *n; ++x) {
      auto y = sys->apply(s, x);
      if (!y) continue;
      auto back = sys->apply(inv, *y);
      if (!back || *back != x)
        throw ParseError(entry_line[{s, x}], "generator set is not symmetric: no inverse entry " +
                                                 group->format(group->generators()[inv]) + " " +
                                                 std::to_string(*y) + " " + std::to_string(x));
    }
  }
  sys->set_horizon(horizon.value_or(0));
  return std::move(*sys);
}

inline bool same_system(const PartialSystem& a, const PartialSystem& b) {
  if (!(a.group() == b.group()) || a.size() != b.size() || a.horizon() != b.horizon()) return false;
  for (std::size_t s = 0; s < a.generator_count(); ++s)
    for (Point x = 0; x < a.size(); ++x)
      if (a.raw(s, x) != b.raw(s, x)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Covers

struct CoverFile {
  Cover cover;
  std::optional<std::int64_t> scale;
  std::optional<Bound> bound;
};

inline std::string serialize_cover(const Cover& c, std::optional<std::int64_t> scale = std::nullopt,
                                   std::optional<Bound> bound = std::nullopt) {
  std::ostringstream os;
  if (scale) os << "scale " << *scale << "\n";
  if (bound) os << "bound " << (bound->is_saturated() ? std::string("inf") : bound->str()) << "\n";
  os << "ground" << detail::join(c.ground) << "\n";
  detail::family_lines(os, c.families);
  return os.str();
}

inline CoverFile parse_cover(std::string_view text, std::size_t limit = SIZE_MAX) {
  CoverFile out;
  bool have_families = false, have_ground = false;
  for (const auto& l : detail::lex(text)) {
    const auto& key = l.tokens[0];
    if (key == "ground") {
      if (have_ground) throw ParseError(l.number, "duplicate 'ground'");
      have_ground = true;
      std::string rest;
      for (std::size_t i = 1; i < l.tokens.size(); ++i) rest += " " + l.tokens[i];
      out.cover.ground = detail::point_list(l, rest, limit);
      if (!std::is_sorted(out.cover.ground.begin(), out.cover.ground.end()) ||
          std::adjacent_find(out.cover.ground.begin(), out.cover.ground.end()) != out.cover.ground.end())
        throw ParseError(l.number, "ground points must be strictly increasing");
    } else if (key == "families") {
      detail::expect_args(l, 2);
      if (have_families) throw ParseError(l.number, "duplicate 'families'");
      have_families = true;
      out.cover.families.assign(detail::to_u64(l, l.tokens[1]), {});
    } else if (key == "family") {
      if (!have_families) throw ParseError(l.number, "'family' before 'families'");
      detail::family_line(l, out.cover.families, limit);
    } else if (key == "scale") {
      detail::expect_args(l, 2);
      out.scale = static_cast<std::int64_t>(detail::to_u64(l, l.tokens[1]));
    } else if (key == "bound") {
      detail::expect_args(l, 2);
      out.bound = detail::to_bound(l, l.tokens[1]);
    } else {
      throw ParseError(l.number, "unknown directive '" + key + "'");
    }
  }
  if (!have_families) throw ParseError(1, "missing 'families'");
  if (!have_ground) {
    for (std::size_t i = 0; i < out.cover.families.size(); ++i) {
      auto u = out.cover.family_union(i);
      out.cover.ground.insert(out.cover.ground.end(), u.begin(), u.end());
    }
    std::sort(out.cover.ground.begin(), out.cover.ground.end());
    out.cover.ground.erase(std::unique(out.cover.ground.begin(), out.cover.ground.end()), out.cover.ground.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Metric spaces

inline std::string serialize_space(const MetricSpace& s) {
  std::ostringstream os;
  os << "metric " << metric_name(s.kind()) << "\n";
  if (s.kind() == MetricKind::Explicit) {
    os << "points " << s.size() << "\n";
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = i + 1; j < s.size(); ++j) os << "dist " << i << " " << j << " " << format_double(s.distance(i, j)) << "\n";
  } else {
    for (std::size_t i = 0; i < s.size(); ++i) {
      os << "point " << i;
      for (std::size_t k = 0; k < s.dim(); ++k) os << " " << format_double(s.coords(i)[k]);
      os << "\n";
    }
  }
  return os.str();
}

inline MetricSpace parse_space(std::string_view text) {
  auto lines = detail::lex(text);
  if (lines.empty() || lines[0].tokens[0] != "metric" || lines[0].tokens.size() != 2)
    throw ParseError(lines.empty() ? 1 : lines[0].number, "expected 'metric <kind>' first");
  MetricKind kind;
  try {
    kind = parse_metric_kind(lines[0].tokens[1]);
  } catch (const Error& e) {
    throw ParseError(lines[0].number, e.what());
  }
  if (kind == MetricKind::Explicit) {
    std::optional<std::size_t> n;
    std::vector<double> table;
    std::vector<char> seen;
    for (std::size_t k = 1; k < lines.size(); ++k) {
      const auto& l = lines[k];
      if (l.tokens[0] == "points") {
        detail::expect_args(l, 2);
        if (n) throw ParseError(l.number, "duplicate 'points'");
        n = detail::to_u64(l, l.tokens[1]);
        table.assign(*n * *n, 0);
        seen.assign(*n * *n, 0);
      } else if (l.tokens[0] == "dist") {
        detail::expect_args(l, 4);
        if (!n) throw ParseError(l.number, "'dist' before 'points'");
        auto i = detail::to_u64(l, l.tokens[1]);
        auto j = detail::to_u64(l, l.tokens[2]);
        if (i >= *n || j >= *n || i >= j) throw ParseError(l.number, "need 0 <= i < j < points");
        if (seen[i * *n + j]) throw ParseError(l.number, "duplicate distance");
        seen[i * *n + j] = 1;
        table[i * *n + j] = table[j * *n + i] = detail::to_double(l, l.tokens[3]);
      } else {
        throw ParseError(l.number, "unknown directive '" + l.tokens[0] + "'");
      }
    }
    if (!n) throw ParseError(1, "missing 'points'");
    for (std::size_t i = 0; i < *n; ++i)
      for (std::size_t j = i + 1; j < *n; ++j)
        if (!seen[i * *n + j]) throw ParseError(lines.back().number, "missing distance " + std::to_string(i) + " " + std::to_string(j));
    try {
      return MetricSpace::from_table(*n, std::move(table));
    } catch (const PreconditionError& e) {
      throw ParseError(lines.back().number, e.what());
    }
  }
  std::vector<std::vector<double>> pts;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& l = lines[k];
    if (l.tokens[0] != "point" || l.tokens.size() < 3) throw ParseError(l.number, "expected 'point <id> <coords>'");
    if (detail::to_u64(l, l.tokens[1]) != pts.size()) throw ParseError(l.number, "points must be numbered 0, 1, ... in order");
    std::vector<double> c;
    for (std::size_t i = 2; i < l.tokens.size(); ++i) c.push_back(detail::to_double(l, l.tokens[i]));
    if (!pts.empty() && c.size() != pts[0].size()) throw ParseError(l.number, "dimension differs from point 0");
    pts.push_back(std::move(c));
  }
  return MetricSpace::from_coords(kind, std::move(pts));
}

inline bool same_space(const MetricSpace& a, const MetricSpace& b) {
  if (a.kind() != b.kind() || a.size() != b.size() || a.dim() != b.dim()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.kind() == MetricKind::Explicit) {
      for (std::size_t j = 0; j < a.size(); ++j)
        if (a.distance(i, j) != b.distance(i, j)) return false;
    } else {
      for (std::size_t k = 0; k < a.dim(); ++k)
        if (a.coords(i)[k] != b.coords(i)[k]) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Decompositions and relations

inline std::string serialize_decomposition(const Decomposition& d) {
  std::ostringstream os;
  os << "decomposition eps " << format_double(d.eps) << " delta " << format_double(d.delta) << "\n";
  detail::family_lines(os, d.families);
  return os.str();
}

inline Decomposition parse_decomposition(std::string_view text, std::size_t limit = SIZE_MAX) {
  auto lines = detail::lex(text);
  if (lines.empty() || lines[0].tokens.size() != 5 || lines[0].tokens[0] != "decomposition" ||
      lines[0].tokens[1] != "eps" || lines[0].tokens[3] != "delta")
    throw ParseError(lines.empty() ? 1 : lines[0].number, "expected 'decomposition eps <v> delta <v>' first");
  Decomposition d;
  d.eps = detail::to_double(lines[0], lines[0].tokens[2]);
  d.delta = detail::to_double(lines[0], lines[0].tokens[4]);
  bool have_families = false;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& l = lines[k];
    if (l.tokens[0] == "families") {
      detail::expect_args(l, 2);
      if (have_families) throw ParseError(l.number, "duplicate 'families'");
      have_families = true;
      d.families.assign(detail::to_u64(l, l.tokens[1]), {});
    } else if (l.tokens[0] == "family") {
      if (!have_families) throw ParseError(l.number, "'family' before 'families'");
      detail::family_line(l, d.families, limit);
    } else {
      throw ParseError(l.number, "unknown directive '" + l.tokens[0] + "'");
    }
  }
  if (!have_families) throw ParseError(lines.back().number + 1, "missing 'families'");
  return d;
}

inline std::string serialize_relation(const Relation& r) {
  std::ostringstream os;
  os << "items " << r.n << "\n";
  for (std::size_t a = 0; a < r.n; ++a)
    for (auto b : r.adj[a])
      if (a < b) os << "rel " << a << " " << b << "\n";
  return os.str();
}

inline Relation parse_relation(std::string_view text) {
  std::optional<std::size_t> n;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::size_t last = 0;
  for (const auto& l : detail::lex(text)) {
    last = l.number;
    if (l.tokens[0] == "items") {
      detail::expect_args(l, 2);
      if (n) throw ParseError(l.number, "duplicate 'items'");
      n = detail::to_u64(l, l.tokens[1]);
    } else if (l.tokens[0] == "rel") {
      detail::expect_args(l, 3);
      if (!n) throw ParseError(l.number, "'rel' before 'items'");
      auto a = detail::to_u64(l, l.tokens[1]);
      auto b = detail::to_u64(l, l.tokens[2]);
      if (a >= *n || b >= *n) throw ParseError(l.number, "item out of range");
      pairs.emplace_back(a, b);
    } else {
      throw ParseError(l.number, "unknown directive '" + l.tokens[0] + "'");
    }
  }
  if (!n) throw ParseError(last + 1, "missing 'items'");
  return Relation::from_pairs(*n, pairs);
}

}  // namespace dad

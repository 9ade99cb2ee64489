#pragma once

// Concrete finitely generated groups with canonical elements, word metric
// and ball enumeration.
//
// Two families are modelled:
//   * finitely generated abelian groups Z^a x Z/n_1 x ... (one modulus per
//     factor, 0 meaning an infinite cyclic factor), elements are coordinate
//     vectors with finite coordinates reduced to [0, n);
//   * free groups F_k, elements are freely reduced words stored as signed
//     letters (+i for the i-th generator, -i for its inverse, i >= 1).
// A model can be "powered": GroupModel::power(r) keeps the group but uses
// F^r = B_e^r as generating set.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <deque>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dad/bound.hpp"
#include "dad/error.hpp"

namespace dad {

using Element = std::vector<std::int64_t>;

struct ElementHash {
  std::size_t operator()(const Element& e) const noexcept {
    std::size_t h = 0x9e3779b97f4a7c15ull ^ e.size();
    for (auto v : e) {
      h ^= std::hash<std::int64_t>{}(v) + 0x9e3779b97f4a7c15ull + (h << 6) +
           (h >> 2);
    }
    return h;
  }
};

template <typename T>
using ElementMap = std::unordered_map<Element, T, ElementHash>;
using ElementSet = std::unordered_set<Element, ElementHash>;

/// Default cap on the number of elements any enumeration may produce.
inline constexpr std::size_t kDefaultElementCap = 1'000'000;

inline std::size_t element_cap_from_env() {
  if (const char* v = std::getenv("DAD_MAX_BALL")) {
    std::size_t out = 0;
    auto [p, ec] = std::from_chars(v, v + std::char_traits<char>::length(v), out);
    if (ec == std::errc{} && out > 0) return out;
  }
  return kDefaultElementCap;
}

class GroupModel {
 public:
  enum class Kind { Abelian, Free };

  static GroupModel abelian(std::vector<std::int64_t> moduli) {
    for (auto m : moduli) {
      if (m < 0) throw PreconditionError("negative modulus");
    }
    GroupModel g;
    g.kind_ = Kind::Abelian;
    g.moduli_ = std::move(moduli);
    g.build_generators();
    return g;
  }
  static GroupModel free_abelian(int rank) {
    if (rank < 0) throw PreconditionError("rank must be nonnegative");
    return abelian(std::vector<std::int64_t>(static_cast<std::size_t>(rank), 0));
  }
  static GroupModel cyclic(std::int64_t n) {
    if (n < 1) throw PreconditionError("cyclic order must be >= 1");
    return abelian({n});
  }
  static GroupModel free_group(int rank) {
    if (rank < 1) throw PreconditionError("free group rank must be >= 1");
    GroupModel g;
    g.kind_ = Kind::Free;
    g.free_rank_ = rank;
    g.build_generators();
    return g;
  }
  static GroupModel product(const GroupModel& a, const GroupModel& b) {
    if (a.kind_ != Kind::Abelian || b.kind_ != Kind::Abelian)
      throw PreconditionError("direct products are supported for abelian models");
    if (a.power_ != 1 || b.power_ != 1)
      throw PreconditionError("direct products of powered models");
    auto m = a.moduli_;
    m.insert(m.end(), b.moduli_.begin(), b.moduli_.end());
    return abelian(std::move(m));
  }

  /// Same group, generating set replaced by F^r (all words of length <= r).
  GroupModel power(int r) const {
    if (r < 1) throw PreconditionError("power must be >= 1");
    GroupModel g = base();
    g.power_ = power_ * r;
    g.build_generators();
    return g;
  }

  /// The unpowered model.
  GroupModel base() const {
    GroupModel g = *this;
    g.power_ = 1;
    g.build_generators();
    return g;
  }

  Kind kind() const { return kind_; }
  int power() const { return power_; }
  const std::vector<std::int64_t>& moduli() const { return moduli_; }
  int free_rank() const { return free_rank_; }

  /// Number of infinite cyclic factors; asdim of an abelian model.
  int abelian_rank() const {
    return static_cast<int>(std::count(moduli_.begin(), moduli_.end(), 0));
  }

  bool is_finite() const {
    return kind_ == Kind::Abelian && abelian_rank() == 0;
  }

  // Group order for finite models.
  std::uint64_t order() const {
    std::uint64_t o = 1;
    for (auto m : moduli_) o *= static_cast<std::uint64_t>(m);
    return o;
  }

  Element identity() const {
    return kind_ == Kind::Abelian ? Element(moduli_.size(), 0) : Element{};
  }

  Element canonical(Element e) const {
    if (kind_ == Kind::Abelian) {
      if (e.size() != moduli_.size()) throw PreconditionError("element arity");
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (moduli_[i] > 0) e[i] = ((e[i] % moduli_[i]) + moduli_[i]) % moduli_[i];
      }
      return e;
    }
    Element out;
    for (auto l : e) {
      if (l == 0 || std::llabs(l) > free_rank_) throw PreconditionError("bad letter");
      if (!out.empty() && out.back() == -l) {
        out.pop_back();
      } else {
        out.push_back(l);
      }
    }
    return out;
  }

  Element multiply(const Element& a, const Element& b) const {
    if (kind_ == Kind::Abelian) {
      Element out(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
      return canonical(std::move(out));
    }
    Element out = a;
    for (auto l : b) {
      if (!out.empty() && out.back() == -l) {
        out.pop_back();
      } else {
        out.push_back(l);
      }
    }
    return out;
  }

  Element inverse(const Element& a) const {
    if (kind_ == Kind::Abelian) {
      Element out(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) out[i] = -a[i];
      return canonical(std::move(out));
    }
    Element out(a.rbegin(), a.rend());
    for (auto& l : out) l = -l;
    return out;
  }

  bool is_identity(const Element& a) const { return a == identity(); }

  /// Symmetric generating set in canonical order; the identity comes first.
  const std::vector<Element>& generators() const { return generators_; }

  /// Index of a generator, if the element is one.
  std::optional<std::size_t> generator_index(const Element& g) const {
    auto it = generator_index_.find(g);
    if (it == generator_index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t inverse_generator(std::size_t i) const { return inverse_gen_[i]; }

  /// Word length of g with respect to the unpowered standard generators.
  /// Closed form; the enumeration in word_length() is the independent route.
  std::uint64_t base_length(const Element& g) const {
    if (kind_ == Kind::Free) return g.size();
    std::uint64_t len = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      auto m = moduli_[i];
      auto v = g[i];
      len += static_cast<std::uint64_t>(m == 0 ? std::llabs(v) : std::min(v, m - v));
    }
    return len;
  }

  /// Canonical text spec, e.g. "Z^2", "Z/12 x Z/12", "F_2", "Z^1 ^3".
  std::string spec() const {
    std::string s;
    if (kind_ == Kind::Free) {
      s = "F_" + std::to_string(free_rank_);
    } else if (moduli_.empty()) {
      s = "Z^0";
    } else if (abelian_rank() == static_cast<int>(moduli_.size())) {
      s = "Z^" + std::to_string(moduli_.size());
    } else {
      for (std::size_t i = 0; i < moduli_.size(); ++i) {
        if (i) s += " x ";
        s += moduli_[i] == 0 ? "Z" : "Z/" + std::to_string(moduli_[i]);
      }
    }
    if (power_ != 1) s += " ^" + std::to_string(power_);
    return s;
  }

  /// Element text: "e" for the identity; abelian rank-one models print a
  /// signed integer ("+1", "-3"); other abelian models print "(a,b,...)" with
  /// finite coordinates in symmetric range; free words print letters, lower
  /// case for generators and upper case for inverses ("aB").
  std::string format(const Element& g) const {
    if (is_identity(g)) return "e";
    auto sym = [&](std::size_t i) {
      auto m = moduli_[i];
      auto v = g[i];
      if (m > 0 && v > m / 2) v -= m;
      return v;
    };
    if (kind_ == Kind::Abelian) {
      if (moduli_.size() == 1) {
        auto v = sym(0);
        return (v > 0 ? "+" : "") + std::to_string(v);
      }
      std::string s = "(";
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(sym(i));
      }
      return s + ")";
    }
    std::string s;
    for (auto l : g) {
      char c = static_cast<char>('a' + (std::llabs(l) - 1));
      s += l > 0 ? c : static_cast<char>(std::toupper(c));
    }
    return s;
  }

  Element parse_element(std::string_view text) const {
    auto fail = [&]() -> Element {
      throw PreconditionError("cannot parse element '" + std::string(text) + "'");
    };
    if (text == "e") return identity();
    if (kind_ == Kind::Abelian) {
      std::vector<std::int64_t> coords;
      std::string_view body = text;
      if (!body.empty() && body.front() == '(') {
        if (body.back() != ')') return fail();
        body = body.substr(1, body.size() - 2);
      }
      while (!body.empty()) {
        auto comma = body.find(',');
        auto tok = body.substr(0, comma);
        if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc{} || p != tok.data() + tok.size()) return fail();
        coords.push_back(v);
        if (comma == std::string_view::npos) break;
        body.remove_prefix(comma + 1);
      }
      if (coords.size() != moduli_.size()) return fail();
      return canonical(std::move(coords));
    }
    Element w;
    for (char c : text) {
      if (!std::isalpha(static_cast<unsigned char>(c))) return fail();
      std::int64_t idx = std::tolower(static_cast<unsigned char>(c)) - 'a' + 1;
      if (idx < 1 || idx > free_rank_) return fail();
      w.push_back(std::isupper(static_cast<unsigned char>(c)) ? -idx : idx);
    }
    return canonical(std::move(w));
  }

  friend bool operator==(const GroupModel& a, const GroupModel& b) {
    return a.kind_ == b.kind_ && a.moduli_ == b.moduli_ &&
           a.free_rank_ == b.free_rank_ && a.power_ == b.power_;
  }

 private:
  GroupModel() = default;

  std::vector<Element> base_generators() const {
    std::vector<Element> gens{identity()};
    if (kind_ == Kind::Abelian) {
      for (std::size_t i = 0; i < moduli_.size(); ++i) {
        if (moduli_[i] == 1) continue;
        Element up = identity();
        up[i] = 1;
        Element down = identity();
        down[i] = -1;
        up = canonical(up);
        down = canonical(down);
        gens.push_back(up);
        if (down != up) gens.push_back(down);
      }
    } else {
      for (int i = 1; i <= free_rank_; ++i) {
        gens.push_back({i});
        gens.push_back({-i});
      }
    }
    return gens;
  }

  void build_generators() {
    auto base_gens = base_generators();
    if (power_ == 1) {
      generators_ = std::move(base_gens);
    } else {
      // B_e^power in BFS order, each layer in generator order.
      generators_.clear();
      ElementSet seen{identity()};
      std::vector<Element> frontier{identity()};
      generators_.push_back(identity());
      for (int step = 0; step < power_; ++step) {
        std::vector<Element> next;
        for (const auto& g : frontier) {
          for (std::size_t i = 1; i < base_gens.size(); ++i) {
            auto h = multiply(base_gens[i], g);
            if (seen.insert(h).second) {
              next.push_back(h);
              generators_.push_back(h);
            }
          }
        }
        frontier = std::move(next);
      }
    }
    generator_index_.clear();
    for (std::size_t i = 0; i < generators_.size(); ++i) {
      generator_index_.emplace(generators_[i], i);
    }
    inverse_gen_.assign(generators_.size(), 0);
    for (std::size_t i = 0; i < generators_.size(); ++i) {
      inverse_gen_[i] = generator_index_.at(inverse(generators_[i]));
    }
  }

  Kind kind_ = Kind::Abelian;
  std::vector<std::int64_t> moduli_;
  int free_rank_ = 0;
  int power_ = 1;
  std::vector<Element> generators_;
  ElementMap<std::size_t> generator_index_;
  std::vector<std::size_t> inverse_gen_;
};

/// Parses "Z^d", "Z", "Z/n", "F_k", products joined by " x " (abelian only),
/// with an optional trailing " ^r" selecting F^r as generating set.
inline GroupModel parse_group(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  auto to_int = [&](std::string_view s) {
    std::int64_t v = 0;
    s = trim(s);
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
      throw PreconditionError("bad integer in group spec: '" + std::string(s) + "'");
    return v;
  };
  text = trim(text);
  int pw = 1;
  if (auto caret = text.rfind(" ^"); caret != std::string_view::npos) {
    pw = static_cast<int>(to_int(text.substr(caret + 2)));
    text = trim(text.substr(0, caret));
  }
  std::optional<GroupModel> out;
  while (!text.empty()) {
    auto sep = text.find(" x ");
    auto factor = trim(text.substr(0, sep));
    GroupModel g = [&] {
      if (factor.starts_with("F_")) return GroupModel::free_group(static_cast<int>(to_int(factor.substr(2))));
      if (factor == "Z") return GroupModel::free_abelian(1);
      if (factor.starts_with("Z^")) return GroupModel::free_abelian(static_cast<int>(to_int(factor.substr(2))));
      if (factor.starts_with("Z/")) return GroupModel::cyclic(to_int(factor.substr(2)));
      throw PreconditionError("unknown group factor '" + std::string(factor) + "'");
    }();
    out = out ? GroupModel::product(*out, g) : g;
    if (sep == std::string_view::npos) break;
    text.remove_prefix(sep + 3);
  }
  if (!out) throw PreconditionError("empty group spec");
  return pw == 1 ? *out : out->power(pw);
}

struct WordBall {
  Element center;
  int radius = 0;
  // Elements in breadth-first order; lengths[i] = distance to center.
  std::vector<Element> elements;
  std::vector<int> lengths;

  bool contains(const Element& g) const {
    return std::find(elements.begin(), elements.end(), g) != elements.end();
  }
};

/// Breadth-first enumeration of B^radius(center) in the word metric of the
/// model's generating set, d(x, y) = |y x^-1|. Elements are w * center.
inline WordBall word_ball(const GroupModel& group, int radius,
                          std::size_t cap = kDefaultElementCap,
                          std::optional<Element> center = std::nullopt) {
  if (radius < 0) throw PreconditionError("radius must be >= 0");
  WordBall ball;
  ball.center = center ? group.canonical(*center) : group.identity();
  ball.radius = radius;
  ElementSet seen{group.identity()};
  std::vector<Element> frontier{group.identity()};
  std::vector<Element> words{group.identity()};
  std::vector<int> lengths{0};
  const auto& gens = group.generators();
  for (int step = 1; step <= radius && !frontier.empty(); ++step) {
    std::vector<Element> next;
    for (const auto& g : frontier) {
      for (std::size_t i = 1; i < gens.size(); ++i) {
        auto h = group.multiply(gens[i], g);
        if (seen.insert(h).second) {
          if (words.size() >= cap)
            throw ResourceCapError("word ball exceeds element cap " + std::to_string(cap));
          next.push_back(h);
          words.push_back(h);
          lengths.push_back(step);
        }
      }
    }
    frontier = std::move(next);
  }
  ball.elements.reserve(words.size());
  for (auto& w : words) ball.elements.push_back(group.multiply(w, ball.center));
  ball.lengths = std::move(lengths);
  return ball;
}

/// Minimal number of generators whose product is g, by breadth-first search.
inline int word_length(const GroupModel& group, const Element& target,
                       std::size_t cap = kDefaultElementCap) {
  auto g = group.canonical(target);
  if (group.is_identity(g)) return 0;
  ElementSet seen{group.identity()};
  std::vector<Element> frontier{group.identity()};
  const auto& gens = group.generators();
  for (int step = 1; !frontier.empty(); ++step) {
    std::vector<Element> next;
    for (const auto& x : frontier) {
      for (std::size_t i = 1; i < gens.size(); ++i) {
        auto h = group.multiply(gens[i], x);
        if (h == g) return step;
        if (seen.insert(h).second) {
          if (seen.size() >= cap)
            throw NotReachedError("element " + group.format(g) +
                                  " not reached within cap " + std::to_string(cap));
          next.push_back(std::move(h));
        }
      }
    }
    frontier = std::move(next);
  }
  throw NotReachedError("element " + group.format(g) + " not reached");
}

namespace detail {

inline BigInt binomial(const BigInt& n, unsigned k) {
  if (n < k) return 0;
  BigInt r = 1;
  for (unsigned i = 0; i < k; ++i) {
    r *= (n - i);
    r /= (i + 1);
  }
  return r;
}

// #{v in Z^a : |v|_1 <= t} = sum_k 2^k C(a,k) C(t,k).
inline BigInt lattice_ball(unsigned a, const BigInt& t) {
  if (t < 0) return 0;
  BigInt sum = 0;
  for (unsigned k = 0; k <= a; ++k) {
    sum += (BigInt(1) << k) * binomial(BigInt(a), k) * binomial(t, k);
  }
  return sum;
}

}  // namespace detail

/// #B_e^radius by closed form (abelian: lattice-ball convolution with the
/// finite factors; free: geometric series). Saturates above Bound's cap.
inline Bound ball_count(const GroupModel& group, const Bound& radius) {
  if (radius.is_saturated()) {
    if (group.is_finite()) return Bound(group.order());
    return Bound::saturated();
  }
  BigInt rho = radius.value() * group.power();
  if (group.kind() == GroupModel::Kind::Free) {
    const int k = group.free_rank();
    if (k == 1) return Bound(BigInt(2 * rho + 1));
    if (rho > Bound::kCapBits) return Bound::saturated();
    auto r = rho.convert_to<unsigned>();
    BigInt q = 2 * k - 1;
    BigInt pw = boost::multiprecision::pow(q, r);
    return Bound(BigInt(1 + 2 * k * (pw - 1) / (2 * k - 2)));
  }
  // Length distribution of the finite part.
  std::vector<BigInt> dist{1};
  for (auto m : group.moduli()) {
    if (m == 0) continue;
    std::vector<BigInt> f(static_cast<std::size_t>(m / 2 + 1), 0);
    for (std::int64_t v = 0; v < m; ++v) f[static_cast<std::size_t>(std::min(v, m - v))] += 1;
    std::vector<BigInt> nd(dist.size() + f.size() - 1, 0);
    for (std::size_t i = 0; i < dist.size(); ++i)
      for (std::size_t j = 0; j < f.size(); ++j) nd[i + j] += dist[i] * f[j];
    dist = std::move(nd);
  }
  const auto a = static_cast<unsigned>(group.abelian_rank());
  if (a > 0 && boost::multiprecision::msb(rho + 1) * a > Bound::kCapBits + 64)
    return Bound::saturated();
  BigInt total = 0;
  for (std::size_t l = 0; l < dist.size(); ++l) {
    if (rho < l) break;
    total += dist[l] * detail::lattice_ball(a, rho - l);
  }
  return Bound(total);
}

inline Bound ball_count(const GroupModel& group, std::uint64_t radius) {
  return ball_count(group, Bound(radius));
}

struct PolynomialFit {
  std::uint64_t C = 0;
  int degree = 0;
};

/// Least integer degree d in [1, max_degree] such that
/// counts[r] <= C r^d for every sampled r >= 1 with C <= c_cap.
inline std::optional<PolynomialFit> fit_polynomial(const std::vector<std::uint64_t>& counts,
                                                   std::uint64_t c_cap, int max_degree) {
  if (counts.size() < 2) return std::nullopt;
  for (int d = 1; d <= max_degree; ++d) {
    BigInt c = 0;
    for (std::size_t r = 1; r < counts.size(); ++r) {
      BigInt denom = boost::multiprecision::pow(BigInt(r), static_cast<unsigned>(d));
      BigInt need = (BigInt(counts[r]) + denom - 1) / denom;
      c = std::max(c, need);
    }
    if (c <= c_cap) return PolynomialFit{c.convert_to<std::uint64_t>(), d};
  }
  return std::nullopt;
}

struct GrowthProfile {
  std::vector<int> radii;
  std::vector<std::uint64_t> counts;
  std::optional<PolynomialFit> fit;

  bool bound_holds(std::size_t r, std::uint64_t count) const {
    if (!fit) return false;
    BigInt rhs = BigInt(fit->C) *
                 boost::multiprecision::pow(BigInt(std::max<std::size_t>(r, 1)),
                                            static_cast<unsigned>(fit->degree));
    return BigInt(count) <= rhs;
  }
};

/// Default degree search range: number of inverse pairs in the generating set.
inline int default_max_degree(const GroupModel& group) {
  return std::max<int>(1, static_cast<int>((group.generators().size() - 1) / 2));
}

/// #B_e^r for r = 0..max_radius with a polynomial fit; the constant is capped
/// at #B_e^1 = #F (see README for the fitting rule).
inline GrowthProfile growth_profile(const GroupModel& group, int max_radius,
                                    std::size_t cap = kDefaultElementCap,
                                    std::optional<int> max_degree = std::nullopt) {
  if (max_radius < 1) throw PreconditionError("max_radius must be >= 1");
  auto ball = word_ball(group, max_radius, cap);
  GrowthProfile p;
  p.counts.assign(static_cast<std::size_t>(max_radius) + 1, 0);
  for (auto l : ball.lengths) p.counts[static_cast<std::size_t>(l)] += 1;
  for (int r = 0; r <= max_radius; ++r) {
    p.radii.push_back(r);
    if (r) p.counts[static_cast<std::size_t>(r)] += p.counts[static_cast<std::size_t>(r) - 1];
  }
  p.fit = fit_polynomial(p.counts, p.counts[1], max_degree.value_or(default_max_degree(group)));
  return p;
}

}  // namespace dad

#pragma once

#include <compare>
#include <cstdint>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace dad {

using BigInt = boost::multiprecision::cpp_int;

/// Nonnegative integer bound that saturates above 2^kCapBits.
///
/// Certified cardinality bounds produced by the union schedule grow roughly
/// cubically per step. Once a value passes the cap it is kept as "saturated",
/// which still admits every finite observation, so certificates remain sound.
class Bound {
 public:
  static constexpr unsigned kCapBits = 4096;

  Bound() = default;
  Bound(std::uint64_t v) : value_(v) {}  // NOLINT(google-explicit-constructor)
  explicit Bound(BigInt v) : value_(std::move(v)) { normalize(); }

  static Bound saturated() {
    Bound b;
    b.saturated_ = true;
    b.value_ = cap();
    return b;
  }

  bool is_saturated() const { return saturated_; }
  bool is_zero() const { return !saturated_ && value_ == 0; }

  // Exact value; equals 2^kCapBits when saturated.
  const BigInt& value() const { return value_; }

  // Observed cardinality fits under this bound.
  bool admits(const BigInt& observed) const {
    return saturated_ || observed <= value_;
  }

  // Narrowed to 64 bits; saturates to UINT64_MAX.
  std::uint64_t clamp_u64() const {
    if (saturated_ || value_ > BigInt(UINT64_MAX)) return UINT64_MAX;
    return value_.convert_to<std::uint64_t>();
  }

  std::string str() const {
    return saturated_ ? ">2^" + std::to_string(kCapBits) : value_.str();
  }

  friend Bound operator+(const Bound& a, const Bound& b) {
    if (a.saturated_ || b.saturated_) return saturated();
    return Bound(BigInt(a.value_ + b.value_));
  }
  friend Bound operator*(const Bound& a, const Bound& b) {
    if ((a.saturated_ && !b.is_zero()) || (b.saturated_ && !a.is_zero()))
      return saturated();
    if (a.is_zero() || b.is_zero()) return Bound(0);
    return Bound(BigInt(a.value_ * b.value_));
  }
  friend Bound operator-(const Bound& a, std::uint64_t b) {
    if (a.saturated_) return a;
    if (a.value_ < b) return Bound(0);
    return Bound(BigInt(a.value_ - b));
  }

  friend bool operator==(const Bound& a, const Bound& b) {
    return a.saturated_ == b.saturated_ && a.value_ == b.value_;
  }
  friend std::strong_ordering operator<=>(const Bound& a, const Bound& b) {
    if (a.saturated_ || b.saturated_) return a.saturated_ <=> b.saturated_;
    if (a.value_ < b.value_) return std::strong_ordering::less;
    if (a.value_ > b.value_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

 private:
  static const BigInt& cap() {
    static const BigInt c = BigInt(1) << kCapBits;
    return c;
  }

  void normalize() {
    if (value_ < 0) value_ = 0;
    if (value_ >= cap()) {
      saturated_ = true;
      value_ = cap();
    }
  }

  BigInt value_ = 0;
  bool saturated_ = false;
};

}  // namespace dad

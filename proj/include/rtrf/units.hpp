#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>

namespace rtrf {

// Fixed-point physical quantity stored as an integer count of 1/1000 of its
// display unit, so that accumulated totals stay bit-exact.
template <class Tag>
class Quantity {
 public:
  static constexpr std::int64_t kScale = 1000;

  constexpr Quantity() = default;

  static constexpr Quantity from_milli(std::int64_t milli) {
    Quantity q;
    q.milli_ = milli;
    return q;
  }
  static Quantity from_units(double units) {
    return from_milli(static_cast<std::int64_t>(std::llround(units * kScale)));
  }

  constexpr std::int64_t milli() const { return milli_; }
  constexpr double units() const { return static_cast<double>(milli_) / kScale; }

  constexpr Quantity& operator+=(Quantity o) {
    milli_ += o.milli_;
    return *this;
  }
  constexpr Quantity& operator-=(Quantity o) {
    milli_ -= o.milli_;
    return *this;
  }
  friend constexpr Quantity operator+(Quantity a, Quantity b) { return a += b; }
  friend constexpr Quantity operator-(Quantity a, Quantity b) { return a -= b; }
  friend constexpr Quantity operator*(Quantity a, std::int64_t k) { return from_milli(a.milli_ * k); }
  friend constexpr Quantity operator*(std::int64_t k, Quantity a) { return a * k; }
  friend constexpr auto operator<=>(Quantity, Quantity) = default;

 private:
  std::int64_t milli_ = 0;
};

struct EnergyTag {};
struct LatencyTag {};

/// Energy in femtojoules (resolution 1 aJ).
using Energy = Quantity<EnergyTag>;
/// Latency in nanoseconds (resolution 1 ps).
using Latency = Quantity<LatencyTag>;

inline Energy femtojoules(double v) { return Energy::from_units(v); }
inline Latency nanoseconds(double v) { return Latency::from_units(v); }

// Exact decimal rendering with three fractional digits, e.g. "17.800".
inline std::string format_milli(std::int64_t milli) {
  std::string sign = milli < 0 ? "-" : "";
  std::uint64_t m = milli < 0 ? static_cast<std::uint64_t>(-(milli + 1)) + 1 : static_cast<std::uint64_t>(milli);
  std::string frac = std::to_string(m % 1000);
  frac.insert(0, 3 - frac.size(), '0');
  return sign + std::to_string(m / 1000) + "." + frac;
}

/// Inverse of format_milli; accepts at most three fractional digits.
inline std::optional<std::int64_t> parse_milli(std::string_view s) {
  bool neg = false;
  if (!s.empty() && s.front() == '-') {
    neg = true;
    s.remove_prefix(1);
  }
  const auto dot = s.find('.');
  std::string_view whole = s.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
  if (whole.empty() || whole.size() > 15 || frac.size() > 3 || (dot != std::string_view::npos && frac.empty()))
    return std::nullopt;
  std::int64_t v = 0;
  for (char c : whole) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + (c - '0');
  }
  std::int64_t f = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    char c = i < frac.size() ? frac[i] : '0';
    if (c < '0' || c > '9') return std::nullopt;
    f = f * 10 + (c - '0');
  }
  v = v * 1000 + f;
  return neg ? -v : v;
}

template <class Tag>
std::string to_string(Quantity<Tag> q) {
  return format_milli(q.milli());
}

}  // namespace rtrf

#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "rtrf/error.hpp"

namespace rtrf {

// Physical configuration of the racetrack register file.
struct RegisterFileGeometry {
  std::int64_t num_tracks = 32;    // nanotracks
  std::int64_t track_length = 64;  // usable positions per nanotrack
  std::int64_t num_aps = 2;        // access ports per nanotrack
  std::int64_t num_regs = 32;      // architectural registers
  std::int64_t reg_bits = 64;      // bits per register

  friend bool operator==(const RegisterFileGeometry&, const RegisterFileGeometry&) = default;
};

enum class GeometryErrc {
  NotPowerOfTwo = 1,
  InvalidRegisterCount,
  RegisterTooWide,
  TooManyPorts,
  CapacityShortfall,
  HorizontalPortShortfall,
  VerticalPortShortfall,
};

inline const char* describe(GeometryErrc e) {
  switch (e) {
    case GeometryErrc::NotPowerOfTwo:
      return "num_tracks, track_length, num_aps and reg_bits must be positive powers of two";
    case GeometryErrc::InvalidRegisterCount:
      return "num_regs must be positive";
    case GeometryErrc::RegisterTooWide:
      return "reg_bits must not exceed 64";
    case GeometryErrc::TooManyPorts:
      return "num_aps must not exceed track_length";
    case GeometryErrc::CapacityShortfall:
      return "num_tracks * track_length is smaller than num_regs * reg_bits";
    case GeometryErrc::HorizontalPortShortfall:
      return "horizontal allocation needs at least one access port per register in a nanotrack";
    case GeometryErrc::VerticalPortShortfall:
      return "vertical allocation needs at least one access port per register fragment";
  }
  return "invalid geometry";
}

class GeometryError : public Error {
 public:
  explicit GeometryError(GeometryErrc code) : Error(describe(code)), code_(code) {}
  GeometryErrc code() const noexcept { return code_; }

 private:
  GeometryErrc code_;
};

// Non-negative rational with reduced terms.
struct Ratio {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Ratio of(std::int64_t n, std::int64_t d) {
    std::int64_t g = std::gcd(n, d);
    if (g == 0) g = 1;
    return {n / g, d / g};
  }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Ratio&, const Ratio&) = default;
};

struct DerivedLayout {
  Ratio regs_per_track;                  // W/B; below one when a register spans several nanotracks
  std::int64_t tracks_per_register = 1;  // max(1, B/W)
  std::int64_t positions_per_register_v = 1;  // max(1, B/N)
  std::int64_t port_spacing = 1;         // W/n_ap positions served by each port
  Ratio overflow;                        // W/(2 n_ap) extra positions at each nanotrack end
};

constexpr bool is_power_of_two(std::int64_t x) { return x > 0 && (x & (x - 1)) == 0; }

/// First violated constraint, or nullopt for a usable geometry. Total over all inputs.
inline std::optional<GeometryErrc> geometry_error(const RegisterFileGeometry& g) {
  if (!is_power_of_two(g.num_tracks) || !is_power_of_two(g.track_length) || !is_power_of_two(g.num_aps) ||
      !is_power_of_two(g.reg_bits))
    return GeometryErrc::NotPowerOfTwo;
  if (g.num_regs <= 0) return GeometryErrc::InvalidRegisterCount;
  if (g.reg_bits > 64) return GeometryErrc::RegisterTooWide;
  if (g.num_aps > g.track_length) return GeometryErrc::TooManyPorts;
  using wide = __int128;
  if (wide{g.num_tracks} * g.track_length < wide{g.num_regs} * g.reg_bits) return GeometryErrc::CapacityShortfall;
  if (g.track_length > g.reg_bits && g.num_aps < g.track_length / g.reg_bits)
    return GeometryErrc::HorizontalPortShortfall;
  if (g.reg_bits > g.num_tracks && g.num_aps < g.reg_bits / g.num_tracks) return GeometryErrc::VerticalPortShortfall;
  return std::nullopt;
}

// A geometry that passed validation, bundled with its derived layout.
class ValidatedGeometry {
 public:
  const RegisterFileGeometry& raw() const { return geom_; }
  const DerivedLayout& layout() const { return layout_; }

  std::int64_t num_tracks() const { return geom_.num_tracks; }
  std::int64_t track_length() const { return geom_.track_length; }
  std::int64_t num_aps() const { return geom_.num_aps; }
  std::int64_t num_regs() const { return geom_.num_regs; }
  std::int64_t reg_bits() const { return geom_.reg_bits; }

  friend bool operator==(const ValidatedGeometry& a, const ValidatedGeometry& b) { return a.geom_ == b.geom_; }

 private:
  friend ValidatedGeometry validate_geometry(const RegisterFileGeometry&);
  ValidatedGeometry(const RegisterFileGeometry& g, const DerivedLayout& l) : geom_(g), layout_(l) {}

  RegisterFileGeometry geom_;
  DerivedLayout layout_;
};

/// Throws GeometryError carrying the first violated constraint.
inline ValidatedGeometry validate_geometry(const RegisterFileGeometry& g) {
  if (auto err = geometry_error(g)) throw GeometryError(*err);
  DerivedLayout l;
  l.regs_per_track = Ratio::of(g.track_length, g.reg_bits);
  l.tracks_per_register = std::max<std::int64_t>(1, g.reg_bits / g.track_length);
  l.positions_per_register_v = std::max<std::int64_t>(1, g.reg_bits / g.num_tracks);
  l.port_spacing = g.track_length / g.num_aps;
  l.overflow = Ratio::of(g.track_length, 2 * g.num_aps);
  return ValidatedGeometry(g, l);
}

inline ValidatedGeometry default_geometry() { return validate_geometry(RegisterFileGeometry{}); }

inline std::string to_config_string(const RegisterFileGeometry& g) {
  std::ostringstream os;
  os << "num_tracks=" << g.num_tracks << ",track_length=" << g.track_length << ",num_aps=" << g.num_aps
     << ",num_regs=" << g.num_regs << ",reg_bits=" << g.reg_bits;
  return os.str();
}

// FNV-1a over the canonical key=value rendering.
inline std::uint64_t geometry_fingerprint(const RegisterFileGeometry& g) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : to_config_string(g)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}
inline std::uint64_t geometry_fingerprint(const ValidatedGeometry& g) { return geometry_fingerprint(g.raw()); }

/// Parses `key=value` pairs separated by newlines or commas. Keys not given keep
/// their defaults; `#` starts a comment.
inline RegisterFileGeometry parse_geometry_config(std::string_view text, RegisterFileGeometry g = {}) {
  std::size_t line = 1;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find_first_of(",\n", pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view item = text.substr(pos, end - pos);
    if (auto hash = item.find('#'); hash != std::string_view::npos) item = item.substr(0, hash);
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.front()))) item.remove_prefix(1);
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.back()))) item.remove_suffix(1);
    if (!item.empty()) {
      auto eq = item.find('=');
      if (eq == std::string_view::npos) throw ParseError(line, 1, "expected key=value, got '" + std::string(item) + "'");
      std::string key(item.substr(0, eq));
      std::string value(item.substr(eq + 1));
      while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back()))) key.pop_back();
      std::size_t used = 0;
      long long v = 0;
      try {
        v = std::stoll(value, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || value.find_first_not_of(" \t", used) != std::string::npos)
        throw ParseError(line, eq + 2, "bad integer '" + value + "' for " + key);
      if (key == "num_tracks") g.num_tracks = v;
      else if (key == "track_length") g.track_length = v;
      else if (key == "num_aps") g.num_aps = v;
      else if (key == "num_regs") g.num_regs = v;
      else if (key == "reg_bits") g.reg_bits = v;
      else throw ParseError(line, 1, "unknown geometry key '" + key + "'");
    }
    if (end < text.size() && text[end] == '\n') ++line;
    pos = end + 1;
  }
  return g;
}

}  // namespace rtrf

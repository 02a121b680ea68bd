#pragma once

#include <bit>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>

#include "rtrf/geometry.hpp"
#include "rtrf/units.hpp"

namespace rtrf {

enum class AllocationMode : std::uint8_t { Horizontal = 0, Vertical = 1 };
enum class AccessKind : std::uint8_t { Read, Write };

inline const char* to_string(AllocationMode m) { return m == AllocationMode::Horizontal ? "horizontal" : "vertical"; }
inline AllocationMode other(AllocationMode m) {
  return m == AllocationMode::Horizontal ? AllocationMode::Vertical : AllocationMode::Horizontal;
}

// Per-operation skyrmion racetrack constants (detect, shift, remove, insert).
struct CostParams {
  Energy detect_energy = Energy::from_milli(2'000);     // 2 fJ
  Energy shift_energy = Energy::from_milli(20'000);     // 20 fJ
  Energy remove_energy = Energy::from_milli(20'000);    // 20 fJ
  Energy insert_energy = Energy::from_milli(200'000);   // 200 fJ
  Latency detect_latency = Latency::from_milli(100);    // 0.1 ns
  Latency shift_latency = Latency::from_milli(500);     // 0.5 ns
  Latency remove_latency = Latency::from_milli(800);    // 0.8 ns
  Latency insert_latency = Latency::from_milli(1'000);  // 1.0 ns

  bool valid() const {
    return detect_energy.milli() > 0 && shift_energy.milli() > 0 && remove_energy.milli() > 0 &&
           insert_energy.milli() > 0 && detect_latency.milli() > 0 && shift_latency.milli() > 0 &&
           remove_latency.milli() > 0 && insert_latency.milli() > 0;
  }
  friend bool operator==(const CostParams&, const CostParams&) = default;
};

// Register content of up to 64 bits.
class RegisterValue {
 public:
  RegisterValue() = default;
  RegisterValue(std::uint64_t bits, int width) : bits_(bits), width_(width) {
    if (width < 1 || width > 64) throw std::invalid_argument("register width must be in [1, 64]");
    if (width < 64 && (bits >> width) != 0) throw std::invalid_argument("register value exceeds its width");
  }
  static RegisterValue zeros(int width) { return RegisterValue(0, width); }

  std::uint64_t bits() const { return bits_; }
  int width() const { return width_; }
  int popcount() const { return std::popcount(bits_); }

  friend bool operator==(const RegisterValue&, const RegisterValue&) = default;

 private:
  std::uint64_t bits_ = 0;
  int width_ = 64;
};

// Skyrmion bookkeeping of a permutation write.
struct WriteDelta {
  std::int64_t ones_old = 0;    // Q
  std::int64_t ones_new = 0;    // Q'
  std::int64_t removals = 0;    // j: excess skyrmions removed
  std::int64_t insertions = 0;  // k: skyrmions inserted

  friend bool operator==(const WriteDelta&, const WriteDelta&) = default;
};

struct CostTriple {
  std::int64_t shifts = 0;
  Energy energy;
  Latency latency;

  CostTriple& operator+=(const CostTriple& o) {
    shifts += o.shifts;
    energy += o.energy;
    latency += o.latency;
    return *this;
  }
  friend CostTriple operator+(CostTriple a, const CostTriple& b) { return a += b; }
  friend bool operator==(const CostTriple&, const CostTriple&) = default;
};

/// Positioning shifts of one horizontal access: (W/n_ap - 1) * 2 * max(1, B/W).
/// Independent of which register is accessed.
inline std::int64_t shift_cost_h(const ValidatedGeometry& g) {
  return (g.track_length() / g.num_aps() - 1) * 2 * g.layout().tracks_per_register;
}

/// Aligned offset of a register in vertical allocation: floor(reg * B / (N * n_ap)).
inline std::int64_t vertical_slot(const ValidatedGeometry& g, std::int64_t reg) {
  return reg * g.reg_bits() / (g.num_tracks() * g.num_aps());
}

inline void check_register(const ValidatedGeometry& g, std::int64_t reg) {
  if (reg < 0 || reg >= g.num_regs())
    throw std::out_of_range("register index " + std::to_string(reg) + " out of range [0, " +
                            std::to_string(g.num_regs()) + ")");
}

/// Synchronous shifts of all N nanotracks from reg_old's offset to reg's offset.
inline std::int64_t shift_cost_v(const ValidatedGeometry& g, std::int64_t reg_old, std::int64_t reg) {
  check_register(g, reg_old);
  check_register(g, reg);
  return std::llabs(vertical_slot(g, reg) - vertical_slot(g, reg_old)) * g.num_tracks();
}

inline WriteDelta write_delta(const RegisterValue& old_value, const RegisterValue& new_value) {
  if (old_value.width() != new_value.width()) throw std::invalid_argument("write_delta: width mismatch");
  WriteDelta d;
  d.ones_old = old_value.popcount();
  d.ones_new = new_value.popcount();
  d.removals = std::max<std::int64_t>(d.ones_old - d.ones_new, 0);
  d.insertions = std::max<std::int64_t>(d.ones_new - d.ones_old, 0);
  return d;
}

namespace detail {
inline const WriteDelta& require_delta(AccessKind kind, const std::optional<WriteDelta>& delta) {
  static const WriteDelta none{};
  if (kind == AccessKind::Read) return none;
  if (!delta) throw std::invalid_argument("write access requires a write delta");
  return *delta;
}
}  // namespace detail

inline Energy energy_access(const ValidatedGeometry& g, const CostParams& p, AllocationMode mode, AccessKind kind,
                            std::int64_t shifts, const std::optional<WriteDelta>& delta = std::nullopt) {
  const std::int64_t bits = g.reg_bits();
  const WriteDelta& d = detail::require_delta(kind, delta);
  if (kind == AccessKind::Read) return p.shift_energy * shifts + p.detect_energy * bits;
  if (mode == AllocationMode::Horizontal) {
    // Permutation write: every port aligned with the register gets its own shift
    // pulse, n_ap * min(1, B/W) of them. Integral for any valid geometry.
    const std::int64_t pulses = bits >= g.track_length() ? g.num_aps() : g.num_aps() * bits / g.track_length();
    return p.shift_energy * (shifts * pulses) + p.detect_energy * bits + p.insert_energy * d.insertions +
           (p.shift_energy + p.remove_energy) * d.removals;
  }
  // Naive write: remove all B bits, insert the Q' ones.
  return p.shift_energy * shifts + p.remove_energy * bits + p.insert_energy * d.ones_new;
}

inline Latency latency_access(const ValidatedGeometry& g, const CostParams& p, AllocationMode mode, AccessKind kind,
                              std::int64_t shifts, const std::optional<WriteDelta>& delta = std::nullopt) {
  const std::int64_t bits = g.reg_bits();
  const WriteDelta& d = detail::require_delta(kind, delta);
  if (mode == AllocationMode::Horizontal) {
    if (kind == AccessKind::Read) return p.shift_latency * shifts + p.detect_latency * bits;
    return p.shift_latency * shifts + p.detect_latency * bits + p.insert_latency * d.insertions +
           (p.shift_latency + p.remove_latency) * d.removals;
  }
  // Vertical operations run in parallel across nanotracks and count once.
  if (kind == AccessKind::Read) return p.shift_latency * shifts + p.detect_latency;
  return p.shift_latency * shifts + p.remove_latency + p.insert_latency;
}

/// Full cost of one access. For reads `new_value` is ignored.
inline CostTriple access_cost(const ValidatedGeometry& g, const CostParams& p, AllocationMode mode, AccessKind kind,
                              std::int64_t reg_old, std::int64_t reg, const RegisterValue& old_value,
                              const std::optional<RegisterValue>& new_value = std::nullopt) {
  check_register(g, reg);
  const std::int64_t shifts = mode == AllocationMode::Horizontal ? shift_cost_h(g) : shift_cost_v(g, reg_old, reg);
  std::optional<WriteDelta> delta;
  if (kind == AccessKind::Write) {
    if (!new_value) throw std::invalid_argument("write access requires a new value");
    delta = write_delta(old_value, *new_value);
  }
  return CostTriple{shifts, energy_access(g, p, mode, kind, shifts, delta), latency_access(g, p, mode, kind, shifts, delta)};
}

}  // namespace rtrf

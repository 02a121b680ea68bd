#pragma once

// Brute-force movement model of a racetrack register file. Ports and register
// cells are laid out explicitly, horizontal accesses are walked one step at a
// time and vertical alignments are found by search. Nothing here uses the
// closed-form cost expressions.

#include <algorithm>
#include <cstdlib>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

struct Shape {
  int tracks, width, ports, regs, bits;  // N, W, n_ap, R, B
};

// Ports sit at the centre of equal zones; the overflow is half a zone.
inline std::vector<int> port_positions(const Shape& s) {
  std::vector<int> p;
  const int zone = s.width / s.ports;
  for (int i = 0; i < s.ports; ++i) p.push_back(i * zone + zone / 2);
  return p;
}

// Steps needed to bring every listed position of one track under some port
// and return the track to rest. The track is moved one position at a time
// and the walk goes down to the lowest needed offset, up to the highest, and
// home again.
inline std::int64_t track_walk(const Shape& s, const std::vector<int>& positions) {
  const auto ports = port_positions(s);
  const int zone = s.width / s.ports;
  std::set<int> needed;
  for (int x : positions) {
    // Offset that puts bit x under the port owning its zone.
    int port = ports[x / zone];
    needed.insert(port - x);
  }
  const int overflow = zone / 2;
  int offset = 0, lo = *needed.begin(), hi = *needed.rbegin();
  if (lo < -overflow || hi > overflow) throw std::logic_error("excursion exceeds overflow region");
  std::int64_t steps = 0;
  std::set<int> seen;
  auto visit = [&] { if (needed.count(offset)) seen.insert(offset); };
  visit();
  while (offset > std::min(lo, 0)) { --offset; ++steps; visit(); }
  while (offset < std::max(hi, 0)) { ++offset; ++steps; visit(); }
  while (offset > 0) { --offset; ++steps; }
  if (seen.size() != needed.size()) throw std::logic_error("walk missed a bit");
  return steps;
}

// Horizontal layout: registers fill tracks left to right; a register wider
// than a track takes several whole tracks.
inline std::int64_t horizontal_shifts(const Shape& s, int reg) {
  std::map<int, std::vector<int>> cells;  // track -> positions
  const std::int64_t first_bit = static_cast<std::int64_t>(reg) * s.bits;
  for (int b = 0; b < s.bits; ++b) {
    const std::int64_t lin = first_bit + b;
    cells[static_cast<int>(lin / s.width)].push_back(static_cast<int>(lin % s.width));
  }
  std::int64_t total = 0;
  for (const auto& [track, pos] : cells) total += track_walk(s, pos);
  return total;
}

// Vertical layout: at each alignment step d every port exposes position
// (zone start + d) on every track. Registers claim exposed cells in order,
// one port column across B tracks, or B/N port columns across all tracks.
class VerticalLayout {
 public:
  explicit VerticalLayout(const Shape& s) : s_(s), cells_(static_cast<std::size_t>(s.regs)) {
    const int zone = s.width / s.ports;
    int reg = 0;
    for (int d = 0; d < zone && reg < s.regs; ++d) {
      std::vector<std::pair<int, int>> exposed;  // (track, position), port-major
      for (int p = 0; p < s.ports; ++p)
        for (int t = 0; t < s.tracks; ++t) exposed.push_back({t, p * zone + d});
      for (std::size_t i = 0; i + s.bits <= exposed.size() && reg < s.regs; i += s.bits, ++reg)
        cells_[reg].assign(exposed.begin() + static_cast<std::ptrdiff_t>(i),
                           exposed.begin() + static_cast<std::ptrdiff_t>(i + s.bits));
    }
    if (reg < s.regs) throw std::logic_error("register file does not fit");
    for (int r = 0; r < s.regs; ++r) offsets_.push_back(find_alignment(r));
  }

  // Track movement between the alignments of two registers; every step moves
  // all N tracks by one position.
  std::int64_t shifts(int from, int to) const {
    return static_cast<std::int64_t>(std::abs(offsets_[from] - offsets_[to])) * s_.tracks;
  }

  int alignment(int reg) const { return offsets_[reg]; }

 private:
  // Offset at which every cell of the register sits under the port of its
  // own zone. All cells must agree, otherwise the register is torn.
  int find_alignment(int reg) const {
    const int zone = s_.width / s_.ports;
    const auto ports = port_positions(s_);
    std::set<int> offsets;
    for (const auto& [t, x] : cells_[reg]) {
      (void)t;
      offsets.insert(ports[static_cast<std::size_t>(x / zone)] - x);
    }
    if (offsets.size() != 1) throw std::logic_error("register cells at different alignments");
    const int d = *offsets.begin();
    if (d < -zone / 2 || d > zone / 2) throw std::logic_error("alignment outside the overflow region");
    return d;
  }

  Shape s_;
  std::vector<std::vector<std::pair<int, int>>> cells_;
  std::vector<int> offsets_;
};

}  // namespace oracle

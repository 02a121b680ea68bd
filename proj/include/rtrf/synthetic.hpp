#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtrf/listing.hpp"
#include "rtrf/trace.hpp"

namespace rtrf {

enum class RegisterOrder {
  Random,  // hot/cold draws
  Cycle,   // every register in turn, alternating ends: 0, R-1, 1, R-2, ...
};

struct PhaseSpec {
  std::size_t length = 0;  // executed instructions per visit, rounded up to whole iterations; 0 means unbounded
  int working_set = 4;
  double hot_ratio = 0.9;
  RegisterOrder order = RegisterOrder::Random;
  std::optional<double> skip_probability;  // overrides SyntheticSpec::skip_probability
};

struct SyntheticSpec {
  std::size_t instruction_count = 10000;
  int working_set = 4;       // hot registers are [0, working_set)
  double hot_ratio = 0.9;    // share of register accesses hitting the hot set
  double write_fraction = 0.5;   // share of non-branch instructions with a destination
  double value_entropy = 4.0;    // expected toggled bits per write
  std::uint64_t seed = 1;
  int value_bits = 16;       // writes only toggle the low bits
  std::size_t body_length = 32;  // static instructions per loop body
  double skip_probability = 0.5;
  int num_regs = 32;
  int reg_bits = 64;
  // Empty means one unbounded phase built from the fields above.
  std::vector<PhaseSpec> phases;
};

struct Workload {
  ProgramListing listing;
  Trace trace;
};

inline constexpr std::uint64_t kSyntheticBase = 0x400000;

namespace detail {

class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : eng_(seed) {}
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do x = eng_();
    while (x >= limit);
    return x % n;
  }
  double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return unit() < p; }
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 eng_;
};

inline void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(what) + " must be in [0, 1]");
}

// Positions of one phase's body parts inside the listing.
struct PhaseLayout {
  std::size_t head = 0, skip = 0, b_part = 0, c_part = 0, backedge = 0, end = 0;
};

}  // namespace detail

inline void validate(const SyntheticSpec& s) {
  if (s.num_regs < 1) throw std::invalid_argument("num_regs must be positive");
  if (s.reg_bits < 1 || s.reg_bits > 64) throw std::invalid_argument("reg_bits must be in [1, 64]");
  if (s.value_bits < 1 || s.value_bits > s.reg_bits) throw std::invalid_argument("value_bits must be in [1, reg_bits]");
  if (s.body_length < 8) throw std::invalid_argument("body_length must be at least 8");
  detail::check_probability(s.write_fraction, "write_fraction");
  detail::check_probability(s.skip_probability, "skip_probability");
  if (!(s.value_entropy >= 0.0 && s.value_entropy <= s.value_bits))
    throw std::invalid_argument("value_entropy must be in [0, value_bits]");
  auto check_phase = [&](int ws, double ratio) {
    if (ws < 1 || ws > s.num_regs) throw std::invalid_argument("working_set must be in [1, num_regs]");
    detail::check_probability(ratio, "hot_ratio");
  };
  if (s.phases.empty()) check_phase(s.working_set, s.hot_ratio);
  for (const auto& p : s.phases) {
    check_phase(p.working_set, p.hot_ratio);
    if (p.skip_probability) detail::check_probability(*p.skip_probability, "skip_probability");
  }
}

/// Builds a looping program with one body per phase and executes it into a
/// trace of exactly `instruction_count` instructions.
inline Workload generate_workload(const SyntheticSpec& spec) {
  validate(spec);
  detail::SplitRng rng(spec.seed);
  std::vector<PhaseSpec> phases = spec.phases;
  if (phases.empty()) phases.push_back(PhaseSpec{0, spec.working_set, spec.hot_ratio, RegisterOrder::Random, std::nullopt});

  const std::size_t n = spec.body_length;
  const std::size_t head_len = n * 3 / 8, b_len = n * 3 / 8, c_len = n - head_len - b_len - 2;

  std::vector<ListingInstruction> instrs;
  std::vector<detail::PhaseLayout> layout;
  auto addr = [](std::size_t i) { return kSyntheticBase + 4 * static_cast<std::uint64_t>(i); };

  for (const auto& ph : phases) {
    detail::PhaseLayout L;
    L.head = instrs.size();
    L.skip = L.head + head_len;
    L.b_part = L.skip + 1;
    L.c_part = L.b_part + b_len;
    L.backedge = L.c_part + c_len;
    L.end = L.backedge + 1;

    // Operand slots in two groups by execution frequency, each with an exact
    // hot share so the executed ratio tracks the spec.
    std::vector<ListingInstruction> body(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto& in = body[i];
      in.address = addr(L.head + i);
      const std::size_t at = L.head + i;
      if (at == L.skip || at == L.backedge) {
        in.kind = InstrKind::CondBranch;
        in.mnemonic = at == L.skip ? "beq" : "bne";
        in.target = at == L.skip ? addr(L.c_part) : addr(L.head);
        in.sources.resize(1);
      } else {
        in.sources.resize(2);
        if (rng.chance(spec.write_fraction)) {
          in.mnemonic = "add";
          in.destinations.resize(1);
        } else {
          in.mnemonic = "cmp";
        }
      }
    }
    if (ph.order == RegisterOrder::Cycle) {
      std::size_t k = 0;
      const auto R = static_cast<std::size_t>(spec.num_regs);
      for (auto& in : body) {
        for (auto* ops : {&in.sources, &in.destinations})
          for (int& r : *ops) {
            const std::size_t pos = k++ % R;
            r = static_cast<int>(pos % 2 == 0 ? pos / 2 : R - 1 - pos / 2);
          }
      }
    } else {
      for (int group = 0; group < 2; ++group) {
        std::vector<int*> slots;
        for (std::size_t i = 0; i < n; ++i) {
          const std::size_t at = L.head + i;
          const bool in_b = at >= L.b_part && at < L.c_part;
          if (in_b != (group == 1)) continue;
          for (int& r : body[i].sources) slots.push_back(&r);
          for (int& r : body[i].destinations) slots.push_back(&r);
        }
        const auto hot = static_cast<std::size_t>(std::llround(ph.hot_ratio * static_cast<double>(slots.size())));
        std::vector<bool> is_hot(slots.size(), false);
        std::fill(is_hot.begin(), is_hot.begin() + static_cast<std::ptrdiff_t>(hot), true);
        rng.shuffle(is_hot);
        const int cold = spec.num_regs - ph.working_set;
        for (std::size_t i = 0; i < slots.size(); ++i) {
          if (is_hot[i] || cold == 0)
            *slots[i] = static_cast<int>(rng.below(static_cast<std::uint64_t>(ph.working_set)));
          else
            *slots[i] = ph.working_set + static_cast<int>(rng.below(static_cast<std::uint64_t>(cold)));
        }
      }
    }
    for (auto& in : body) instrs.push_back(std::move(in));
    layout.push_back(L);
  }
  const std::size_t wrap = instrs.size();
  {
    ListingInstruction br;
    br.address = addr(wrap);
    br.mnemonic = "b";
    br.kind = InstrKind::Branch;
    // Re-entry skips the first body instruction so a full period stays an
    // exact multiple of the phase lengths.
    br.target = addr(1);
    instrs.push_back(std::move(br));
  }

  Workload out;
  out.listing = ProgramListing(std::move(instrs));
  const auto& prog = out.listing;

  std::vector<std::uint64_t> regs(static_cast<std::size_t>(spec.num_regs), 0);
  const double toggle_p = spec.value_entropy / spec.value_bits;
  std::size_t phase = 0, in_phase = 0, pc = 0;
  out.trace.reserve(spec.instruction_count);
  while (out.trace.size() < spec.instruction_count) {
    const auto& in = prog[pc];
    TraceInstruction t;
    t.address = in.address;
    t.mnemonic = in.mnemonic;
    for (int r : in.sources)
      t.sources.push_back(SourceOperand{r, spec.reg_bits, RegisterValue(regs[static_cast<std::size_t>(r)], spec.reg_bits)});
    for (int r : in.destinations) {
      auto& v = regs[static_cast<std::size_t>(r)];
      std::uint64_t mask = 0;
      for (int b = 0; b < spec.value_bits; ++b)
        if (rng.chance(toggle_p)) mask |= std::uint64_t{1} << b;
      t.destinations.push_back(DestOperand{r, spec.reg_bits, RegisterValue(v, spec.reg_bits),
                                           RegisterValue(v ^ mask, spec.reg_bits)});
      v ^= mask;
    }
    out.trace.push_back(std::move(t));

    if (pc == wrap) {
      pc = 1;
      phase = 0;
      in_phase = 1;
      continue;
    }
    ++in_phase;
    const auto& L = layout[phase];
    if (pc == L.skip) {
      pc = rng.chance(phases[phase].skip_probability.value_or(spec.skip_probability)) ? L.c_part : pc + 1;
    } else if (pc == L.backedge) {
      const std::size_t len = phases[phase].length;
      if (len == 0 || in_phase < len) {
        pc = L.head;
      } else {
        pc = L.end;
        ++phase;
        in_phase = 0;
      }
    } else {
      ++pc;
    }
  }
  return out;
}

inline Trace generate_synthetic(const SyntheticSpec& spec) { return generate_workload(spec).trace; }

/// Share of register accesses that touch registers below `working_set`.
inline double hot_share(const Trace& trace, int working_set) {
  std::size_t hot = 0, total = 0;
  for (const auto& t : trace)
    for_each_access(t, [&](const RegisterAccess& a) {
      ++total;
      if (a.reg < working_set) ++hot;
    });
  return total == 0 ? 0.0 : static_cast<double>(hot) / static_cast<double>(total);
}

// A hot working set with a cold tail, single phase.
inline SyntheticSpec hot_cold_preset(std::uint64_t seed = 11, std::size_t count = 20000) {
  SyntheticSpec s;
  s.instruction_count = count;
  s.working_set = 2;
  s.hot_ratio = 0.95;
  s.seed = seed;
  return s;
}

// Alternates a two-register hot loop with a loop cycling the whole register
// file. Both loops have fixed-length iterations; the phase length is rounded
// up to a whole number of them, so phase changes land on its multiples.
inline SyntheticSpec phase_alternating_preset(std::uint64_t seed = 23, std::size_t phase_length = 32000,
                                              std::size_t periods = 2) {
  SyntheticSpec s;
  s.seed = seed;
  phase_length = std::max<std::size_t>(1, (phase_length + s.body_length - 1) / s.body_length) * s.body_length;
  s.instruction_count = 2 * phase_length * periods;
  s.phases = {PhaseSpec{phase_length, 2, 0.98, RegisterOrder::Random, 0.0},
              PhaseSpec{phase_length, 32, 1.0, RegisterOrder::Cycle, 0.0}};
  return s;
}

}  // namespace rtrf

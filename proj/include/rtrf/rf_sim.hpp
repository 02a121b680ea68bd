#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <variant>
#include <vector>

#include "rtrf/cost_model.hpp"
#include "rtrf/recommender.hpp"
#include "rtrf/trace.hpp"

namespace rtrf {

struct SimState {
  AllocationMode mode = AllocationMode::Horizontal;
  std::int64_t last_reg = 0;  // vertical alignment anchor
  std::vector<RegisterValue> contents;
  CostTriple accumulated;
  std::uint64_t instructions = 0;
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t switches = 0;
  CostTriple switch_cost;
};

inline SimState initial_state(const ValidatedGeometry& g, AllocationMode mode = AllocationMode::Horizontal) {
  SimState s;
  s.mode = mode;
  s.contents.assign(static_cast<std::size_t>(g.num_regs()), RegisterValue::zeros(static_cast<int>(g.reg_bits())));
  return s;
}

namespace detail {

// Charges one access against the state without touching the trace counters.
inline CostTriple charge(SimState& s, std::int64_t reg, AccessKind kind, const RegisterValue& new_value,
                         const ValidatedGeometry& g, const CostParams& p) {
  check_register(g, reg);
  auto& slot = s.contents[static_cast<std::size_t>(reg)];
  CostTriple c = kind == AccessKind::Read ? access_cost(g, p, s.mode, kind, s.last_reg, reg, slot)
                                          : access_cost(g, p, s.mode, kind, s.last_reg, reg, slot, new_value);
  if (kind == AccessKind::Write) slot = new_value;
  s.last_reg = reg;
  s.accumulated += c;
  return c;
}

inline RegisterValue widen(const RegisterValue& v, const ValidatedGeometry& g) {
  if (v.width() == g.reg_bits()) return v;
  return RegisterValue(v.bits(), static_cast<int>(g.reg_bits()));
}

}  // namespace detail

/// Costs one trace access under the current mode. The previous value is the
/// tracked register content (all zeros before the first write).
inline CostTriple step(SimState& s, const RegisterAccess& access, const ValidatedGeometry& g, const CostParams& p) {
  CostTriple c = detail::charge(s, access.reg, access.kind, detail::widen(access.after, g), g, p);
  if (access.kind == AccessKind::Read) ++s.reads;
  else ++s.writes;
  return c;
}

/// Stores all registers under the old mode and restores them under the new
/// one, in ascending register order. No-op when the mode is unchanged.
inline CostTriple switch_mode(SimState& s, AllocationMode new_mode, const ValidatedGeometry& g, const CostParams& p) {
  if (new_mode == s.mode) return {};
  CostTriple total;
  for (std::int64_t r = 0; r < g.num_regs(); ++r) total += detail::charge(s, r, AccessKind::Read, {}, g, p);
  s.mode = new_mode;
  for (std::int64_t r = 0; r < g.num_regs(); ++r)
    total += detail::charge(s, r, AccessKind::Write, s.contents[static_cast<std::size_t>(r)], g, p);
  ++s.switches;
  s.switch_cost += total;
  return total;
}

struct StaticPolicy {
  AllocationMode mode = AllocationMode::Horizontal;
};
struct RecPolicy {
  RecommendationTable table;
};
struct LOptPolicy {
  std::vector<AllocationMode> schedule;  // one mode per window
};
using Policy = std::variant<StaticPolicy, RecPolicy, LOptPolicy>;

// Exact per-access average: total / count.
struct Average {
  std::int64_t total = 0;  // in the metric's base unit (shifts, aJ, ps)
  std::uint64_t count = 0;
  double value() const { return count == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(count); }
};

struct CostReport {
  CostTriple totals;       // accesses plus switch overhead
  CostTriple switch_cost;  // overhead part of `totals`
  std::uint64_t instructions = 0;
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t switches = 0;
  std::vector<RegisterValue> final_contents;

  std::uint64_t accesses() const { return reads + writes; }
  Average avg_shifts() const { return {totals.shifts, accesses()}; }
  /// Attojoules per access; divide value() by 1000 for fJ.
  Average avg_energy() const { return {totals.energy.milli(), accesses()}; }
  /// Picoseconds per access; divide value() by 1000 for ns.
  Average avg_latency() const { return {totals.latency.milli(), accesses()}; }

  friend bool operator==(const CostReport&, const CostReport&) = default;
};

struct SimOptions {
  std::size_t window = 100;
  bool charge_switches = true;  // false: mode flips are free and leave the anchor alone
};

namespace detail {

inline AllocationMode policy_mode(const Policy& policy, const Trace& trace, std::size_t index, std::size_t window) {
  if (auto* st = std::get_if<StaticPolicy>(&policy)) return st->mode;
  if (auto* rec = std::get_if<RecPolicy>(&policy)) {
    auto m = rec->table.find(trace[index].address);
    if (!m)
      throw Error("no recommendation for address " + text::hex(trace[index].address) + " (trace instruction " +
                  std::to_string(index) + ")");
    return *m;
  }
  const auto& sched = std::get<LOptPolicy>(policy).schedule;
  const std::size_t w = index / window;
  if (w >= sched.size()) throw Error("LOPT schedule has no entry for window " + std::to_string(w));
  return sched[w];
}

}  // namespace detail

/// Runs the trace, consulting the policy every `window` executed instructions
/// and switching allocation on a mismatch.
inline CostReport simulate(const Trace& trace, const ValidatedGeometry& g, const CostParams& p, const Policy& policy,
                           const SimOptions& opt) {
  if (opt.window == 0) throw std::invalid_argument("window must be positive");
  if (auto* rec = std::get_if<RecPolicy>(&policy)) {
    if (rec->table.geometry_fingerprint() != geometry_fingerprint(g))
      throw Error("recommendation table geometry fingerprint " + text::hex(rec->table.geometry_fingerprint()) +
                  " does not match " + text::hex(geometry_fingerprint(g)));
    if (rec->table.window() != opt.window)
      throw Error("recommendation table was built for window " + std::to_string(rec->table.window()) +
                  ", simulation uses " + std::to_string(opt.window));
  }
  SimState s = initial_state(g, trace.empty() ? AllocationMode::Horizontal
                                              : detail::policy_mode(policy, trace, 0, opt.window));
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (i > 0 && i % opt.window == 0) {
      const AllocationMode want = detail::policy_mode(policy, trace, i, opt.window);
      if (want != s.mode) {
        if (opt.charge_switches) {
          switch_mode(s, want, g, p);
        } else {
          s.mode = want;
          ++s.switches;
        }
      }
    }
    for_each_access(trace[i], [&](const RegisterAccess& a) { step(s, a, g, p); });
    ++s.instructions;
  }
  CostReport r;
  r.totals = s.accumulated;
  r.switch_cost = s.switch_cost;
  r.instructions = s.instructions;
  r.reads = s.reads;
  r.writes = s.writes;
  r.switches = s.switches;
  r.final_contents = std::move(s.contents);
  return r;
}

inline CostReport simulate(const Trace& trace, const ValidatedGeometry& g, const CostParams& p, const Policy& policy,
                           std::size_t window) {
  return simulate(trace, g, p, policy, SimOptions{window, true});
}

enum class LoptObjective { Shifts, Energy, Latency };

/// Cost of every window under one static mode, with no switching.
inline std::vector<CostTriple> window_costs(const Trace& trace, const ValidatedGeometry& g, const CostParams& p,
                                            AllocationMode mode, std::size_t window) {
  if (window == 0) throw std::invalid_argument("window must be positive");
  std::vector<CostTriple> out((trace.size() + window - 1) / window);
  SimState s = initial_state(g, mode);
  for (std::size_t i = 0; i < trace.size(); ++i)
    for_each_access(trace[i], [&](const RegisterAccess& a) { out[i / window] += step(s, a, g, p); });
  return out;
}

/// Per-window mode with the lower cost for that window alone; switching
/// overhead is not part of the choice. Ties keep the previous window's mode.
inline std::vector<AllocationMode> lopt_schedule(const Trace& trace, const ValidatedGeometry& g, std::size_t window,
                                                 LoptObjective objective = LoptObjective::Shifts,
                                                 const CostParams& p = {}) {
  auto h = window_costs(trace, g, p, AllocationMode::Horizontal, window);
  auto v = window_costs(trace, g, p, AllocationMode::Vertical, window);
  auto metric = [&](const CostTriple& c) -> std::int64_t {
    switch (objective) {
      case LoptObjective::Shifts: return c.shifts;
      case LoptObjective::Energy: return c.energy.milli();
      case LoptObjective::Latency: return c.latency.milli();
    }
    return c.shifts;
  };
  std::vector<AllocationMode> sched;
  sched.reserve(h.size());
  AllocationMode prev = AllocationMode::Horizontal;
  for (std::size_t w = 0; w < h.size(); ++w) {
    const auto ch = metric(h[w]), cv = metric(v[w]);
    if (ch < cv) prev = AllocationMode::Horizontal;
    else if (cv < ch) prev = AllocationMode::Vertical;
    sched.push_back(prev);
  }
  return sched;
}

struct ComparisonReport {
  CostReport rec;
  CostReport lopt;
  CostReport static_h;
  CostReport static_v;

  // Per-metric minimum and maximum over the two static runs.
  CostTriple static_best() const {
    return {std::min(static_h.totals.shifts, static_v.totals.shifts),
            std::min(static_h.totals.energy, static_v.totals.energy),
            std::min(static_h.totals.latency, static_v.totals.latency)};
  }
  CostTriple static_worst() const {
    return {std::max(static_h.totals.shifts, static_v.totals.shifts),
            std::max(static_h.totals.energy, static_v.totals.energy),
            std::max(static_h.totals.latency, static_v.totals.latency)};
  }
};

inline ComparisonReport run_versions(const Trace& trace, const ValidatedGeometry& g, const CostParams& p,
                                     const RecommendationTable& table, const SimOptions& opt,
                                     LoptObjective objective = LoptObjective::Shifts) {
  ComparisonReport r;
  r.rec = simulate(trace, g, p, RecPolicy{table}, opt);
  r.lopt = simulate(trace, g, p, LOptPolicy{lopt_schedule(trace, g, opt.window, objective, p)}, opt);
  r.static_h = simulate(trace, g, p, StaticPolicy{AllocationMode::Horizontal}, opt);
  r.static_v = simulate(trace, g, p, StaticPolicy{AllocationMode::Vertical}, opt);
  return r;
}

}  // namespace rtrf

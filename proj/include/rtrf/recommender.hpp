#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "rtrf/cfg.hpp"
#include "rtrf/cost_model.hpp"
#include "rtrf/geometry.hpp"

namespace rtrf {

struct PruneOptions {
  // Completed paths for explicit enumeration; live merged path classes per step
  // for the expected-score walk.
  std::size_t max_paths = 4096;
  double min_weight = 1e-6;
  // Shifts the vertical score must undercut the horizontal one by. Unset means
  // the geometry's store/restore shift cost.
  std::optional<std::int64_t> hysteresis;
};

// How per-path scores are folded into one decision.
enum class PathAggregation {
  ExpectedScore,  // compare probability-weighted mean scores
  WeightedVote,   // each path votes for its cheaper mode with its weight
};

struct Path {
  std::vector<std::size_t> instructions;  // listing indices
  double weight = 1.0;
  bool truncated = false;  // ended before the window at a ret/unknown successor
};

struct PathSet {
  std::vector<Path> paths;
  double pruned_mass = 0.0;  // probability mass dropped before renormalisation
  std::size_t pruned_paths = 0;
};

/// Shift cost of storing and restoring the whole register file: R horizontal
/// accesses plus one vertical walk across every register offset.
inline std::int64_t store_restore_shifts(const ValidatedGeometry& g) {
  return g.num_regs() * shift_cost_h(g) + vertical_slot(g, g.num_regs() - 1) * g.num_tracks();
}

inline std::int64_t hysteresis_margin(const ValidatedGeometry& g, const PruneOptions& prune) {
  return prune.hysteresis.value_or(store_restore_shifts(g));
}

namespace detail {

inline constexpr std::size_t kNoInstr = std::numeric_limits<std::size_t>::max();

struct Step {
  std::size_t instr;  // kNoInstr ends the path
  double probability;
};

// Successors of `instr`, with call/return matched against `stack` when possible.
inline void successors(const Cfg& cfg, std::size_t instr, std::vector<std::size_t>& stack,
                       std::vector<Step>& out, std::optional<std::size_t>& push, bool& pop) {
  out.clear();
  push.reset();
  pop = false;
  const auto& blk = cfg.blocks()[cfg.block_of(instr)];
  if (instr != blk.last) {
    out.push_back({instr + 1, 1.0});
    return;
  }
  const auto& in = cfg.listing()[instr];
  if (in.kind == InstrKind::Call && in.target) {
    push = cfg.continuation_of(instr).value_or(kNoInstr);
  } else if (in.kind == InstrKind::Return && !stack.empty()) {
    pop = true;
    out.push_back({stack.back(), 1.0});
    return;
  }
  for (std::size_t e : blk.out_edges) {
    const auto& edge = cfg.edge(e);
    out.push_back({edge.to == kUnknownBlock ? kNoInstr : cfg.blocks()[edge.to].first, edge.probability});
  }
}

}  // namespace detail

/// Walks every probability-weighted path of up to `window` instructions that
/// starts at listing index `start`, heaviest partial path first. The visitor
/// supplies `State initial()`, `void visit(State&, std::size_t instr)` and
/// `void complete(State&&, double weight, bool truncated)`. Returns the pruned
/// probability mass; completed weights are not renormalised here.
template <class Visitor>
std::pair<double, std::size_t> walk_paths(const Cfg& cfg, std::size_t start, std::size_t window,
                                          const PruneOptions& prune, Visitor& visitor) {
  using State = decltype(visitor.initial());
  struct Cursor {
    std::size_t instr;
    std::size_t steps;
    double weight;
    std::uint64_t seq;
    std::vector<std::size_t> stack;
    State state;
  };
  auto lighter = [](const Cursor& a, const Cursor& b) {
    return a.weight != b.weight ? a.weight < b.weight : a.seq > b.seq;
  };

  double pruned = 0.0;
  std::size_t pruned_paths = 0;
  if (window == 0) {
    visitor.complete(visitor.initial(), 1.0, false);
    return {pruned, pruned_paths};
  }

  std::vector<Cursor> heap;
  std::uint64_t seq = 0;
  std::size_t completed = 0;
  heap.push_back(Cursor{start, 0, 1.0, seq++, {}, visitor.initial()});
  std::vector<detail::Step> next;
  std::optional<std::size_t> push;
  bool pop = false;

  while (!heap.empty()) {
    if (completed >= prune.max_paths) {
      for (const auto& c : heap) pruned += c.weight;
      pruned_paths += heap.size();
      break;
    }
    std::pop_heap(heap.begin(), heap.end(), lighter);
    Cursor c = std::move(heap.back());
    heap.pop_back();

    while (true) {
      visitor.visit(c.state, c.instr);
      if (++c.steps == window) {
        visitor.complete(std::move(c.state), c.weight, false);
        ++completed;
        break;
      }
      detail::successors(cfg, c.instr, c.stack, next, push, pop);
      if (pop) c.stack.pop_back();
      if (push) c.stack.push_back(*push);
      std::erase_if(next, [](const detail::Step& s) { return s.probability <= 0.0; });

      if (next.empty()) {
        visitor.complete(std::move(c.state), c.weight, true);
        ++completed;
        break;
      }
      if (next.size() == 1 && next[0].instr != detail::kNoInstr) {
        c.weight *= next[0].probability;
        if (c.weight < prune.min_weight) {
          pruned += c.weight;
          ++pruned_paths;
          break;
        }
        c.instr = next[0].instr;
        continue;
      }
      for (const auto& s : next) {
        const double w = c.weight * s.probability;
        if (w < prune.min_weight) {
          pruned += w;
          ++pruned_paths;
          continue;
        }
        if (s.instr == detail::kNoInstr) {
          visitor.complete(State(c.state), w, true);
          ++completed;
          continue;
        }
        heap.push_back(Cursor{s.instr, c.steps, w, seq++, c.stack, c.state});
        std::push_heap(heap.begin(), heap.end(), lighter);
      }
      break;
    }
  }
  return {pruned, pruned_paths};
}

/// Enumerates the weighted paths from `start_address`. Pruned mass is reported
/// and the surviving weights are renormalised to sum to one.
inline PathSet enumerate_paths(const Cfg& cfg, std::uint64_t start_address, std::size_t window,
                               const PruneOptions& prune = {}) {
  auto start = cfg.listing().index_of(start_address);
  if (!start) throw Error("address " + text::hex(start_address) + " is not in the CFG");
  struct Collector {
    PathSet* set;
    std::vector<std::size_t> initial() const { return {}; }
    void visit(std::vector<std::size_t>& s, std::size_t instr) const { s.push_back(instr); }
    void complete(std::vector<std::size_t>&& s, double w, bool truncated) const {
      set->paths.push_back(Path{std::move(s), w, truncated});
    }
  };
  PathSet set;
  Collector collector{&set};
  auto [pruned, pruned_paths] = walk_paths(cfg, *start, window, prune, collector);
  set.pruned_mass = pruned;
  set.pruned_paths = pruned_paths;
  if (pruned > 0.0) {
    double kept = 0.0;
    for (const auto& p : set.paths) kept += p.weight;
    if (kept > 0.0)
      for (auto& p : set.paths) p.weight /= kept;
  }
  return set;
}

// Incremental shift scoring of one access stream in both allocations.
class PathScorer {
 public:
  struct State {
    std::int64_t accesses = 0;
    std::int64_t slot_distance = 0;  // sum of |vertical slot deltas|
    std::int64_t anchor = -1;        // vertical slot of the last access, -1 before the first
  };

  PathScorer(const ProgramListing& listing, const ValidatedGeometry& g)
      : shift_h_(shift_cost_h(g)), tracks_(g.num_tracks()) {
    slots_.reserve(listing.size());
    for (const auto& in : listing.instructions()) {
      std::vector<std::int64_t> s;
      for (int r : in.sources) s.push_back(checked_slot(g, r, in));
      for (int r : in.destinations) s.push_back(checked_slot(g, r, in));
      slots_.push_back(std::move(s));
    }
  }

  void visit(State& st, std::size_t instr) const {
    for (std::int64_t slot : slots_[instr]) {
      ++st.accesses;
      if (st.anchor >= 0) st.slot_distance += std::llabs(slot - st.anchor);
      st.anchor = slot;
    }
  }

  const std::vector<std::int64_t>& slots(std::size_t instr) const { return slots_[instr]; }
  std::int64_t shift_h() const { return shift_h_; }
  std::int64_t tracks() const { return tracks_; }

  std::int64_t horizontal(const State& st) const { return st.accesses * shift_h_; }
  std::int64_t vertical(const State& st) const { return st.slot_distance * tracks_; }
  std::int64_t score(const State& st, AllocationMode m) const {
    return m == AllocationMode::Horizontal ? horizontal(st) : vertical(st);
  }

 private:
  static std::int64_t checked_slot(const ValidatedGeometry& g, int reg, const ListingInstruction& in) {
    if (reg < 0 || reg >= g.num_regs())
      throw Error("register " + std::to_string(reg) + " at " + text::hex(in.address) + " exceeds the geometry");
    return vertical_slot(g, reg);
  }

  std::int64_t shift_h_;
  std::int64_t tracks_;
  std::vector<std::vector<std::int64_t>> slots_;
};

/// Total shifts of the path's register accesses. Vertical scoring starts
/// aligned with the first accessed register.
inline std::int64_t score_path(const ProgramListing& listing, const Path& path, AllocationMode mode,
                               const ValidatedGeometry& g) {
  PathScorer scorer(listing, g);
  PathScorer::State st;
  for (std::size_t i : path.instructions) scorer.visit(st, i);
  return scorer.score(st, mode);
}

struct Recommendation {
  AllocationMode mode = AllocationMode::Horizontal;
  double expected_h = 0.0;  // weighted mean shift score
  double expected_v = 0.0;
  double vertical_vote = 0.0;  // normalised weight of paths preferring vertical
  std::size_t paths = 0;
  double pruned_mass = 0.0;
};

// True when `v + margin` is below `h` by more than rounding noise.
inline bool vertical_wins(double h, double v, double margin) {
  return v + margin < h - 1e-9 * std::max(1.0, std::abs(h));
}

struct ExpectedScores {
  double kept = 0.0;    // probability mass of scored paths
  double pruned = 0.0;  // mass dropped by min_weight or the class cap
  double sum_h = 0.0;   // sum of weight * horizontal shifts
  double sum_v = 0.0;
  std::size_t classes = 0;  // completed path classes
};

/// Probability-weighted shift sums over all window-length paths from `start`.
/// Paths that reach the same instruction with the same call stack and vertical
/// anchor after the same number of steps are merged; their future costs are
/// identical, so the sums are exact. `max_paths` caps the live classes per step
/// (lightest dropped) and `min_weight` drops light classes.
inline ExpectedScores expected_scores(const Cfg& cfg, const PathScorer& scorer, std::size_t start, std::size_t window,
                                      const PruneOptions& prune) {
  struct Key {
    std::size_t instr;
    std::int64_t anchor;
    std::vector<std::size_t> stack;
    auto operator<=>(const Key&) const = default;
  };
  struct Mass {
    double w = 0, acc = 0, dist = 0;  // weight and weighted partial sums
  };
  ExpectedScores out;
  if (window == 0) {
    out.kept = 1.0;
    out.classes = 1;
    return out;
  }
  auto finish = [&](const Mass& m) {
    out.kept += m.w;
    out.sum_h += m.acc * static_cast<double>(scorer.shift_h());
    out.sum_v += m.dist * static_cast<double>(scorer.tracks());
    ++out.classes;
  };

  std::map<Key, Mass> frontier, next;
  frontier[Key{start, -1, {}}] = Mass{1.0, 0.0, 0.0};
  std::vector<detail::Step> succ;
  std::optional<std::size_t> push;
  bool pop = false;
  for (std::size_t step = 0; step < window && !frontier.empty(); ++step) {
    next.clear();
    for (auto& [key, m] : frontier) {
      std::int64_t anchor = key.anchor, dist = 0;
      const auto& slots = scorer.slots(key.instr);
      for (std::int64_t slot : slots) {
        if (anchor >= 0) dist += std::llabs(slot - anchor);
        anchor = slot;
      }
      Mass cur{m.w, m.acc + m.w * static_cast<double>(slots.size()), m.dist + m.w * static_cast<double>(dist)};
      if (step + 1 == window) {
        finish(cur);
        continue;
      }
      auto stack = key.stack;
      detail::successors(cfg, key.instr, stack, succ, push, pop);
      if (pop) stack.pop_back();
      if (push) stack.push_back(*push);
      bool any = false;
      for (const auto& s : succ) {
        if (s.probability <= 0.0) continue;
        any = true;
        const Mass part{cur.w * s.probability, cur.acc * s.probability, cur.dist * s.probability};
        if (part.w < prune.min_weight) {
          out.pruned += part.w;
          continue;
        }
        if (s.instr == detail::kNoInstr) {
          finish(part);
          continue;
        }
        auto& dst = next[Key{s.instr, anchor, stack}];
        dst.w += part.w;
        dst.acc += part.acc;
        dst.dist += part.dist;
      }
      if (!any) finish(cur);
    }
    if (next.size() > prune.max_paths) {
      std::vector<std::map<Key, Mass>::iterator> order;
      for (auto it = next.begin(); it != next.end(); ++it) order.push_back(it);
      std::stable_sort(order.begin(), order.end(), [](auto a, auto b) { return a->second.w > b->second.w; });
      for (std::size_t i = prune.max_paths; i < order.size(); ++i) {
        out.pruned += order[i]->second.w;
        next.erase(order[i]);
      }
    }
    std::swap(frontier, next);
  }
  return out;
}

/// Recommendation for a listing index, using a prepared scorer.
inline Recommendation recommend_at(const Cfg& cfg, const PathScorer& scorer, std::size_t start, std::size_t window,
                                   std::int64_t margin, const PruneOptions& prune,
                                   PathAggregation aggregation = PathAggregation::ExpectedScore) {
  Recommendation rec;
  if (aggregation == PathAggregation::ExpectedScore) {
    const auto e = expected_scores(cfg, scorer, start, window, prune);
    rec.paths = e.classes;
    rec.pruned_mass = e.pruned;
    if (e.kept <= 0.0) return rec;
    rec.expected_h = e.sum_h / e.kept;
    rec.expected_v = e.sum_v / e.kept;
    if (vertical_wins(rec.expected_h, rec.expected_v, static_cast<double>(margin)))
      rec.mode = AllocationMode::Vertical;
    return rec;
  }

  struct Voter {
    const PathScorer* scorer;
    std::int64_t margin;
    double kept = 0, sum_h = 0, sum_v = 0, vote_v = 0;
    std::size_t paths = 0;
    PathScorer::State initial() const { return {}; }
    void visit(PathScorer::State& s, std::size_t instr) const { scorer->visit(s, instr); }
    void complete(PathScorer::State&& s, double w, bool) {
      const auto h = scorer->horizontal(s);
      const auto v = scorer->vertical(s);
      kept += w;
      sum_h += w * static_cast<double>(h);
      sum_v += w * static_cast<double>(v);
      if (v + margin < h) vote_v += w;
      ++paths;
    }
  };
  Voter s{&scorer, margin};
  rec.pruned_mass = walk_paths(cfg, start, window, prune, s).first;
  rec.paths = s.paths;
  if (s.kept <= 0.0) return rec;
  rec.expected_h = s.sum_h / s.kept;
  rec.expected_v = s.sum_v / s.kept;
  rec.vertical_vote = s.vote_v / s.kept;
  if (rec.vertical_vote > 0.5 + 1e-12) rec.mode = AllocationMode::Vertical;
  return rec;
}

/// Preferred allocation for the window starting at `address`. Ties and gains
/// within the hysteresis margin resolve to horizontal.
inline AllocationMode recommend_bit(const Cfg& cfg, std::uint64_t address, std::size_t window,
                                    const ValidatedGeometry& g, const PruneOptions& prune = {},
                                    PathAggregation aggregation = PathAggregation::ExpectedScore) {
  auto start = cfg.listing().index_of(address);
  if (!start) throw Error("address " + text::hex(address) + " is not in the CFG");
  PathScorer scorer(cfg.listing(), g);
  return recommend_at(cfg, scorer, *start, window, hysteresis_margin(g, prune), prune, aggregation).mode;
}

// One allocation bit per listed instruction.
class RecommendationTable {
 public:
  RecommendationTable() = default;
  RecommendationTable(std::size_t window, std::uint64_t geometry_fp) : window_(window), fingerprint_(geometry_fp) {}

  std::size_t window() const { return window_; }
  std::uint64_t geometry_fingerprint() const { return fingerprint_; }
  std::size_t size() const { return addresses_.size(); }
  const std::vector<std::uint64_t>& addresses() const { return addresses_; }
  const std::vector<AllocationMode>& modes() const { return modes_; }

  void add(std::uint64_t address, AllocationMode mode) {
    if (!index_.emplace(address, modes_.size()).second)
      throw Error("duplicate recommendation for " + text::hex(address));
    addresses_.push_back(address);
    modes_.push_back(mode);
  }

  std::optional<AllocationMode> find(std::uint64_t address) const {
    auto it = index_.find(address);
    if (it == index_.end()) return std::nullopt;
    return modes_[it->second];
  }

  /// Bits packed eight per byte in listing order.
  std::vector<std::uint8_t> packed() const {
    std::vector<std::uint8_t> out((modes_.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < modes_.size(); ++i)
      if (modes_[i] == AllocationMode::Vertical) out[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    return out;
  }

  friend bool operator==(const RecommendationTable& a, const RecommendationTable& b) {
    return a.window_ == b.window_ && a.fingerprint_ == b.fingerprint_ && a.addresses_ == b.addresses_ &&
           a.modes_ == b.modes_;
  }

 private:
  std::size_t window_ = 0;
  std::uint64_t fingerprint_ = 0;
  std::vector<std::uint64_t> addresses_;
  std::vector<AllocationMode> modes_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

/// Derives the bit of every instruction. Addresses are split across worker
/// threads; the result does not depend on the split.
inline RecommendationTable build_table(const Cfg& cfg, const ValidatedGeometry& g, std::size_t window,
                                       const PruneOptions& prune = {},
                                       PathAggregation aggregation = PathAggregation::ExpectedScore,
                                       unsigned threads = 0) {
  const auto& listing = cfg.listing();
  const std::size_t n = listing.size();
  PathScorer scorer(listing, g);
  const std::int64_t margin = hysteresis_margin(g, prune);
  std::vector<AllocationMode> modes(n, AllocationMode::Horizontal);

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      modes[i] = recommend_at(cfg, scorer, i, window, margin, prune, aggregation).mode;
  };
  if (threads <= 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t b = t * chunk, e = std::min(n, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }

  RecommendationTable table(window, geometry_fingerprint(g));
  for (std::size_t i = 0; i < n; ++i) table.add(listing[i].address, modes[i]);
  return table;
}

inline void write_table(std::ostream& out, const RecommendationTable& t) {
  out << "RECBITS window=" << t.window() << " geomfp=" << text::hex(t.geometry_fingerprint()) << '\n';
  for (std::size_t i = 0; i < t.size(); ++i)
    out << text::hex(t.addresses()[i]) << ' ' << static_cast<int>(t.modes()[i]) << '\n';
}

inline std::string serialize_table(const RecommendationTable& t) {
  std::ostringstream os;
  write_table(os, t);
  return os.str();
}

inline RecommendationTable parse_table(std::istream& in) {
  std::optional<RecommendationTable> table;
  text::for_each_line(in, [&](std::size_t line, std::string_view raw) {
    auto tok = text::tokenize(raw);
    if (tok.empty()) return;
    if (!table) {
      if (tok.size() != 3 || tok[0].text != "RECBITS" || tok[1].text.substr(0, 7) != "window=" ||
          tok[2].text.substr(0, 7) != "geomfp=")
        throw ParseError(line, tok[0].column, "expected header 'RECBITS window=<n> geomfp=<hex>'");
      auto w = text::require_dec(tok[1].text.substr(7), line, tok[1].column + 7, "window");
      auto fp = text::require_hex(tok[2].text.substr(7), line, tok[2].column + 7, "fingerprint");
      table.emplace(static_cast<std::size_t>(w), fp);
      return;
    }
    if (tok.size() != 2) throw ParseError(line, tok[0].column, "expected '<addr> <0|1>'");
    auto addr = text::require_hex(tok[0].text, line, tok[0].column, "address");
    if (tok[1].text != "0" && tok[1].text != "1") throw ParseError(line, tok[1].column, "recommendation bit must be 0 or 1");
    try {
      table->add(addr, tok[1].text == "1" ? AllocationMode::Vertical : AllocationMode::Horizontal);
    } catch (const Error& e) {
      throw ParseError(line, tok[0].column, e.what());
    }
  });
  if (!table) throw ParseError(1, 1, "missing RECBITS header");
  return *table;
}

inline RecommendationTable parse_table(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_table(in);
}

}  // namespace rtrf

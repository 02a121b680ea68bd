#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rtrf/listing.hpp"
#include "rtrf/trace.hpp"

namespace rtrf {

enum class EdgeKind : std::uint8_t { Fallthrough, Taken, Jump, Call, Return, Unknown };

inline const char* to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::Fallthrough: return "fallthrough";
    case EdgeKind::Taken: return "taken";
    case EdgeKind::Jump: return "jump";
    case EdgeKind::Call: return "call";
    case EdgeKind::Return: return "return";
    case EdgeKind::Unknown: return "unknown";
  }
  return "?";
}

// Successor of indirect branches and of control leaving the listing.
inline constexpr std::size_t kUnknownBlock = std::numeric_limits<std::size_t>::max();

struct CfgEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  EdgeKind kind = EdgeKind::Fallthrough;
  double probability = 1.0;

  friend bool operator==(const CfgEdge&, const CfgEdge&) = default;
};

struct BasicBlock {
  std::size_t first = 0;  // instruction indices, inclusive
  std::size_t last = 0;
  std::vector<std::size_t> out_edges;
  std::vector<std::size_t> in_edges;

  friend bool operator==(const BasicBlock&, const BasicBlock&) = default;
};

struct BranchCounts {
  std::uint64_t taken = 0;
  std::uint64_t not_taken = 0;
};

// Empirical control-flow outcomes keyed by instruction address.
struct BranchProfile {
  std::map<std::uint64_t, BranchCounts> branches;
  std::map<std::uint64_t, std::map<std::uint64_t, std::uint64_t>> returns;  // ret -> continuation -> count
};

class Cfg {
 public:
  const ProgramListing& listing() const { return listing_; }
  const std::vector<BasicBlock>& blocks() const { return blocks_; }
  const std::vector<CfgEdge>& edges() const { return edges_; }
  const CfgEdge& edge(std::size_t i) const { return edges_[i]; }
  std::size_t block_of(std::size_t instr) const { return block_of_[instr]; }
  bool annotated() const { return annotated_; }

  /// Instruction that control returns to after the call at `call_instr`.
  std::optional<std::size_t> continuation_of(std::size_t call_instr) const {
    auto it = continuation_.find(call_instr);
    if (it == continuation_.end()) return std::nullopt;
    return it->second;
  }

  const std::map<std::size_t, std::size_t>& call_linkage() const { return continuation_; }

 private:
  friend Cfg build_cfg(const ProgramListing&);
  friend Cfg annotate_probabilities(Cfg, const BranchProfile&);

  std::size_t add_edge(std::size_t from, std::size_t to, EdgeKind kind, double p) {
    edges_.push_back({from, to, kind, p});
    blocks_[from].out_edges.push_back(edges_.size() - 1);
    if (to != kUnknownBlock) blocks_[to].in_edges.push_back(edges_.size() - 1);
    return edges_.size() - 1;
  }

  ProgramListing listing_;
  std::vector<BasicBlock> blocks_;
  std::vector<CfgEdge> edges_;
  std::vector<std::size_t> block_of_;
  std::map<std::size_t, std::size_t> continuation_;
  bool annotated_ = false;
};

/// Partitions the listing into basic blocks and links them. Conditional edges
/// start at 0.5/0.5 and return edges are uniform until annotated.
inline Cfg build_cfg(const ProgramListing& listing) {
  Cfg cfg;
  cfg.listing_ = listing;
  const std::size_t n = listing.size();
  if (n == 0) return cfg;

  std::vector<bool> leader(n, false);
  leader[0] = true;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& in = listing[i];
    if (in.target) leader[*listing.index_of(*in.target)] = true;
    if (in.ends_block() && i + 1 < n) leader[i + 1] = true;
  }
  cfg.block_of_.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (leader[i]) cfg.blocks_.push_back(BasicBlock{i, i, {}, {}});
    cfg.blocks_.back().last = i;
    cfg.block_of_[i] = cfg.blocks_.size() - 1;
  }

  auto block_at = [&](std::uint64_t address) { return cfg.block_of_[*listing.index_of(address)]; };
  for (std::size_t b = 0; b < cfg.blocks_.size(); ++b) {
    const std::size_t last = cfg.blocks_[b].last;
    const auto& in = listing[last];
    const bool has_next = last + 1 < n;
    switch (in.kind) {
      case InstrKind::Seq:
        if (has_next) cfg.add_edge(b, cfg.block_of_[last + 1], EdgeKind::Fallthrough, 1.0);
        break;
      case InstrKind::Branch:
        if (in.target) cfg.add_edge(b, block_at(*in.target), EdgeKind::Jump, 1.0);
        else cfg.add_edge(b, kUnknownBlock, EdgeKind::Unknown, 1.0);
        break;
      case InstrKind::CondBranch:
        cfg.add_edge(b, block_at(*in.target), EdgeKind::Taken, 0.5);
        cfg.add_edge(b, has_next ? cfg.block_of_[last + 1] : kUnknownBlock,
                     has_next ? EdgeKind::Fallthrough : EdgeKind::Unknown, 0.5);
        break;
      case InstrKind::Call:
        if (in.target) {
          cfg.add_edge(b, block_at(*in.target), EdgeKind::Call, 1.0);
          if (has_next) cfg.continuation_[last] = last + 1;
        } else {
          cfg.add_edge(b, kUnknownBlock, EdgeKind::Unknown, 1.0);
        }
        break;
      case InstrKind::Return:
        break;  // linked below
    }
  }

  // Every ret reachable inside a callee returns to each continuation of the
  // calls into that callee. Nested calls are stepped over via their continuation.
  std::map<std::size_t, std::set<std::size_t>> callers;  // callee entry block -> continuation instrs
  for (const auto& [call, cont] : cfg.continuation_) callers[block_at(*listing[call].target)].insert(cont);
  std::map<std::size_t, std::set<std::size_t>> ret_targets;  // ret block -> continuation instrs
  for (const auto& [entry, conts] : callers) {
    std::vector<bool> seen(cfg.blocks_.size(), false);
    std::vector<std::size_t> work{entry};
    seen[entry] = true;
    while (!work.empty()) {
      std::size_t b = work.back();
      work.pop_back();
      const std::size_t last = cfg.blocks_[b].last;
      if (listing[last].kind == InstrKind::Return) ret_targets[b].insert(conts.begin(), conts.end());
      auto visit = [&](std::size_t to) {
        if (to != kUnknownBlock && !seen[to]) {
          seen[to] = true;
          work.push_back(to);
        }
      };
      for (std::size_t e : cfg.blocks_[b].out_edges) {
        const auto& edge = cfg.edges_[e];
        if (edge.kind == EdgeKind::Call) {
          if (auto c = cfg.continuation_of(last)) visit(cfg.block_of_[*c]);
        } else if (edge.kind != EdgeKind::Return) {
          visit(edge.to);
        }
      }
    }
  }
  for (const auto& [b, conts] : ret_targets) {
    const double p = 1.0 / static_cast<double>(conts.size());
    for (std::size_t c : conts) cfg.add_edge(b, cfg.block_of_[c], EdgeKind::Return, p);
  }
  return cfg;
}

/// Counts conditional-branch and return outcomes over the first `limit`
/// instructions of the trace. Throws Error on addresses missing from the
/// listing or on a successor inconsistent with a conditional branch.
inline BranchProfile profile_branches(const ProgramListing& listing, const Trace& trace,
                                      std::size_t limit = 1'000'000) {
  BranchProfile profile;
  const std::size_t end = std::min(limit, trace.size());
  for (std::size_t k = 0; k < end; ++k) {
    auto idx = listing.index_of(trace[k].address);
    if (!idx)
      throw Error("trace instruction " + std::to_string(k) + " at " + text::hex(trace[k].address) +
                  " is not in the listing");
    const auto& in = listing[*idx];
    if (k + 1 >= trace.size()) break;
    const std::uint64_t next = trace[k + 1].address;
    if (in.kind == InstrKind::CondBranch) {
      auto& c = profile.branches[in.address];
      const bool has_fall = *idx + 1 < listing.size();
      if (next == *in.target) ++c.taken;
      else if (has_fall && next == listing[*idx + 1].address) ++c.not_taken;
      else
        throw Error("trace instruction " + std::to_string(k + 1) + " at " + text::hex(next) +
                    " does not follow the conditional branch at " + text::hex(in.address));
    } else if (in.kind == InstrKind::Return) {
      ++profile.returns[in.address][next];
    }
  }
  return profile;
}

/// Replaces edge probabilities with profiled frequencies. Unexecuted
/// conditional branches keep 0.5/0.5 and unobserved returns stay uniform.
inline Cfg annotate_probabilities(Cfg cfg, const BranchProfile& profile) {
  const auto& listing = cfg.listing_;
  for (auto& block : cfg.blocks_) {
    const auto& in = listing[block.last];
    if (in.kind == InstrKind::CondBranch) {
      double p_taken = 0.5;
      if (auto it = profile.branches.find(in.address); it != profile.branches.end()) {
        const auto total = it->second.taken + it->second.not_taken;
        if (total > 0) p_taken = static_cast<double>(it->second.taken) / static_cast<double>(total);
      }
      for (std::size_t e : block.out_edges) {
        auto& edge = cfg.edges_[e];
        edge.probability = edge.kind == EdgeKind::Taken ? p_taken : 1.0 - p_taken;
      }
    } else if (in.kind == InstrKind::Return && !block.out_edges.empty()) {
      std::uint64_t total = 0;
      std::vector<std::uint64_t> counts;
      auto it = profile.returns.find(in.address);
      for (std::size_t e : block.out_edges) {
        std::uint64_t c = 0;
        if (it != profile.returns.end()) {
          auto addr = listing[cfg.blocks_[cfg.edges_[e].to].first].address;
          if (auto jt = it->second.find(addr); jt != it->second.end()) c = jt->second;
        }
        counts.push_back(c);
        total += c;
      }
      for (std::size_t k = 0; k < block.out_edges.size(); ++k) {
        cfg.edges_[block.out_edges[k]].probability =
            total > 0 ? static_cast<double>(counts[k]) / static_cast<double>(total)
                      : 1.0 / static_cast<double>(block.out_edges.size());
      }
    }
  }
  cfg.annotated_ = true;
  return cfg;
}

inline Cfg annotate_probabilities(Cfg cfg, const Trace& trace, std::size_t limit = 1'000'000) {
  auto profile = profile_branches(cfg.listing(), trace, limit);
  return annotate_probabilities(std::move(cfg), profile);
}

/// Listing rebuilt from the blocks in order.
inline ProgramListing to_listing(const Cfg& cfg) {
  std::vector<ListingInstruction> out;
  for (const auto& b : cfg.blocks())
    for (std::size_t i = b.first; i <= b.last; ++i) out.push_back(cfg.listing()[i]);
  return ProgramListing(std::move(out));
}

// Human-readable dump: one B line per block, one E line per edge.
inline void write_cfg(std::ostream& out, const Cfg& cfg) {
  const auto& l = cfg.listing();
  out << "CFG blocks=" << cfg.blocks().size() << " edges=" << cfg.edges().size()
      << " annotated=" << (cfg.annotated() ? 1 : 0) << '\n';
  for (std::size_t b = 0; b < cfg.blocks().size(); ++b) {
    const auto& blk = cfg.blocks()[b];
    out << "B " << b << ' ' << text::hex(l[blk.first].address) << ' ' << text::hex(l[blk.last].address) << ' '
        << (blk.last - blk.first + 1) << '\n';
  }
  for (const auto& e : cfg.edges()) {
    char prob[32];
    auto [ptr, ec] = std::to_chars(prob, prob + sizeof prob, e.probability);
    out << "E " << e.from << ' ' << (e.to == kUnknownBlock ? std::string("?") : std::to_string(e.to)) << ' '
        << to_string(e.kind) << ' ' << std::string(prob, ptr) << '\n';
  }
}

}  // namespace rtrf

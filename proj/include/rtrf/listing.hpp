#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rtrf/text.hpp"

namespace rtrf {

enum class InstrKind : std::uint8_t { Seq, Branch, CondBranch, Call, Return };

inline const char* to_string(InstrKind k) {
  switch (k) {
    case InstrKind::Seq: return "seq";
    case InstrKind::Branch: return "br";
    case InstrKind::CondBranch: return "cbr";
    case InstrKind::Call: return "call";
    case InstrKind::Return: return "ret";
  }
  return "?";
}

// One static instruction of the analysed program.
struct ListingInstruction {
  std::uint64_t address = 0;
  std::string mnemonic;
  std::vector<int> sources;
  std::vector<int> destinations;
  InstrKind kind = InstrKind::Seq;
  std::optional<std::uint64_t> target;  // absent for ret and indirect br/call

  bool ends_block() const { return kind != InstrKind::Seq; }

  friend bool operator==(const ListingInstruction&, const ListingInstruction&) = default;
};

class ProgramListing {
 public:
  ProgramListing() = default;

  /// Throws Error when addresses are not strictly increasing, a conditional
  /// branch lacks a target, a ret carries one, or a target is not listed.
  explicit ProgramListing(std::vector<ListingInstruction> instrs) : instrs_(std::move(instrs)) {
    for (std::size_t i = 0; i < instrs_.size(); ++i) {
      const auto& in = instrs_[i];
      if (i > 0 && in.address <= instrs_[i - 1].address)
        throw Error("listing addresses must be strictly increasing at " + text::hex(in.address));
      index_.emplace(in.address, i);
    }
    for (const auto& in : instrs_) {
      if (in.kind == InstrKind::CondBranch && !in.target)
        throw Error("conditional branch at " + text::hex(in.address) + " has no target");
      if (in.kind == InstrKind::Return && in.target) throw Error("ret at " + text::hex(in.address) + " carries a target");
      if (in.kind == InstrKind::Seq && in.target) throw Error("seq at " + text::hex(in.address) + " carries a target");
      if (in.target && !index_.count(*in.target))
        throw Error("unresolved target " + text::hex(*in.target) + " at " + text::hex(in.address));
    }
  }

  const std::vector<ListingInstruction>& instructions() const { return instrs_; }
  std::size_t size() const { return instrs_.size(); }
  bool empty() const { return instrs_.empty(); }
  const ListingInstruction& operator[](std::size_t i) const { return instrs_[i]; }

  std::optional<std::size_t> index_of(std::uint64_t address) const {
    auto it = index_.find(address);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  friend bool operator==(const ProgramListing& a, const ProgramListing& b) { return a.instrs_ == b.instrs_; }

 private:
  std::vector<ListingInstruction> instrs_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

namespace detail {

inline std::vector<int> parse_reg_set(std::string_view value, std::size_t line, std::size_t column, int num_regs) {
  std::vector<int> regs;
  if (value == "-") return regs;
  for (auto item : text::split(value, ',')) {
    std::int64_t r = text::require_dec(item, line, column, "register");
    if (r < 0 || r >= num_regs) throw ParseError(line, column, "register " + std::string(item) + " out of range");
    regs.push_back(static_cast<int>(r));
    column += item.size() + 1;
  }
  return regs;
}

}  // namespace detail

/// Parses the line format
///   <addr:hex> <mnemonic> ; S=<r,..|-> D=<r,..|-> K=<seq|br|cbr|call|ret> [T=<addr:hex>]
inline ProgramListing parse_listing(std::istream& in, int num_regs = 32) {
  std::vector<ListingInstruction> instrs;
  std::vector<std::size_t> lines;
  text::for_each_line(in, [&](std::size_t line, std::string_view raw) {
    auto tok = text::tokenize(raw);
    if (tok.empty()) return;
    auto fail = [&](std::size_t col, const std::string& msg) { throw ParseError(line, col, msg); };
    if (tok.size() < 6 || tok.size() > 7)
      fail(tok.front().column, "expected '<addr> <mnemonic> ; S=.. D=.. K=.. [T=..]'");
    if (tok[2].text != ";") fail(tok[2].column, "expected ';'");

    ListingInstruction ins;
    ins.address = text::require_hex(tok[0].text, line, tok[0].column, "address");
    ins.mnemonic = std::string(tok[1].text);
    auto field = [&](std::size_t i, std::string_view key) {
      if (tok[i].text.substr(0, key.size()) != key) fail(tok[i].column, "expected '" + std::string(key) + "'");
      return tok[i].text.substr(key.size());
    };
    ins.sources = detail::parse_reg_set(field(3, "S="), line, tok[3].column + 2, num_regs);
    ins.destinations = detail::parse_reg_set(field(4, "D="), line, tok[4].column + 2, num_regs);
    auto kind = field(5, "K=");
    if (kind == "seq") ins.kind = InstrKind::Seq;
    else if (kind == "br") ins.kind = InstrKind::Branch;
    else if (kind == "cbr") ins.kind = InstrKind::CondBranch;
    else if (kind == "call") ins.kind = InstrKind::Call;
    else if (kind == "ret") ins.kind = InstrKind::Return;
    else fail(tok[5].column + 2, "unknown kind '" + std::string(kind) + "'");
    if (tok.size() == 7) ins.target = text::require_hex(field(6, "T="), line, tok[6].column + 2, "target");
    instrs.push_back(std::move(ins));
    lines.push_back(line);
  });
  // Rerun the structural checks with line information.
  for (std::size_t i = 1; i < instrs.size(); ++i)
    if (instrs[i].address <= instrs[i - 1].address)
      throw ParseError(lines[i], 1, "addresses must be strictly increasing");
  std::unordered_map<std::uint64_t, bool> known;
  for (const auto& in : instrs) known[in.address] = true;
  for (std::size_t i = 0; i < instrs.size(); ++i) {
    const auto& in = instrs[i];
    if (in.kind == InstrKind::CondBranch && !in.target) throw ParseError(lines[i], 1, "conditional branch needs T=");
    if ((in.kind == InstrKind::Return || in.kind == InstrKind::Seq) && in.target)
      throw ParseError(lines[i], 1, std::string(to_string(in.kind)) + " cannot carry a target");
    if (in.target && !known.count(*in.target))
      throw ParseError(lines[i], 1, "unresolved target " + text::hex(*in.target));
  }
  return ProgramListing(std::move(instrs));
}

inline ProgramListing parse_listing(std::string_view text, int num_regs = 32) {
  std::istringstream in{std::string(text)};
  return parse_listing(in, num_regs);
}

inline void write_listing_instruction(std::ostream& out, const ListingInstruction& in) {
  auto regs = [&](const std::vector<int>& rs) {
    if (rs.empty()) {
      out << '-';
      return;
    }
    for (std::size_t i = 0; i < rs.size(); ++i) out << (i ? "," : "") << rs[i];
  };
  out << text::hex(in.address) << ' ' << in.mnemonic << " ; S=";
  regs(in.sources);
  out << " D=";
  regs(in.destinations);
  out << " K=" << to_string(in.kind);
  if (in.target) out << " T=" << text::hex(*in.target);
  out << '\n';
}

inline void serialize_listing(std::ostream& out, const ProgramListing& listing) {
  for (const auto& in : listing.instructions()) write_listing_instruction(out, in);
}

inline std::string serialize_listing(const ProgramListing& listing) {
  std::ostringstream os;
  serialize_listing(os, listing);
  return os.str();
}

}  // namespace rtrf

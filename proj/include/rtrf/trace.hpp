#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rtrf/cost_model.hpp"
#include "rtrf/text.hpp"

namespace rtrf {

struct SourceOperand {
  int reg = 0;
  int width = 64;  // accessed width in bits
  RegisterValue value;

  friend bool operator==(const SourceOperand&, const SourceOperand&) = default;
};

struct DestOperand {
  int reg = 0;
  int width = 64;
  RegisterValue before;
  RegisterValue after;

  friend bool operator==(const DestOperand&, const DestOperand&) = default;
};

// One executed instruction with its ordered register operands.
struct TraceInstruction {
  std::uint64_t address = 0;
  std::string mnemonic;
  std::vector<SourceOperand> sources;
  std::vector<DestOperand> destinations;

  friend bool operator==(const TraceInstruction&, const TraceInstruction&) = default;
};

using Trace = std::vector<TraceInstruction>;

struct RegisterAccess {
  int reg = 0;
  AccessKind kind = AccessKind::Read;
  RegisterValue before;
  RegisterValue after;  // equals `before` for reads

  friend bool operator==(const RegisterAccess&, const RegisterAccess&) = default;
};

// Register file shape the trace is checked against.
struct TraceFormat {
  int num_regs = 32;
  int reg_bits = 64;
};

/// Visits the accesses of one instruction: all sources as reads in listed
/// order, then all destinations as writes in listed order.
template <class Fn>
void for_each_access(const TraceInstruction& instr, Fn&& fn) {
  for (const auto& s : instr.sources) fn(RegisterAccess{s.reg, AccessKind::Read, s.value, s.value});
  for (const auto& d : instr.destinations) fn(RegisterAccess{d.reg, AccessKind::Write, d.before, d.after});
}

inline std::vector<RegisterAccess> access_sequence(const TraceInstruction& instr) {
  std::vector<RegisterAccess> out;
  out.reserve(instr.sources.size() + instr.destinations.size());
  for_each_access(instr, [&](const RegisterAccess& a) { out.push_back(a); });
  return out;
}

inline std::size_t count_accesses(const Trace& trace) {
  std::size_t n = 0;
  for (const auto& i : trace) n += i.sources.size() + i.destinations.size();
  return n;
}

namespace detail {

struct OperandField {
  std::string_view text;
  std::size_t column;
};

inline std::vector<OperandField> split_operand(std::string_view item, std::size_t column) {
  std::vector<OperandField> out;
  for (auto part : text::split(item, ':')) {
    out.push_back({part, column});
    column += part.size() + 1;
  }
  return out;
}

inline int parse_reg(const OperandField& f, std::size_t line, const TraceFormat& fmt) {
  std::int64_t r = text::require_dec(f.text, line, f.column, "register");
  if (r < 0 || r >= fmt.num_regs)
    throw ParseError(line, f.column, "register " + std::string(f.text) + " out of range [0, " +
                                         std::to_string(fmt.num_regs) + ")");
  return static_cast<int>(r);
}

inline int parse_width(const OperandField& f, std::size_t line, const TraceFormat& fmt) {
  std::int64_t w = text::require_dec(f.text, line, f.column, "width");
  if (w < 1 || w > fmt.reg_bits)
    throw ParseError(line, f.column, "access width " + std::string(f.text) + " exceeds register width " +
                                         std::to_string(fmt.reg_bits));
  return static_cast<int>(w);
}

inline RegisterValue parse_value(const OperandField& f, std::size_t line, const TraceFormat& fmt) {
  std::uint64_t v = text::require_hex(f.text, line, f.column, "value");
  if (fmt.reg_bits < 64 && (v >> fmt.reg_bits) != 0)
    throw ParseError(line, f.column, "value " + std::string(f.text) + " does not fit in " +
                                         std::to_string(fmt.reg_bits) + " bits");
  return RegisterValue(v, fmt.reg_bits);
}

}  // namespace detail

/// Parses the line format
///   I <addr:hex> <mnemonic> S <reg:width:value,...|-> D <reg:width:before:after,...|->
/// Blank lines and `#` comments are skipped.
inline Trace parse_trace(std::istream& in, const TraceFormat& fmt = {}) {
  if (fmt.reg_bits < 1 || fmt.reg_bits > 64) throw std::invalid_argument("trace reg_bits must be in [1, 64]");
  Trace trace;
  text::for_each_line(in, [&](std::size_t line, std::string_view raw) {
    auto tok = text::tokenize(raw);
    if (tok.empty()) return;
    auto fail = [&](std::size_t col, const std::string& msg) { throw ParseError(line, col, msg); };
    if (tok[0].text != "I") fail(tok[0].column, "expected 'I' record marker");
    if (tok.size() != 7) fail(tok.back().column, "expected 7 fields 'I <addr> <mnemonic> S <list> D <list>', got " +
                                                      std::to_string(tok.size()));
    if (tok[3].text != "S") fail(tok[3].column, "expected 'S'");
    if (tok[5].text != "D") fail(tok[5].column, "expected 'D'");

    TraceInstruction instr;
    instr.address = text::require_hex(tok[1].text, line, tok[1].column, "address");
    instr.mnemonic = std::string(tok[2].text);

    if (tok[4].text != "-") {
      std::size_t col = tok[4].column;
      for (auto item : text::split(tok[4].text, ',')) {
        auto f = detail::split_operand(item, col);
        if (f.size() != 3) fail(col, "source operand must be reg:width:value, got '" + std::string(item) + "'");
        instr.sources.push_back(SourceOperand{detail::parse_reg(f[0], line, fmt), detail::parse_width(f[1], line, fmt),
                                              detail::parse_value(f[2], line, fmt)});
        col += item.size() + 1;
      }
    }
    if (tok[6].text != "-") {
      std::size_t col = tok[6].column;
      for (auto item : text::split(tok[6].text, ',')) {
        auto f = detail::split_operand(item, col);
        if (f.size() != 4)
          fail(col, "destination operand must be reg:width:before:after, got '" + std::string(item) + "'");
        instr.destinations.push_back(DestOperand{detail::parse_reg(f[0], line, fmt),
                                                 detail::parse_width(f[1], line, fmt),
                                                 detail::parse_value(f[2], line, fmt),
                                                 detail::parse_value(f[3], line, fmt)});
        col += item.size() + 1;
      }
    }
    trace.push_back(std::move(instr));
  });
  return trace;
}

inline Trace parse_trace(std::string_view text, const TraceFormat& fmt = {}) {
  std::istringstream in{std::string(text)};
  return parse_trace(in, fmt);
}

inline void write_instruction(std::ostream& out, const TraceInstruction& instr) {
  out << "I " << text::hex(instr.address) << ' ' << instr.mnemonic << " S ";
  if (instr.sources.empty()) out << '-';
  for (std::size_t i = 0; i < instr.sources.size(); ++i) {
    const auto& s = instr.sources[i];
    if (i) out << ',';
    out << s.reg << ':' << s.width << ':' << text::hex(s.value.bits());
  }
  out << " D ";
  if (instr.destinations.empty()) out << '-';
  for (std::size_t i = 0; i < instr.destinations.size(); ++i) {
    const auto& d = instr.destinations[i];
    if (i) out << ',';
    out << d.reg << ':' << d.width << ':' << text::hex(d.before.bits()) << ':' << text::hex(d.after.bits());
  }
  out << '\n';
}

inline void serialize_trace(std::ostream& out, const Trace& trace) {
  for (const auto& instr : trace) write_instruction(out, instr);
}

inline std::string serialize_trace(const Trace& trace) {
  std::ostringstream os;
  serialize_trace(os, trace);
  return os.str();
}

}  // namespace rtrf

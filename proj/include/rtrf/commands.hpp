#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rtrf/cfg.hpp"
#include "rtrf/recommender.hpp"
#include "rtrf/rf_sim.hpp"
#include "rtrf/sweep.hpp"
#include "rtrf/synthetic.hpp"

namespace rtrf::cmd {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Writes to `path`, or to `fallback` when the path is empty.
inline void emit(const std::string& path, const std::string& content, std::ostream& fallback) {
  if (path.empty()) {
    fallback << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
  if (!out) throw Error("write to '" + path + "' failed");
}

template <class Parse>
auto parse_file(const std::string& path, Parse&& parse) {
  auto content = read_file(path);
  try {
    return parse(content);
  } catch (const ParseError& e) {
    throw Error(path + ": " + e.what());
  }
}

/// `spec` is a file path, or inline `key=value` pairs when no such file exists.
inline ValidatedGeometry load_geometry(const std::string& spec) {
  if (spec.empty()) return default_geometry();
  const bool is_file = std::filesystem::is_regular_file(spec);
  if (!is_file && spec.find('=') == std::string::npos) throw Error("geometry file '" + spec + "' not found");
  const std::string text = is_file ? read_file(spec) : spec;
  try {
    return validate_geometry(parse_geometry_config(text));
  } catch (const ParseError& e) {
    throw Error("geometry " + spec + ": " + e.what());
  }
}

inline TraceFormat trace_format(const ValidatedGeometry& g) {
  return TraceFormat{static_cast<int>(g.num_regs()), static_cast<int>(g.reg_bits())};
}

inline Trace load_trace(const std::string& path, const ValidatedGeometry& g) {
  if (path.empty()) throw Error("--trace is required");
  return parse_file(path, [&](const std::string& s) { return parse_trace(s, trace_format(g)); });
}

inline ProgramListing load_listing(const std::string& path, const ValidatedGeometry& g) {
  if (path.empty()) throw Error("--listing is required");
  return parse_file(path, [&](const std::string& s) { return parse_listing(s, static_cast<int>(g.num_regs())); });
}

struct GenOptions {
  std::string preset;  // "", "hot-cold" or "phase"; replaces `spec` except seed, count and phase_length
  SyntheticSpec spec;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> count;
  std::optional<std::size_t> phase_length;  // phase preset only
  std::string listing_out;
  std::string trace_out;
};

inline int gen(const GenOptions& o, std::ostream& out) {
  SyntheticSpec spec = o.spec;
  if (o.preset == "hot-cold") spec = hot_cold_preset();
  else if (o.preset == "phase") spec = phase_alternating_preset(23, o.phase_length.value_or(32000));
  else if (!o.preset.empty()) throw Error("unknown preset '" + o.preset + "'");
  if (o.seed) spec.seed = *o.seed;
  if (o.phase_length && o.preset != "phase") throw Error("--phase-length needs --preset phase");
  if (o.count) spec.instruction_count = *o.count;
  auto w = generate_workload(spec);
  if (!o.listing_out.empty()) emit(o.listing_out, serialize_listing(w.listing), out);
  emit(o.trace_out, serialize_trace(w.trace), out);
  return 0;
}

struct CfgOptions {
  std::string geometry;
  std::string listing;
  std::string trace;  // optional branch profile
  std::string out;
};

inline int cfg(const CfgOptions& o, std::ostream& out) {
  const auto g = load_geometry(o.geometry);
  auto graph = build_cfg(load_listing(o.listing, g));
  if (!o.trace.empty()) graph = annotate_probabilities(std::move(graph), load_trace(o.trace, g));
  std::ostringstream os;
  write_cfg(os, graph);
  emit(o.out, os.str(), out);
  return 0;
}

struct RecommendOptions {
  std::string geometry;
  std::string listing;
  std::string trace;  // branch profile; without it every branch is 50/50
  std::size_t window = 100;
  PruneOptions prune;
  PathAggregation aggregation = PathAggregation::ExpectedScore;
  unsigned threads = 0;
  std::string out;
};

inline RecommendationTable make_table(const RecommendOptions& o, const ValidatedGeometry& g) {
  auto graph = build_cfg(load_listing(o.listing, g));
  if (!o.trace.empty()) graph = annotate_probabilities(std::move(graph), load_trace(o.trace, g));
  return build_table(graph, g, o.window, o.prune, o.aggregation, o.threads);
}

inline int recommend(const RecommendOptions& o, std::ostream& out) {
  const auto g = load_geometry(o.geometry);
  emit(o.out, serialize_table(make_table(o, g)), out);
  return 0;
}

enum class PolicyKind { StaticH, StaticV, Rec, LOpt };

struct SimulateOptions {
  std::string geometry;
  std::string trace;
  std::size_t window = 100;
  PolicyKind policy = PolicyKind::StaticH;
  std::string rec_table;
  LoptObjective lopt_objective = LoptObjective::Shifts;
  std::string out;
};

inline void write_cost_report(std::ostream& out, const CostReport& r) {
  out << "instructions=" << r.instructions << '\n'
      << "reads=" << r.reads << '\n'
      << "writes=" << r.writes << '\n'
      << "switches=" << r.switches << '\n'
      << "total_shifts=" << r.totals.shifts << '\n'
      << "total_energy_fj=" << to_string(r.totals.energy) << '\n'
      << "total_latency_ns=" << to_string(r.totals.latency) << '\n'
      << "switch_shifts=" << r.switch_cost.shifts << '\n'
      << "switch_energy_fj=" << to_string(r.switch_cost.energy) << '\n'
      << "switch_latency_ns=" << to_string(r.switch_cost.latency) << '\n'
      << "avg_shifts=" << detail::fixed(r.avg_shifts().value(), 6) << '\n'
      << "avg_energy_fj=" << detail::fixed(r.avg_energy().value() / 1000.0, 6) << '\n'
      << "avg_latency_ns=" << detail::fixed(r.avg_latency().value() / 1000.0, 6) << '\n';
}

inline int simulate(const SimulateOptions& o, std::ostream& out) {
  const auto g = load_geometry(o.geometry);
  const auto trace = load_trace(o.trace, g);
  Policy policy = StaticPolicy{AllocationMode::Horizontal};
  switch (o.policy) {
    case PolicyKind::StaticH: break;
    case PolicyKind::StaticV: policy = StaticPolicy{AllocationMode::Vertical}; break;
    case PolicyKind::Rec:
      if (o.rec_table.empty()) throw Error("--policy rec needs --rec-table");
      policy = RecPolicy{parse_file(o.rec_table, [](const std::string& s) { return parse_table(s); })};
      break;
    case PolicyKind::LOpt:
      policy = LOptPolicy{lopt_schedule(trace, g, o.window, o.lopt_objective)};
      break;
  }
  std::ostringstream os;
  write_cost_report(os, rtrf::simulate(trace, g, CostParams{}, policy, SimOptions{o.window, true}));
  emit(o.out, os.str(), out);
  return 0;
}

struct CompareOptions {
  RecommendOptions rec;  // listing, trace, geometry, window and pruning
  std::string rec_table;  // reuse a table instead of deriving one
  std::string benchmark = "bench";
  LoptObjective lopt_objective = LoptObjective::Shifts;
  std::string out;
};

/// Runs REC, LOPT and both static policies and prints one CSV row.
inline int compare(const CompareOptions& o, std::ostream& out) {
  const auto g = load_geometry(o.rec.geometry);
  const auto trace = load_trace(o.rec.trace, g);
  const auto table = o.rec_table.empty()
                         ? make_table(o.rec, g)
                         : parse_file(o.rec_table, [](const std::string& s) { return parse_table(s); });
  const auto r = run_versions(trace, g, CostParams{}, table, SimOptions{o.rec.window, true}, o.lopt_objective);
  SweepRow row{o.benchmark, g.num_aps(), g.num_tracks(), g.track_length(), o.rec.window,
               r.rec.totals, r.lopt.totals, r.static_h.totals, r.static_v.totals, r.rec.accesses()};
  emit(o.out, serialize_csv({row}), out);
  return 0;
}

struct SweepOptions {
  std::string geometry;
  std::vector<std::string> listings;
  std::vector<std::string> traces;
  std::vector<std::string> names;
  std::vector<std::string> presets;  // synthetic benchmarks generated in place
  SweepSpec spec;
  std::string out;
};

inline int sweep(const SweepOptions& o, std::ostream& out, std::ostream& err) {
  const auto g = load_geometry(o.geometry);
  if (o.listings.size() != o.traces.size()) throw Error("--listing and --trace must be given in pairs");
  if (!o.names.empty() && o.names.size() != o.listings.size())
    throw Error("--name must be given once per listing/trace pair");
  std::vector<Benchmark> benches;
  for (std::size_t i = 0; i < o.listings.size(); ++i) {
    const std::string name =
        o.names.empty() ? std::filesystem::path(o.traces[i]).stem().string() : o.names[i];
    benches.push_back(Benchmark{name, load_listing(o.listings[i], g), load_trace(o.traces[i], g)});
  }
  for (const auto& p : o.presets) {
    SyntheticSpec s;
    if (p == "hot-cold") s = hot_cold_preset();
    else if (p == "phase") s = phase_alternating_preset();
    else throw Error("unknown preset '" + p + "'");
    auto w = generate_workload(s);
    benches.push_back(Benchmark{p, std::move(w.listing), std::move(w.trace)});
  }
  if (benches.empty()) throw Error("no benchmarks given");
  SweepSpec spec = o.spec;
  spec.base = g.raw();
  auto result = run_sweep(benches, spec);
  for (const auto& w : result.warnings) err << "warning: " << w << '\n';
  emit(o.out, serialize_csv(result.rows), out);
  return 0;
}

struct ReportOptions {
  std::string in;
  std::string out;
};

inline int report(const ReportOptions& o, std::ostream& out, std::ostream& err) {
  if (o.in.empty()) throw Error("report needs an input CSV");
  const auto rows = parse_file(o.in, [](const std::string& s) { return parse_csv(s); });
  std::ostringstream os;
  const auto warnings = write_report(os, rows);
  if (warnings) err << "warning: " << warnings << " row(s) without register accesses\n";
  emit(o.out, os.str(), out);
  return 0;
}

}  // namespace rtrf::cmd

#pragma once

#include <algorithm>
#include <cstdint>
#include <future>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "rtrf/cfg.hpp"
#include "rtrf/recommender.hpp"
#include "rtrf/rf_sim.hpp"

namespace rtrf {

// Published SRAM register file figures, used only for comparison.
struct SramBaseline {
  Energy read_min = Energy::from_milli(390'000);
  Energy read_max = Energy::from_milli(710'000);
  Energy write_min = Energy::from_milli(800'000);
  Energy write_max = Energy::from_milli(1'570'000);
  Latency latency_min = Latency::from_milli(164'000);
  Latency latency_max = Latency::from_milli(254'000);
};

inline const char* sram_band_flag(double avg_energy_fj, const SramBaseline& sram = {}) {
  if (avg_energy_fj < sram.read_min.units()) return "below SRAM band";
  if (avg_energy_fj > sram.write_max.units()) return "above SRAM band";
  return "within SRAM band";
}

struct SweepSpec {
  RegisterFileGeometry base;      // base row and defaults for the groups
  std::size_t base_window = 100;
  std::vector<std::int64_t> aps;  // n_ap group at the base geometry and window
  std::vector<std::size_t> windows;
  std::vector<std::int64_t> tracks;  // track counts; width follows from R*B
  std::int64_t fixed_aps = 8;        // n_ap used by the window and track groups
  CostParams params;
  PruneOptions prune;
  PathAggregation aggregation = PathAggregation::ExpectedScore;
  LoptObjective lopt_objective = LoptObjective::Shifts;
  unsigned threads = 0;
};

struct SweepConfig {
  RegisterFileGeometry geometry;
  std::size_t window = 100;
  friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

struct Benchmark {
  std::string name;
  ProgramListing listing;
  Trace trace;
};

struct SweepRow {
  std::string benchmark;
  std::int64_t num_aps = 0;
  std::int64_t num_tracks = 0;
  std::int64_t track_length = 0;
  std::size_t window = 0;
  CostTriple rec, opt, v1, v2;  // v1 = static horizontal, v2 = static vertical
  std::uint64_t num_accesses = 0;

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<std::string> warnings;
};

/// Configurations in output order with duplicates and infeasible geometries
/// removed; each skip adds a warning.
inline std::vector<SweepConfig> sweep_configs(const SweepSpec& spec, std::vector<std::string>* warnings = nullptr) {
  std::vector<SweepConfig> out;
  auto add = [&](RegisterFileGeometry g, std::size_t window, const std::string& label) {
    if (window == 0) {
      if (warnings) warnings->push_back("skipping " + label + ": window must be positive");
      return;
    }
    if (auto e = geometry_error(g)) {
      if (warnings) warnings->push_back("skipping " + label + ": " + describe(*e));
      return;
    }
    SweepConfig c{g, window};
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  };
  add(spec.base, spec.base_window, "base configuration");
  for (auto n : spec.aps) {
    auto g = spec.base;
    g.num_aps = n;
    add(g, spec.base_window, "num_aps=" + std::to_string(n));
  }
  for (auto w : spec.windows) {
    auto g = spec.base;
    g.num_aps = spec.fixed_aps;
    add(g, w, "window=" + std::to_string(w));
  }
  for (auto t : spec.tracks) {
    auto g = spec.base;
    g.num_aps = spec.fixed_aps;
    g.num_tracks = t;
    const std::int64_t bits = g.num_regs * g.reg_bits;
    if (t <= 0 || bits % t != 0) {
      if (warnings) warnings->push_back("skipping num_tracks=" + std::to_string(t) + ": does not divide " +
                                        std::to_string(bits) + " bits");
      continue;
    }
    g.track_length = bits / t;
    add(g, spec.base_window, "num_tracks=" + std::to_string(t));
  }
  return out;
}

/// Runs every benchmark under every configuration. Rows come out benchmark
/// by benchmark in configuration order whatever the completion order.
inline SweepResult run_sweep(const std::vector<Benchmark>& benchmarks, const SweepSpec& spec) {
  SweepResult result;
  const auto configs = sweep_configs(spec, &result.warnings);
  std::vector<Cfg> cfgs;
  for (const auto& b : benchmarks) cfgs.push_back(annotate_probabilities(build_cfg(b.listing), b.trace));

  struct Job {
    std::size_t bench, config;
  };
  std::vector<Job> jobs;
  for (std::size_t b = 0; b < benchmarks.size(); ++b)
    for (std::size_t c = 0; c < configs.size(); ++c) jobs.push_back({b, c});
  result.rows.resize(jobs.size());

  auto run = [&](const Job& j) {
    const auto& b = benchmarks[j.bench];
    const auto& c = configs[j.config];
    const auto g = validate_geometry(c.geometry);
    const auto table = build_table(cfgs[j.bench], g, c.window, spec.prune, spec.aggregation, 1);
    const auto r = run_versions(b.trace, g, spec.params, table, SimOptions{c.window, true}, spec.lopt_objective);
    SweepRow row;
    row.benchmark = b.name;
    row.num_aps = g.num_aps();
    row.num_tracks = g.num_tracks();
    row.track_length = g.track_length();
    row.window = c.window;
    row.rec = r.rec.totals;
    row.opt = r.lopt.totals;
    row.v1 = r.static_h.totals;
    row.v2 = r.static_v.totals;
    row.num_accesses = r.rec.accesses();
    return row;
  };

  unsigned threads = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t begin = 0; begin < jobs.size(); begin += threads) {
    const std::size_t end = std::min(jobs.size(), begin + threads);
    std::vector<std::future<SweepRow>> batch;
    for (std::size_t i = begin; i < end; ++i) batch.push_back(std::async(std::launch::async, run, jobs[i]));
    for (std::size_t i = begin; i < end; ++i) result.rows[i] = batch[i - begin].get();
  }
  return result;
}

inline constexpr const char* kCsvHeader =
    "benchmark,num_aps,num_tracks,track_length,window_size,"
    "recommended_total_shifts,opt_total_shifts,v1_total_shifts,v2_total_shifts,"
    "recommended_total_energy,opt_total_energy,v1_total_energy,v2_total_energy,"
    "recommended_total_latency,opt_total_latency,v1_total_latency,v2_total_latency,num_accesses";

/// Energies in fJ and latencies in ns, both with three exact decimals.
inline void write_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.benchmark << ',' << r.num_aps << ',' << r.num_tracks << ',' << r.track_length << ',' << r.window;
    for (const auto* c : {&r.rec, &r.opt, &r.v1, &r.v2}) out << ',' << c->shifts;
    for (const auto* c : {&r.rec, &r.opt, &r.v1, &r.v2}) out << ',' << to_string(c->energy);
    for (const auto* c : {&r.rec, &r.opt, &r.v1, &r.v2}) out << ',' << to_string(c->latency);
    out << ',' << r.num_accesses << '\n';
  }
}

inline std::string serialize_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  write_csv(os, rows);
  return os.str();
}

inline std::vector<SweepRow> parse_csv(std::istream& in) {
  std::vector<SweepRow> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line != kCsvHeader) throw ParseError(line_no, 1, "unexpected CSV header");
      header = true;
      continue;
    }
    auto f = text::split(line, ',');
    if (f.size() != 18) throw ParseError(line_no, 1, "expected 18 fields, got " + std::to_string(f.size()));
    std::size_t col = 1;
    std::vector<std::size_t> cols;
    for (auto s : f) {
      cols.push_back(col);
      col += s.size() + 1;
    }
    auto integer = [&](std::size_t i) {
      std::int64_t v = 0;
      if (!text::parse_int(f[i], v) || v < 0) throw ParseError(line_no, cols[i], "bad integer '" + std::string(f[i]) + "'");
      return v;
    };
    auto milli = [&](std::size_t i) {
      auto v = parse_milli(f[i]);
      if (!v) throw ParseError(line_no, cols[i], "bad decimal '" + std::string(f[i]) + "'");
      return *v;
    };
    SweepRow r;
    r.benchmark = std::string(f[0]);
    r.num_aps = integer(1);
    r.num_tracks = integer(2);
    r.track_length = integer(3);
    r.window = static_cast<std::size_t>(integer(4));
    CostTriple* t[] = {&r.rec, &r.opt, &r.v1, &r.v2};
    for (int k = 0; k < 4; ++k) {
      t[k]->shifts = integer(5 + k);
      t[k]->energy = Energy::from_milli(milli(9 + k));
      t[k]->latency = Latency::from_milli(milli(13 + k));
    }
    r.num_accesses = static_cast<std::uint64_t>(integer(17));
    rows.push_back(std::move(r));
  }
  if (!header) throw ParseError(1, 1, "missing CSV header");
  return rows;
}

inline std::vector<SweepRow> parse_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_csv(in);
}

namespace detail {

inline std::string fixed(double v, int digits) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

inline std::string ratio(std::int64_t num, std::int64_t den) {
  if (den == 0) return num == 0 ? "1.000" : "n/a";
  return fixed(static_cast<double>(num) / static_cast<double>(den), 3);
}

}  // namespace detail

/// Per-access averages, STATIC_WORST/REC ratios and the SRAM comparison for
/// every row. Returns the number of warnings printed.
inline std::size_t write_report(std::ostream& out, const std::vector<SweepRow>& rows, const SramBaseline& sram = {}) {
  std::size_t warnings = 0;
  out << "SRAM baseline: read " << to_string(sram.read_min) << "-" << to_string(sram.read_max) << " fJ, write "
      << to_string(sram.write_min) << "-" << to_string(sram.write_max) << " fJ, latency "
      << to_string(sram.latency_min) << "-" << to_string(sram.latency_max) << " ns\n";
  for (const auto& r : rows) {
    out << '\n'
        << r.benchmark << " num_aps=" << r.num_aps << " num_tracks=" << r.num_tracks
        << " track_length=" << r.track_length << " window=" << r.window << " accesses=" << r.num_accesses << '\n';
    if (r.num_accesses == 0) {
      out << "  warning: no register accesses, averages reported as 0\n";
      ++warnings;
    }
    const double n = r.num_accesses == 0 ? 0.0 : static_cast<double>(r.num_accesses);
    auto avg = [&](std::int64_t total, double scale) { return n == 0.0 ? 0.0 : static_cast<double>(total) / scale / n; };
    const CostTriple best{std::min(r.v1.shifts, r.v2.shifts), std::min(r.v1.energy, r.v2.energy),
                          std::min(r.v1.latency, r.v2.latency)};
    const CostTriple worst{std::max(r.v1.shifts, r.v2.shifts), std::max(r.v1.energy, r.v2.energy),
                           std::max(r.v1.latency, r.v2.latency)};
    out << "  policy        shifts/acc  energy/acc[fJ]  latency/acc[ns]\n";
    auto line = [&](const char* name, const CostTriple& c) {
      std::string label = name;
      label.resize(14, ' ');
      out << "  " << label << detail::fixed(avg(c.shifts, 1.0), 3) << "  " << detail::fixed(avg(c.energy.milli(), 1000.0), 3)
          << "  " << detail::fixed(avg(c.latency.milli(), 1000.0), 3) << '\n';
    };
    line("REC", r.rec);
    line("LOPT", r.opt);
    line("STATIC_BEST", best);
    line("STATIC_WORST", worst);
    out << "  STATIC_WORST/REC shifts " << detail::ratio(worst.shifts, r.rec.shifts) << " energy "
        << detail::ratio(worst.energy.milli(), r.rec.energy.milli()) << " latency "
        << detail::ratio(worst.latency.milli(), r.rec.latency.milli()) << '\n';
    out << "  REC energy/access vs SRAM: " << sram_band_flag(avg(r.rec.energy.milli(), 1000.0), sram) << '\n';
  }
  return warnings;
}

}  // namespace rtrf

#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "rtrf/commands.hpp"

using namespace rtrf;

namespace {

struct Common {
  std::string geometry;
  std::string out;
  std::size_t window = 100;
  std::size_t max_paths = 4096;
  double min_weight = 1e-6;
  std::optional<std::int64_t> hysteresis;
  std::string aggregation = "expected";
  unsigned threads = 0;
};

void add_geometry(CLI::App* app, Common& c) {
  app->add_option("--geometry", c.geometry, "geometry file or inline key=value[,key=value...]");
}

void add_out(CLI::App* app, Common& c) { app->add_option("--out", c.out, "output file (default stdout)"); }

void add_prune(CLI::App* app, Common& c) {
  app->add_option("--window", c.window, "instructions per window")->check(CLI::PositiveNumber);
  app->add_option("--prune-max-paths", c.max_paths, "path cap per start address")->check(CLI::PositiveNumber);
  app->add_option("--prune-min-weight", c.min_weight, "drop paths lighter than this")->check(CLI::PositiveNumber);
  app->add_option("--hysteresis", c.hysteresis, "vertical advantage required, in shifts (default: store/restore cost)")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--aggregation", c.aggregation, "expected | vote")->check(CLI::IsMember({"expected", "vote"}));
  app->add_option("--threads", c.threads, "worker threads (0 = hardware)");
}

PruneOptions prune_of(const Common& c) { return PruneOptions{c.max_paths, c.min_weight, c.hysteresis}; }

PathAggregation aggregation_of(const Common& c) {
  return c.aggregation == "vote" ? PathAggregation::WeightedVote : PathAggregation::ExpectedScore;
}

const std::map<std::string, LoptObjective> kObjectives{
    {"shifts", LoptObjective::Shifts}, {"energy", LoptObjective::Energy}, {"latency", LoptObjective::Latency}};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"racetrack register file allocation toolkit"};
  app.require_subcommand(1);
  Common c;
  std::string listing, trace, rec_table, lopt = "shifts";

  auto* gen = app.add_subcommand("gen", "generate a synthetic listing and trace");
  cmd::GenOptions g;
  gen->add_option("--preset", g.preset, "hot-cold | phase")->check(CLI::IsMember({"hot-cold", "phase"}));
  gen->add_option("--seed", g.seed, "random seed");
  gen->add_option("--count", g.count, "executed instructions");
  gen->add_option("--phase-length", g.phase_length, "instructions per phase visit (phase preset)")->check(CLI::PositiveNumber);
  gen->add_option("--working-set", g.spec.working_set, "hot registers");
  gen->add_option("--hot-ratio", g.spec.hot_ratio, "share of accesses to hot registers");
  gen->add_option("--write-fraction", g.spec.write_fraction, "share of instructions with a destination");
  gen->add_option("--entropy", g.spec.value_entropy, "expected toggled bits per write");
  gen->add_option("--body-length", g.spec.body_length, "instructions per loop body");
  gen->add_option("--listing", g.listing_out, "listing output file");
  gen->add_option("--out", g.trace_out, "trace output file (default stdout)");

  auto* cfg = app.add_subcommand("cfg", "build the control flow graph, optionally profiled");
  add_geometry(cfg, c);
  cfg->add_option("--listing", listing, "program listing")->required();
  cfg->add_option("--trace", trace, "trace for branch probabilities");
  add_out(cfg, c);

  auto* rec = app.add_subcommand("recommend", "derive the recommendation table");
  add_geometry(rec, c);
  rec->add_option("--listing", listing, "program listing")->required();
  rec->add_option("--trace", trace, "trace for branch probabilities");
  add_prune(rec, c);
  add_out(rec, c);

  auto* sim = app.add_subcommand("simulate", "simulate one policy");
  std::string policy = "static-h";
  add_geometry(sim, c);
  sim->add_option("--trace", trace, "trace")->required();
  sim->add_option("--window", c.window, "instructions per window")->check(CLI::PositiveNumber);
  sim->add_option("--policy", policy, "static-h | static-v | rec | lopt")
      ->check(CLI::IsMember({"static-h", "static-v", "rec", "lopt"}));
  sim->add_option("--rec-table", rec_table, "recommendation table for --policy rec");
  sim->add_option("--lopt-objective", lopt, "shifts | energy | latency")->check(CLI::IsMember({"shifts", "energy", "latency"}));
  add_out(sim, c);

  auto* cmp = app.add_subcommand("compare", "REC, LOPT and static runs as one CSV row");
  std::string bench = "bench";
  add_geometry(cmp, c);
  cmp->add_option("--listing", listing, "program listing")->required();
  cmp->add_option("--trace", trace, "trace")->required();
  cmp->add_option("--rec-table", rec_table, "reuse this table instead of deriving one");
  cmp->add_option("--name", bench, "benchmark column value");
  cmp->add_option("--lopt-objective", lopt, "shifts | energy | latency")->check(CLI::IsMember({"shifts", "energy", "latency"}));
  add_prune(cmp, c);
  add_out(cmp, c);

  auto* swp = app.add_subcommand("sweep", "parameter sweep to CSV");
  cmd::SweepOptions so;
  add_geometry(swp, c);
  swp->add_option("--listing", so.listings, "program listing (repeat, paired with --trace)");
  swp->add_option("--trace", so.traces, "trace (repeat)");
  swp->add_option("--name", so.names, "benchmark name per pair (repeat)");
  swp->add_option("--preset", so.presets, "synthetic benchmark: hot-cold | phase (repeat)");
  swp->add_option("--base-window", so.spec.base_window, "window for the base row and the n_ap and track groups");
  swp->add_option("--aps", so.spec.aps, "n_ap values")->delimiter(',');
  swp->add_option("--windows", so.spec.windows, "window sizes")->delimiter(',');
  swp->add_option("--tracks", so.spec.tracks, "track counts; width keeps capacity")->delimiter(',');
  swp->add_option("--fixed-aps", so.spec.fixed_aps, "n_ap for the window and track groups");
  swp->add_option("--prune-max-paths", c.max_paths, "path cap per start address")->check(CLI::PositiveNumber);
  swp->add_option("--prune-min-weight", c.min_weight, "drop paths lighter than this")->check(CLI::PositiveNumber);
  swp->add_option("--hysteresis", c.hysteresis, "vertical advantage required, in shifts")->check(CLI::NonNegativeNumber);
  swp->add_option("--aggregation", c.aggregation, "expected | vote")->check(CLI::IsMember({"expected", "vote"}));
  swp->add_option("--lopt-objective", lopt, "shifts | energy | latency")->check(CLI::IsMember({"shifts", "energy", "latency"}));
  swp->add_option("--threads", so.spec.threads, "concurrent rows (0 = hardware)");
  add_out(swp, c);

  auto* rep = app.add_subcommand("report", "summarise a sweep CSV");
  cmd::ReportOptions ro;
  rep->add_option("csv", ro.in, "sweep CSV")->required();
  add_out(rep, c);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd::gen(g, std::cout);
    if (cfg->parsed()) return cmd::cfg({c.geometry, listing, trace, c.out}, std::cout);
    cmd::RecommendOptions ropt{c.geometry, listing, trace, c.window, prune_of(c), aggregation_of(c), c.threads, c.out};
    if (rec->parsed()) return cmd::recommend(ropt, std::cout);
    if (sim->parsed()) {
      static const std::map<std::string, cmd::PolicyKind> kinds{{"static-h", cmd::PolicyKind::StaticH},
                                                                {"static-v", cmd::PolicyKind::StaticV},
                                                                {"rec", cmd::PolicyKind::Rec},
                                                                {"lopt", cmd::PolicyKind::LOpt}};
      return cmd::simulate({c.geometry, trace, c.window, kinds.at(policy), rec_table, kObjectives.at(lopt), c.out},
                           std::cout);
    }
    if (cmp->parsed()) {
      ropt.out.clear();
      return cmd::compare({ropt, rec_table, bench, kObjectives.at(lopt), c.out}, std::cout);
    }
    if (swp->parsed()) {
      so.geometry = c.geometry;
      so.out = c.out;
      so.spec.prune = prune_of(c);
      so.spec.aggregation = aggregation_of(c);
      so.spec.lopt_objective = kObjectives.at(lopt);
      return cmd::sweep(so, std::cout, std::cerr);
    }
    if (rep->parsed()) {
      ro.out = c.out;
      return cmd::report(ro, std::cout, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

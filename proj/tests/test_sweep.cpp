#include <gtest/gtest.h>

#include "rtrf/sweep.hpp"
#include "rtrf/synthetic.hpp"

using namespace rtrf;

namespace {

std::vector<Benchmark> small_benchmarks() {
  auto a = generate_workload(hot_cold_preset(1, 1500));
  auto b = generate_workload(phase_alternating_preset(2, 256, 2));
  return {{"hot", a.listing, a.trace}, {"phase", b.listing, b.trace}};
}

}  // namespace

TEST(Sram, BaselineAndBands) {
  SramBaseline s;
  EXPECT_EQ(s.read_min, femtojoules(390));
  EXPECT_EQ(s.read_max, femtojoules(710));
  EXPECT_EQ(s.write_min, femtojoules(800));
  EXPECT_EQ(s.write_max, femtojoules(1570));
  EXPECT_EQ(s.latency_min, nanoseconds(164));
  EXPECT_EQ(s.latency_max, nanoseconds(254));
  EXPECT_STREQ(sram_band_flag(100), "below SRAM band");
  EXPECT_STREQ(sram_band_flag(390), "within SRAM band");
  EXPECT_STREQ(sram_band_flag(1570), "within SRAM band");
  EXPECT_STREQ(sram_band_flag(1571), "above SRAM band");
}

TEST(Sweep, ConfigurationOrderAndSkips) {
  SweepSpec spec;
  spec.aps = {1, 2, 4, 3};
  spec.windows = {10, 0, 100};
  spec.tracks = {16, 64, 3};
  std::vector<std::string> warnings;
  auto c = sweep_configs(spec, &warnings);
  ASSERT_EQ(c.size(), 6u);
  EXPECT_EQ(c[0], (SweepConfig{RegisterFileGeometry{32, 64, 2, 32, 64}, 100}));
  EXPECT_EQ(c[1].geometry.num_aps, 4);
  EXPECT_EQ(c[2], (SweepConfig{RegisterFileGeometry{32, 64, 8, 32, 64}, 10}));
  EXPECT_EQ(c[3].window, 100u);
  EXPECT_EQ(c[4], (SweepConfig{RegisterFileGeometry{16, 128, 8, 32, 64}, 100}));
  EXPECT_EQ(c[5], (SweepConfig{RegisterFileGeometry{64, 32, 8, 32, 64}, 100}));
  // n_ap=1 leaves vertical fragments without a port, n_ap=3, window 0, 3 tracks.
  ASSERT_EQ(warnings.size(), 4u);
  EXPECT_NE(warnings[0].find("num_aps=1"), std::string::npos);
}

TEST(Sweep, RowsAreDeterministicAcrossThreadCounts) {
  SweepSpec spec;
  spec.aps = {4, 8};
  spec.windows = {50};
  spec.threads = 1;
  auto one = run_sweep(small_benchmarks(), spec);
  spec.threads = 3;
  auto three = run_sweep(small_benchmarks(), spec);
  ASSERT_EQ(one.rows.size(), 8u);
  EXPECT_EQ(one.rows, three.rows);
  EXPECT_EQ(one.rows[0].benchmark, "hot");
  EXPECT_EQ(one.rows[4].benchmark, "phase");
  const auto benches = small_benchmarks();
  for (std::size_t i = 0; i < one.rows.size(); ++i)
    EXPECT_EQ(one.rows[i].num_accesses, count_accesses(benches[i / 4].trace));
}

TEST(Sweep, CsvRoundTrip) {
  SweepSpec spec;
  spec.threads = 1;
  auto rows = run_sweep(small_benchmarks(), spec).rows;
  auto text = serialize_csv(rows);
  EXPECT_EQ(text.substr(0, text.find('\n')), kCsvHeader);
  EXPECT_EQ(parse_csv(text), rows);
  EXPECT_EQ(serialize_csv(parse_csv(text)), text);
  EXPECT_THROW(parse_csv("a,b\n"), ParseError);
  EXPECT_THROW(parse_csv(std::string(kCsvHeader) + "\nx,1\n"), ParseError);
  try {
    parse_csv(std::string(kCsvHeader) + "\nx,1,2,3,4,5,6,7,8,1.0,1,1,1,1,1,1,zz,9\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 35u);
  }
}

TEST(Report, AveragesRatiosAndWarnings) {
  SweepRow r;
  r.benchmark = "b";
  r.num_aps = 2;
  r.num_tracks = 32;
  r.track_length = 64;
  r.window = 100;
  r.num_accesses = 10;
  r.rec = {100, femtojoules(5000), nanoseconds(20)};
  r.opt = {50, femtojoules(4000), nanoseconds(10)};
  r.v1 = {620, femtojoules(13680), nanoseconds(374)};
  r.v2 = {900, femtojoules(2000), nanoseconds(5)};
  SweepRow empty = r;
  empty.num_accesses = 0;
  empty.rec = empty.opt = empty.v1 = empty.v2 = {};
  std::ostringstream os;
  EXPECT_EQ(write_report(os, {r, empty}), 1u);
  const auto s = os.str();
  EXPECT_NE(s.find("SRAM baseline: read 390.000-710.000 fJ, write 800.000-1570.000 fJ, latency 164.000-254.000 ns"),
            std::string::npos);
  EXPECT_NE(s.find("  REC           10.000  500.000  2.000\n"), std::string::npos);
  EXPECT_NE(s.find("  STATIC_BEST   62.000  200.000  0.500\n"), std::string::npos);
  EXPECT_NE(s.find("  STATIC_WORST  90.000  1368.000  37.400\n"), std::string::npos);
  EXPECT_NE(s.find("STATIC_WORST/REC shifts 9.000 energy 2.736 latency 18.700"), std::string::npos);
  EXPECT_NE(s.find("REC energy/access vs SRAM: within SRAM band"), std::string::npos);
  EXPECT_NE(s.find("warning: no register accesses"), std::string::npos);
}

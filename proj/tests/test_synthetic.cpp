#include <gtest/gtest.h>

#include <bit>

#include "rtrf/cfg.hpp"
#include "rtrf/rf_sim.hpp"
#include "rtrf/synthetic.hpp"

using namespace rtrf;

TEST(Synthetic, DeterministicPerSeed) {
  SyntheticSpec s;
  s.instruction_count = 5000;
  auto a = generate_workload(s), b = generate_workload(s);
  EXPECT_EQ(a.trace, b.trace);
  EXPECT_EQ(a.listing, b.listing);
  s.seed = 2;
  EXPECT_NE(generate_synthetic(s), a.trace);
  EXPECT_EQ(a.trace.size(), 5000u);
  EXPECT_EQ(a.trace.front().address, kSyntheticBase);
}

TEST(Synthetic, TraceFollowsItsListing) {
  for (auto spec : {hot_cold_preset(4, 20000), phase_alternating_preset(5, 2000, 2)}) {
    auto w = generate_workload(spec);
    for (const auto& t : w.trace) {
      auto idx = w.listing.index_of(t.address);
      ASSERT_TRUE(idx);
      const auto& in = w.listing[*idx];
      ASSERT_EQ(t.sources.size(), in.sources.size());
      ASSERT_EQ(t.destinations.size(), in.destinations.size());
      for (std::size_t k = 0; k < in.sources.size(); ++k) EXPECT_EQ(t.sources[k].reg, in.sources[k]);
      for (std::size_t k = 0; k < in.destinations.size(); ++k) EXPECT_EQ(t.destinations[k].reg, in.destinations[k]);
    }
    EXPECT_NO_THROW(profile_branches(w.listing, w.trace));
  }
}

TEST(Synthetic, ValuesAreContinuousAndToggleAtTheRequestedRate) {
  SyntheticSpec s;
  s.instruction_count = 50000;
  s.value_entropy = 3.0;
  auto t = generate_synthetic(s);
  std::vector<std::uint64_t> regs(32, 0);
  double toggled = 0;
  std::size_t writes = 0;
  for (const auto& in : t) {
    for (const auto& src : in.sources) EXPECT_EQ(src.value.bits(), regs[src.reg]);
    for (const auto& d : in.destinations) {
      EXPECT_EQ(d.before.bits(), regs[d.reg]);
      EXPECT_EQ(d.after.bits() >> 16, 0u);
      toggled += std::popcount(d.before.bits() ^ d.after.bits());
      ++writes;
      regs[d.reg] = d.after.bits();
    }
  }
  ASSERT_GT(writes, 0u);
  EXPECT_NEAR(toggled / static_cast<double>(writes), 3.0, 0.1);
}

TEST(Synthetic, HotShareTracksTheRequestedRatio) {
  for (double ratio : {0.5, 0.8, 0.95}) {
    SyntheticSpec s;
    s.instruction_count = 100000;
    s.working_set = 4;
    s.hot_ratio = ratio;
    EXPECT_NEAR(hot_share(generate_synthetic(s), 4), ratio, 0.02) << ratio;
  }
}

TEST(Synthetic, PhasesChangeAtMultiplesOfThePhaseLength) {
  auto spec = phase_alternating_preset(9, 2000, 3);
  const std::size_t L = spec.phases[0].length;
  EXPECT_EQ(L, 2016u);
  auto w = generate_workload(spec);
  ASSERT_EQ(w.trace.size(), 6 * L);
  const std::size_t body = SyntheticSpec{}.body_length;
  for (std::size_t i = 0; i < w.trace.size(); ++i) {
    const auto idx = *w.listing.index_of(w.trace[i].address);
    const bool second = (i / L) % 2 == 1;
    if (idx == 2 * body) continue;  // wrap branch
    EXPECT_EQ(idx >= body, second) << "instruction " << i;
  }
}

TEST(Synthetic, RejectsBadSpecs) {
  auto bad = [](auto mutate) {
    SyntheticSpec s;
    mutate(s);
    return s;
  };
  EXPECT_THROW(generate_workload(bad([](auto& s) { s.working_set = 0; })), std::invalid_argument);
  EXPECT_THROW(generate_workload(bad([](auto& s) { s.working_set = 33; })), std::invalid_argument);
  EXPECT_THROW(generate_workload(bad([](auto& s) { s.hot_ratio = 1.5; })), std::invalid_argument);
  EXPECT_THROW(generate_workload(bad([](auto& s) { s.body_length = 4; })), std::invalid_argument);
  EXPECT_THROW(generate_workload(bad([](auto& s) { s.value_entropy = 17; })), std::invalid_argument);
  EXPECT_THROW(generate_workload(bad([](auto& s) { s.reg_bits = 65; })), std::invalid_argument);
}

TEST(Synthetic, SmallWorkingSetFavoursVertical) {
  SyntheticSpec s;
  s.instruction_count = 20000;
  s.working_set = 2;
  s.hot_ratio = 0.99;
  auto t = generate_synthetic(s);
  auto g = default_geometry();
  auto h = simulate(t, g, CostParams{}, StaticPolicy{AllocationMode::Horizontal}, 100);
  auto v = simulate(t, g, CostParams{}, StaticPolicy{AllocationMode::Vertical}, 100);
  EXPECT_LT(v.totals.shifts * 2, h.totals.shifts);
}

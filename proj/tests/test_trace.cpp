#include <gtest/gtest.h>

#include <random>

#include "rtrf/trace.hpp"

using namespace rtrf;

TEST(Trace, ParsesOperandsInOrder) {
  auto t = parse_trace(
      "# header\n"
      "I 400000 add S 1:64:ff,2:64:0 D 3:64:5:6\n"
      "\n"
      "I 400004 beq S 3:32:6 D -   # trailing\n");
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0].address, 0x400000u);
  EXPECT_EQ(t[0].mnemonic, "add");
  ASSERT_EQ(t[0].sources.size(), 2u);
  EXPECT_EQ(t[0].sources[0].value.bits(), 0xffu);
  EXPECT_EQ(t[0].destinations[0].before.bits(), 5u);
  EXPECT_EQ(t[0].destinations[0].after.bits(), 6u);
  EXPECT_EQ(t[1].sources[0].width, 32);
  EXPECT_TRUE(t[1].destinations.empty());

  auto seq = access_sequence(t[0]);
  ASSERT_EQ(seq.size(), 3u);
  EXPECT_EQ(seq[0].reg, 1);
  EXPECT_EQ(seq[1].reg, 2);
  EXPECT_EQ(seq[2].reg, 3);
  EXPECT_EQ(seq[2].kind, AccessKind::Write);
  EXPECT_EQ(count_accesses(t), 4u);
}

TEST(Trace, DiagnosticsCarryLineAndColumn) {
  auto where = [](const std::string& text, const TraceFormat& fmt = {}) -> std::pair<std::size_t, std::size_t> {
    try {
      parse_trace(text, fmt);
    } catch (const ParseError& e) {
      return {e.line(), e.column()};
    }
    return {0, 0};
  };
  EXPECT_EQ(where("I 0 add S 40:64:0 D -").first, 1u);
  EXPECT_EQ(where("I 0 add S 40:64:0 D -").second, 11u);
  EXPECT_EQ(where("\nX 0 add S - D -"), (std::pair<std::size_t, std::size_t>{2, 1}));
  EXPECT_EQ(where("I 0 add S 1:65:0 D -").second, 13u);
  EXPECT_EQ(where("I 0 add S 1:8:zz D -").second, 15u);
  EXPECT_EQ(where("I 0 add S 1:8:1ff D -", TraceFormat{32, 8}).second, 15u);
  EXPECT_EQ(where("I 0 add S 1:8 D -").first, 1u);
  EXPECT_EQ(where("I 0 add S - D 1:8:0").first, 1u);
  EXPECT_EQ(where("I 0 add S - X -").second, 13u);
  EXPECT_EQ(where("I 0 add S -").first, 1u);
}

TEST(Trace, RoundTripsRandomTraces) {
  std::mt19937_64 rng(17);
  for (int round = 0; round < 50; ++round) {
    Trace t;
    const int n = static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) {
      TraceInstruction in;
      in.address = rng() % 0x10000;
      in.mnemonic = "op" + std::to_string(rng() % 7);
      for (auto k = rng() % 3; k > 0; --k)
        in.sources.push_back({static_cast<int>(rng() % 32), static_cast<int>(1 + rng() % 64), RegisterValue(rng(), 64)});
      for (auto k = rng() % 2; k > 0; --k)
        in.destinations.push_back({static_cast<int>(rng() % 32), 64, RegisterValue(rng(), 64), RegisterValue(rng(), 64)});
      t.push_back(std::move(in));
    }
    auto text = serialize_trace(t);
    EXPECT_EQ(parse_trace(text), t);
    EXPECT_EQ(serialize_trace(parse_trace(text)), text);
  }
}

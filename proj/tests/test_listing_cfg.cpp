#include <gtest/gtest.h>

#include <sstream>

#include "rtrf/cfg.hpp"

using namespace rtrf;

namespace {

const char* kLoop =
    "0 mov ; S=- D=1 K=seq\n"
    "4 add ; S=1,2 D=1 K=seq\n"
    "8 bne ; S=1 D=- K=cbr T=4\n"
    "c ret ; S=- D=- K=ret\n";

const char* kCalls =
    "0 mov ; S=- D=1 K=seq\n"
    "4 call ; S=- D=- K=call T=20\n"
    "8 add ; S=1 D=2 K=seq\n"
    "c call ; S=- D=- K=call T=20\n"
    "10 sub ; S=2 D=3 K=seq\n"
    "14 b ; S=- D=- K=br T=0\n"
    "20 mul ; S=1 D=1 K=seq\n"
    "24 ret ; S=- D=- K=ret\n";

TraceInstruction at(std::uint64_t a) { return TraceInstruction{a, "x", {}, {}}; }

double prob(const Cfg& cfg, std::size_t from, EdgeKind kind) {
  for (auto e : cfg.blocks()[from].out_edges)
    if (cfg.edge(e).kind == kind) return cfg.edge(e).probability;
  return -1;
}

}  // namespace

TEST(Listing, ParseAndRoundTrip) {
  auto l = parse_listing(kCalls);
  ASSERT_EQ(l.size(), 8u);
  EXPECT_EQ(l[1].kind, InstrKind::Call);
  EXPECT_EQ(*l[1].target, 0x20u);
  EXPECT_EQ(l[2].sources, (std::vector<int>{1}));
  EXPECT_EQ(*l.index_of(0x24), 7u);
  EXPECT_FALSE(l.index_of(0x28));
  EXPECT_EQ(parse_listing(serialize_listing(l)), l);
}

TEST(Listing, RejectsMalformedPrograms) {
  EXPECT_THROW(parse_listing("4 a ; S=- D=- K=seq\n0 b ; S=- D=- K=seq\n"), ParseError);
  EXPECT_THROW(parse_listing("0 beq ; S=- D=- K=cbr\n"), ParseError);
  EXPECT_THROW(parse_listing("0 ret ; S=- D=- K=ret T=0\n"), ParseError);
  EXPECT_THROW(parse_listing("0 b ; S=- D=- K=br T=8\n"), ParseError);
  EXPECT_THROW(parse_listing("0 b ; S=40 D=- K=seq\n"), ParseError);
  EXPECT_THROW(parse_listing("0 b ; S=- D=- K=jmp\n"), ParseError);
  EXPECT_THROW(parse_listing("0 b S=- D=- K=seq\n"), ParseError);
  try {
    parse_listing("0 a ; S=- D=- K=seq\n4 b ; S=1,x D=- K=seq\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 11u);
  }
}

TEST(Cfg, LoopBlocksAndEdges) {
  auto cfg = build_cfg(parse_listing(kLoop));
  ASSERT_EQ(cfg.blocks().size(), 3u);
  EXPECT_EQ(cfg.blocks()[1].first, 1u);
  EXPECT_EQ(cfg.blocks()[1].last, 2u);
  EXPECT_DOUBLE_EQ(prob(cfg, 1, EdgeKind::Taken), 0.5);
  EXPECT_DOUBLE_EQ(prob(cfg, 1, EdgeKind::Fallthrough), 0.5);
  EXPECT_TRUE(cfg.blocks()[2].out_edges.empty());
  EXPECT_FALSE(cfg.annotated());
}

TEST(Cfg, ProfiledLoopProbability) {
  Trace t{at(0)};
  for (int i = 0; i < 10; ++i) {
    t.push_back(at(4));
    t.push_back(at(8));
  }
  t.push_back(at(0xc));
  auto cfg = annotate_probabilities(build_cfg(parse_listing(kLoop)), t);
  EXPECT_TRUE(cfg.annotated());
  EXPECT_DOUBLE_EQ(prob(cfg, 1, EdgeKind::Taken), 0.9);
  EXPECT_DOUBLE_EQ(prob(cfg, 1, EdgeKind::Fallthrough), 0.1);
}

TEST(Cfg, OutgoingProbabilitiesSumToOne) {
  auto cfg = build_cfg(parse_listing(kCalls));
  for (std::size_t b = 0; b < cfg.blocks().size(); ++b) {
    double sum = 0;
    for (auto e : cfg.blocks()[b].out_edges) sum += cfg.edge(e).probability;
    if (!cfg.blocks()[b].out_edges.empty()) {
      EXPECT_NEAR(sum, 1.0, 1e-12) << "block " << b;
    }
  }
}

TEST(Cfg, CallsLinkContinuationsAndReturns) {
  auto l = parse_listing(kCalls);
  auto cfg = build_cfg(l);
  EXPECT_EQ(*cfg.continuation_of(1), 2u);
  EXPECT_EQ(*cfg.continuation_of(3), 4u);
  const auto ret_block = cfg.block_of(7);
  EXPECT_EQ(cfg.blocks()[ret_block].out_edges.size(), 2u);
  EXPECT_DOUBLE_EQ(prob(cfg, ret_block, EdgeKind::Return), 0.5);

  Trace t;
  for (auto a : {0x0, 0x4, 0x20, 0x24, 0x8, 0xc, 0x20, 0x24, 0x10, 0x14, 0x0, 0x4, 0x20, 0x24, 0x8}) t.push_back(at(a));
  auto p = profile_branches(l, t);
  EXPECT_EQ(p.returns.at(0x24).at(0x8), 2u);
  EXPECT_EQ(p.returns.at(0x24).at(0x10), 1u);
  auto annotated = annotate_probabilities(cfg, p);
  for (auto e : annotated.blocks()[ret_block].out_edges) {
    const auto& edge = annotated.edge(e);
    const double expect = l[annotated.blocks()[edge.to].first].address == 0x8 ? 2.0 / 3 : 1.0 / 3;
    EXPECT_NEAR(edge.probability, expect, 1e-12);
  }
}

TEST(Cfg, ProfilingRejectsInconsistentTraces) {
  auto l = parse_listing(kLoop);
  EXPECT_THROW(profile_branches(l, Trace{at(0x30)}), Error);
  EXPECT_THROW(profile_branches(l, Trace{at(0x8), at(0x0)}), Error);
}

TEST(Cfg, BlocksRebuildTheListing) {
  for (const char* text : {kLoop, kCalls}) {
    auto l = parse_listing(text);
    EXPECT_EQ(to_listing(build_cfg(l)), l);
  }
}

TEST(Cfg, DumpFormat) {
  std::ostringstream os;
  write_cfg(os, build_cfg(parse_listing(kLoop)));
  EXPECT_EQ(os.str(),
            "CFG blocks=3 edges=3 annotated=0\n"
            "B 0 0 0 1\n"
            "B 1 4 8 2\n"
            "B 2 c c 1\n"
            "E 0 1 fallthrough 1\n"
            "E 1 1 taken 0.5\n"
            "E 1 2 fallthrough 0.5\n");
}

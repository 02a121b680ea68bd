#include <gtest/gtest.h>

#include <random>

#include "rtrf/geometry.hpp"

using namespace rtrf;

namespace {

RegisterFileGeometry geom(std::int64_t n, std::int64_t w, std::int64_t ap, std::int64_t r, std::int64_t b) {
  return RegisterFileGeometry{n, w, ap, r, b};
}

GeometryErrc code_of(const RegisterFileGeometry& g) {
  try {
    validate_geometry(g);
  } catch (const GeometryError& e) {
    return e.code();
  }
  ADD_FAILURE() << "geometry unexpectedly valid";
  return GeometryErrc::NotPowerOfTwo;
}

}  // namespace

TEST(Geometry, DefaultConfiguration) {
  auto g = default_geometry();
  EXPECT_EQ(g.num_tracks(), 32);
  EXPECT_EQ(g.track_length(), 64);
  EXPECT_EQ(g.num_aps(), 2);
  EXPECT_EQ(g.num_regs(), 32);
  EXPECT_EQ(g.reg_bits(), 64);
  EXPECT_EQ(g.layout().overflow, (Ratio{16, 1}));
}

TEST(Geometry, SmallFourTrackExample) {
  auto g = validate_geometry(geom(4, 16, 2, 8, 8));
  EXPECT_EQ(g.layout().overflow, (Ratio{4, 1}));
  EXPECT_EQ(g.layout().regs_per_track, (Ratio{2, 1}));
  EXPECT_EQ(g.layout().positions_per_register_v, 2);
}

TEST(Geometry, ErrorCodes) {
  EXPECT_EQ(code_of(geom(32, 60, 2, 32, 64)), GeometryErrc::NotPowerOfTwo);
  EXPECT_EQ(code_of(geom(16, 64, 2, 16, 64)), GeometryErrc::VerticalPortShortfall);
  EXPECT_EQ(code_of(geom(16, 64, 2, 32, 64)), GeometryErrc::CapacityShortfall);
  EXPECT_EQ(code_of(geom(32, 64, 1, 32, 32)), GeometryErrc::HorizontalPortShortfall);
  EXPECT_EQ(code_of(geom(32, 64, 128, 32, 64)), GeometryErrc::TooManyPorts);
  EXPECT_EQ(code_of(geom(32, 64, 2, 0, 64)), GeometryErrc::InvalidRegisterCount);
  EXPECT_EQ(code_of(geom(64, 256, 4, 32, 128)), GeometryErrc::RegisterTooWide);
  EXPECT_EQ(code_of(geom(0, 64, 2, 32, 64)), GeometryErrc::NotPowerOfTwo);
  EXPECT_EQ(code_of(geom(32, 64, 3, 32, 64)), GeometryErrc::NotPowerOfTwo);
}

TEST(Geometry, TotalOverArbitraryIntegers) {
  std::mt19937_64 rng(5);
  const std::int64_t extremes[] = {std::numeric_limits<std::int64_t>::min(), -1, 0, 1, 2, 3, 64,
                                   std::numeric_limits<std::int64_t>::max(), std::int64_t{1} << 62};
  for (int i = 0; i < 20000; ++i) {
    auto pick = [&] {
      return rng() % 3 == 0 ? extremes[rng() % std::size(extremes)] : static_cast<std::int64_t>(rng() % 300) - 20;
    };
    RegisterFileGeometry g{pick(), pick(), pick(), pick(), pick()};
    auto err = geometry_error(g);
    if (!err) {
      auto v = validate_geometry(g);
      EXPECT_GE(static_cast<__int128>(g.num_tracks) * g.track_length, static_cast<__int128>(g.num_regs) * g.reg_bits);
      EXPECT_EQ(v.layout().overflow.num * 2 * g.num_aps, g.track_length * v.layout().overflow.den);
    } else {
      EXPECT_THROW(validate_geometry(g), GeometryError);
    }
  }
}

TEST(Geometry, ConfigParsing) {
  auto g = parse_geometry_config("num_tracks=64\n# comment\ntrack_length=32, num_aps = 4\n");
  EXPECT_EQ(g.num_tracks, 64);
  EXPECT_EQ(g.track_length, 32);
  EXPECT_EQ(g.num_aps, 4);
  EXPECT_EQ(g.num_regs, 32);
  EXPECT_THROW(parse_geometry_config("num_tracks"), ParseError);
  EXPECT_THROW(parse_geometry_config("bogus=1"), ParseError);
  EXPECT_THROW(parse_geometry_config("num_aps=x"), ParseError);
}

TEST(Geometry, FingerprintDistinguishesConfigurations) {
  auto a = geometry_fingerprint(geom(32, 64, 2, 32, 64));
  auto b = geometry_fingerprint(geom(32, 64, 4, 32, 64));
  EXPECT_NE(a, b);
  EXPECT_EQ(a, geometry_fingerprint(default_geometry()));
  EXPECT_EQ(parse_geometry_config(to_config_string(geom(8, 256, 4, 32, 64))), geom(8, 256, 4, 32, 64));
}

#include <gtest/gtest.h>

#include "stabcert/geometry.hpp"

using namespace stabcert;

namespace {
GridDomain line(int m = 320, double R = 10.0, bool periodic = true) {
  return GridDomain::make(1, R, m, periodic);
}
}  // namespace

TEST(Sets, ShapesRasterizeByCellCenter) {
  const auto d = line();
  EXPECT_DOUBLE_EQ(make_set(d, shape::Full{}).measure(), 20.0);
  EXPECT_TRUE(make_set(d, shape::Empty{}).is_empty());
  EXPECT_DOUBLE_EQ(make_set(d, shape::HalfSpace{0, 0.0}).measure(), 10.0);
  EXPECT_DOUBLE_EQ(make_set(d, shape::PeriodicSlabs{1.0, 0.25}).measure(), 5.0);
  EXPECT_DOUBLE_EQ(make_set(d, shape::BallComplement{{0, 0}, 1.0}).measure(),
                   18.0);
}

TEST(Sets, Algebra) {
  const auto d = line();
  const auto half = make_set(d, shape::HalfSpace{0, 0.0});
  const auto full = make_set(d, shape::Full{});
  EXPECT_TRUE(half.subset_of(full));
  EXPECT_FALSE(full.subset_of(half));
  EXPECT_TRUE(half.intersect(half.complement()).is_empty());
  EXPECT_EQ(half.complement().complement(), half);
}

TEST(Sets, ParseAndDescribeRoundTrip) {
  for (const char* text :
       {"full", "empty", "halfspace:axis=0,offset=1.5",
        "ball-complement:radius=2,cx=1,cy=0", "slabs:period=1,fill=0.25",
        "custom:cells=1;5;9"}) {
    const Shape s = parse_shape(text);
    const auto d = line(64, 4.0);
    EXPECT_EQ(make_set(d, parse_shape(describe(s))), make_set(d, s)) << text;
  }
  EXPECT_THROW(parse_shape("slabs:period=1,bogus=2"), Error);
  EXPECT_THROW(parse_shape("donut"), Error);
}

TEST(Thickness, HalfSpaceIsNotThickButWeaklyThick) {
  const auto e = make_set(line(), shape::HalfSpace{0, 0.0});
  const auto t = check_thick(e, {1.0, 2.0, 4.0});
  EXPECT_FALSE(t.is_thick);
  const auto w = check_weakly_thick(e, {2.5, 5.0, 7.5, 10.0});
  EXPECT_NEAR(w.liminf_proxy, 0.5, 0.02);
}

TEST(Thickness, SlabsHaveQuarterDensity) {
  const auto d = line();
  const auto t = check_thick(make_set(d, shape::PeriodicSlabs{1.0, 0.25}), {1.0});
  ASSERT_TRUE(t.is_thick);
  EXPECT_NEAR(*t.gamma, 0.25, d.spacing());
}

TEST(Thickness, BallComplementThickOnTorus) {
  const auto e = make_set(line(), shape::BallComplement{{0, 0}, 1.0});
  const auto t = check_thick(e, {1.0, 2.0, 4.0});
  EXPECT_TRUE(t.is_thick);
  EXPECT_DOUBLE_EQ(*t.side_length, 4.0);
}

TEST(Thickness, TwoDimensionalSlabs) {
  const auto d = GridDomain::make(2, 4.0, 64, true);
  const auto t = check_thick(make_set(d, shape::PeriodicSlabs{1.0, 0.25}), {1.0});
  ASSERT_TRUE(t.is_thick);
  EXPECT_NEAR(*t.gamma, 0.25, 1e-12);
}

TEST(Thickness, MonotoneUnderInclusion) {
  const auto d = line(128, 8.0);
  const auto small = make_set(d, shape::PeriodicSlabs{2.0, 0.25});
  const auto big = make_set(d, shape::PeriodicSlabs{2.0, 0.5});
  ASSERT_TRUE(small.subset_of(big));
  const auto a = check_thick(small, {2.0, 4.0});
  const auto b = check_thick(big, {2.0, 4.0});
  for (std::size_t i = 0; i < a.gammas.size(); ++i)
    EXPECT_LE(a.gammas[i], b.gammas[i]);
}

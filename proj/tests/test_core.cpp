#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace crossmatch;
using testing_support::hyp;

namespace {

constexpr auto R = Direction::right;
constexpr auto L = Direction::left;

TEST(HypothesisMatches, WildcardSubsumption) {
  auto c = hyp("T1", "E", R, 4.0, 0.0);
  EXPECT_TRUE(hypothesis_matches(c, hyp({}, "E", R, {}, {}), {}));
  EXPECT_TRUE(hypothesis_matches(c, hyp({}, {}, {}, {}, {}), {}));
}

TEST(HypothesisMatches, DirectionMismatch) {
  EXPECT_FALSE(hypothesis_matches(hyp("T1", "E", R, 4.0, 0.0), hyp({}, {}, L, {}, {}), {}));
}

TEST(HypothesisMatches, VelocityTolerance) {
  auto c = hyp("T1", "E", R, 4.0, 0.0);
  auto p = hyp({}, {}, {}, 4.4, {});
  EXPECT_TRUE(hypothesis_matches(c, p, {0.5, 0.0}));
  EXPECT_FALSE(hypothesis_matches(c, p, {0.3, 0.0}));
}

TEST(HypothesisMatches, AngleToleranceIsInclusive) {
  auto c = hyp("T1", "E", R, 4.0, 2.0);
  EXPECT_TRUE(hypothesis_matches(c, hyp({}, {}, {}, {}, 0.0), {0.0, 2.0}));
  EXPECT_FALSE(hypothesis_matches(c, hyp({}, {}, {}, {}, 0.0), {0.0, 1.999}));
}

TEST(HypothesisMatches, CategoryAndTypeCompareExactly) {
  auto c = hyp("T1", "E", R, 4.0, 0.0);
  EXPECT_FALSE(hypothesis_matches(c, hyp({}, "C", {}, {}, {}), {}));
  EXPECT_FALSE(hypothesis_matches(c, hyp("T2", {}, {}, {}, {}), {}));
  EXPECT_TRUE(hypothesis_matches(c, hyp("T1", {}, {}, {}, {}), {}));
}

TEST(HypothesisMatches, ReflexiveWithZeroTolerance) {
  auto c = hyp("T1", "E", L, 6.5, -3.0);
  EXPECT_TRUE(hypothesis_matches(c, c, {0.0, 0.0}));
}

TEST(IntersectHypotheses, SingleSurvivor) {
  auto h1 = hyp("T1", "E", R, 4.0, 0.0);
  auto h2 = hyp("T2", "C", L, 4.0, 0.0);
  HypothesisSet sim(Provenance::simulated, {h1, h2});
  HypothesisSet real(Provenance::inverse, {hyp({}, "E", R, {}, {})});
  auto out = intersect_hypotheses(sim, real, {});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_TRUE(out.contains(h1));
  EXPECT_EQ(out.provenance(), Provenance::reduced);
}

TEST(IntersectHypotheses, EmptyRealKeepsEverything) {
  HypothesisSet sim(Provenance::simulated, {hyp("T1", "E", R, 4.0, 0.0), hyp("T2", "C", L, 4.0, 0.0)});
  auto out = intersect_hypotheses(sim, HypothesisSet(Provenance::inverse), {});
  EXPECT_EQ(out.items(), sim.items());
}

TEST(IntersectHypotheses, EmptySim) {
  HypothesisSet real(Provenance::inverse, {hyp({}, "E", {}, {}, {})});
  EXPECT_TRUE(intersect_hypotheses(HypothesisSet(Provenance::simulated), real, {}).empty());
}

TEST(IntersectHypotheses, RejectsPartialSimulationHypotheses) {
  HypothesisSet sim(Provenance::simulated, {hyp("T1", "E", R, {}, 0.0)});
  EXPECT_THROW(intersect_hypotheses(sim, {}, {}), ValidationError);
}

TEST(HypothesisSet, SetSemanticsKeepInsertionOrder) {
  HypothesisSet s;
  auto a = hyp("B", "E", R, 4.0, 0.0);
  auto b = hyp("A", "E", R, 4.0, 0.0);
  EXPECT_TRUE(s.insert(a));
  EXPECT_TRUE(s.insert(b));
  EXPECT_FALSE(s.insert(a));
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.items()[0], a);
  EXPECT_EQ(s.items()[1], b);
}

TEST(MotionVector, Validation) {
  EXPECT_NO_THROW((MotionVector{R, 1.0, -90.0}.validate()));
  EXPECT_THROW((MotionVector{R, 0.0, 0.0}.validate()), ValidationError);
  EXPECT_THROW((MotionVector{R, 1.0, 90.0}.validate()), ValidationError);
  EXPECT_THROW((MotionVector{{}, -2.0, {}}.validate()), ValidationError);
}

TEST(Direction, RoundTrip) {
  EXPECT_EQ(parse_direction(to_string(R)), R);
  EXPECT_EQ(parse_direction(to_string(L)), L);
  EXPECT_THROW(parse_direction("up"), ValidationError);
}

// Properties over random grids: inclusion, monotonicity.
class WildcardProperties : public ::testing::TestWithParam<int> {};

TEST_P(WildcardProperties, InclusionAndMonotonicity) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()));
  const std::vector<std::string> types{"A", "B", "C"};
  const std::map<std::string, std::string> cat{{"A", "X"}, {"B", "X"}, {"C", "Y"}};
  const std::vector<double> vs{3, 4, 5, 6}, as{-5, 0, 5};
  HypothesisSet sim(Provenance::simulated);
  for (const auto& t : types)
    for (auto d : {R, L})
      for (double v : vs)
        for (double a : as)
          if (rng() % 3) sim.insert(hyp(t, cat.at(t), d, v, a));
  MatchTolerances tol{0.5, 2.5};
  auto random_pattern = [&] {
    Hypothesis p;
    if (rng() % 2) p.label.object_type = types[rng() % types.size()];
    if (rng() % 2) p.label.category = rng() % 2 ? "X" : "Y";
    if (rng() % 2) p.motion.direction = rng() % 2 ? R : L;
    if (rng() % 2) p.motion.velocity = vs[rng() % vs.size()] + 0.1;
    if (rng() % 2) p.motion.angle = as[rng() % as.size()];
    return p;
  };
  HypothesisSet real(Provenance::inverse);
  for (int k = 0; k < 3; ++k) real.insert(random_pattern());
  auto base = intersect_hypotheses(sim, real, tol);
  for (const auto& h : base) EXPECT_TRUE(sim.contains(h));

  // Adding a pattern never shrinks the result.
  auto bigger = real;
  bigger.insert(random_pattern());
  auto grown = intersect_hypotheses(sim, bigger, tol);
  for (const auto& h : base) EXPECT_TRUE(grown.contains(h));

  // Concretising a field of every pattern never grows the result.
  HypothesisSet narrowed(Provenance::inverse);
  for (auto p : real) {
    if (!p.motion.direction) p.motion.direction = R;
    narrowed.insert(p);
  }
  auto shrunk = intersect_hypotheses(sim, narrowed, tol);
  for (const auto& h : shrunk) EXPECT_TRUE(base.contains(h));
}

INSTANTIATE_TEST_SUITE_P(RandomGrids, WildcardProperties, ::testing::Range(0, 25));

TEST(SensorField, SampleLayout) {
  auto f = testing_support::sample_field();
  EXPECT_EQ(f.size(), 21u);
  EXPECT_EQ(f.primary_line().members.size(), 12u);
  EXPECT_EQ(f.perpendicular_line().members.size(), 9u);
  EXPECT_NEAR(f.anchor().x, 16.5, 1e-12);
  EXPECT_NEAR(f.anchor().y, 0.0, 1e-12);
  EXPECT_EQ(f.index_of("P00"), 0u);
  EXPECT_FALSE(f.index_of("nope").has_value());
}

TEST(SensorField, RejectsInvalidLayouts) {
  using LS = SensorField::LineSpec;
  std::vector<SensorDef> s{{"a", {0, 0}}, {"b", {1, 0}}, {"c", {0.5, 1}}, {"d", {0.5, -1}}};
  std::vector<LS> ok{{"p", LineKind::primary, {"a", "b"}}, {"q", LineKind::perpendicular, {"c", "d"}}};
  EXPECT_NO_THROW(SensorField(s, ok));

  auto dup = s;
  dup[1].id = "a";
  EXPECT_THROW(SensorField(dup, ok), ValidationError);
  auto same_pos = s;
  same_pos[1].position = {0, 0};
  EXPECT_THROW(SensorField(same_pos, ok), ValidationError);
  EXPECT_THROW(SensorField(s, {{"p", LineKind::primary, {"a", "x"}}, ok[1]}), ValidationError);
  EXPECT_THROW(SensorField(s, {ok[0]}), ValidationError);
  EXPECT_THROW(SensorField(s, {ok[0], {"q", LineKind::primary, {"c", "d"}}}), ValidationError);
  EXPECT_THROW(SensorField(s, {ok[0], {"q", LineKind::perpendicular, {"a", "c"}}}), ValidationError);
  auto nan = s;
  nan[2].position.x = std::nan("");
  EXPECT_THROW(SensorField(nan, ok), ValidationError);
}

TEST(SensorField, ReflectionMap) {
  auto f = testing_support::sample_field();
  auto m = f.reflection_map();
  ASSERT_TRUE(m.has_value());
  EXPECT_EQ((*m)[*f.index_of("P00")], *f.index_of("P11"));
  EXPECT_EQ((*m)[*f.index_of("P05")], *f.index_of("P06"));
  EXPECT_EQ((*m)[*f.index_of("C0")], *f.index_of("C0"));
}

TEST(Taxonomy, Levels) {
  auto t = testing_support::sample_taxonomy();
  EXPECT_TRUE(t.has_level("type"));
  EXPECT_TRUE(t.has_level("arc"));
  EXPECT_TRUE(t.has_level("cat17"));
  EXPECT_FALSE(t.has_level("wingspan"));
  EXPECT_EQ(t.category_of("A333"), "E");
  EXPECT_EQ(t.label_at("B738", "cat17"), "narrow-boeing");
  EXPECT_THROW(t.label_at("B738", "wingspan"), ValidationError);
  EXPECT_EQ(t.categories(), (std::set<std::string>{"C", "D", "E"}));
  EXPECT_NO_THROW(t.validate({"A320", "C"}));
  EXPECT_THROW(t.validate({"A320", "E"}), ValidationError);
}

TEST(LeastSquares, ThreePointSlope) {
  std::vector<double> x{0, 2, 4}, t{0, 1, 2};
  auto fit = least_squares(t, x);
  ASSERT_TRUE(fit);
  EXPECT_DOUBLE_EQ(fit->slope, 2.0);  // m/s
  EXPECT_DOUBLE_EQ(fit->intercept, 0.0);
}

TEST(LeastSquares, DegenerateInput) {
  std::vector<double> one{1.0};
  EXPECT_FALSE(least_squares(one, one));
  std::vector<double> x{1, 1, 1}, y{0, 1, 2};
  EXPECT_FALSE(least_squares(x, y));
}

TEST(LeastSquares, MatchesClosedFormOnNoisyData) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0, 0.1);
  std::vector<double> x, y;
  for (int i = 0; i < 40; ++i) {
    x.push_back(i * 0.25);
    y.push_back(1.5 - 0.75 * x.back() + n(rng));
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
  auto fit = least_squares(x, y);
  ASSERT_TRUE(fit);
  EXPECT_NEAR(fit->slope, sxy / sxx, 1e-12);
  EXPECT_NEAR(fit->intercept, my - sxy / sxx * mx, 1e-12);
}

TEST(Geometry, VectorOps) {
  Vec2 a{3, 4};
  EXPECT_DOUBLE_EQ(a.norm(), 5.0);
  EXPECT_DOUBLE_EQ(a.perp().x, -4.0);
  EXPECT_DOUBLE_EQ(a.perp().y, 3.0);
  EXPECT_DOUBLE_EQ(a.dot({1, 0}), 3.0);
  EXPECT_DOUBLE_EQ(Vec2(1, 0).cross({0, 1}), 1.0);
  Box2 b;
  b.extend({0, 0});
  b.extend({2, 1});
  EXPECT_TRUE(b.contains({1, 0.5}));
  EXPECT_FALSE(b.contains({3, 0}));
  EXPECT_TRUE(b.inflated(1.0).contains({3, 0}));
}

}  // namespace

#include <gtest/gtest.h>

#include <csi/invariants.hpp>

#include <cmath>

using namespace csi;

namespace {

MCParams params(std::uint64_t n = 2000000, std::uint64_t seed = 7) {
  MCParams p;
  p.samples = n;
  p.seed = seed;
  return p;
}

LongCurve knot(const std::string& name) { return std::get<LongCurve>(builtin(name)); }
LongLink2 link(const std::string& name) { return std::get<LongLink2>(builtin(name)); }

void expect_close(const IntegralEstimate& e, double want, double slack = 0.02) {
  EXPECT_NEAR(e.value, want, 4 * e.std_error + slack) << "stderr " << e.std_error;
}

}  // namespace

TEST(Linking, Hopf) {
  auto e = linking_number(link("long_hopf"), params());
  expect_close(e, 1.0, 0.005);
  EXPECT_EQ(e.diagnostics.extra.at("nearest_integer"), 1.0);
  EXPECT_LT(e.diagnostics.extra.at("distance_to_integer"), 0.01);
}

TEST(Linking, ReflectionNegates) {
  auto h = link("long_hopf");
  auto e = linking_number({h.first, reflected_z(h.second)}, params());
  expect_close(e, -1.0, 0.005);
  auto f = linking_number(h, params());
  EXPECT_NEAR(e.value, -f.value, 1e-12);
}

TEST(Linking, ParallelLinesAreExactlyZero) {
  auto e = linking_number(link("parallel_lines"), params(100000));
  EXPECT_EQ(e.value, 0.0);
  EXPECT_EQ(e.std_error, 0.0);
}

TEST(Linking, SingleChordIntegralIsTheLinkingNumber) {
  auto h = link("long_hopf");
  EXPECT_EQ(integrate_diagram(single_chord(), h, params(200000)).value,
            linking_number(h, params(200000)).value);
}

TEST(SelfLinking, FlatCurvesVanish) {
  EXPECT_EQ(self_linking_A(knot("line"), params(100000)).value, 0.0);
  EXPECT_EQ(self_linking_A(knot("long_unknot_planar"), params(100000)).value, 0.0);
}

TEST(SelfLinking, TranslationInvariant) {
  auto k = knot("long_trefoil");
  auto a = self_linking_A(k, params());
  auto b = self_linking_A(shifted(k, 1.5), params());
  EXPECT_NEAR(a.value, b.value, 4 * std::hypot(a.std_error, b.std_error) + 0.01);
}

TEST(Diagrams, ChordDiagramOnTheLineIsExactlyZero) {
  auto e = integrate_diagram(x_diagram(), knot("line"), params(100000));
  EXPECT_EQ(e.value, 0.0);
  EXPECT_EQ(e.std_error, 0.0);
}

TEST(Diagrams, TripodOnTheLineVanishes) {
  expect_close(integrate_diagram(tripod_diagram(), knot("line"), params(500000)), 0.0, 0.005);
}

TEST(Diagrams, TruncationDefaultsToFourTimesRadiusPlusOne) {
  auto k = knot("long_trefoil");
  auto e = integrate_diagram(single_chord(), k, params(1000));
  EXPECT_DOUBLE_EQ(e.truncation, 4 * (k.support_radius() + 1));
  auto p = params(1000);
  p.truncation = 1.0;  // inside the support
  EXPECT_THROW(integrate_diagram(single_chord(), k, p), Error);
}

TEST(Casson, LineIsZero) { expect_close(casson_v2(knot("line"), params(500000)), 0.0, 0.005); }

TEST(Casson, PlanarUnknotIsZero) { expect_close(casson_v2(knot("long_unknot_planar"), params()), 0.0); }

TEST(Casson, Trefoil) {
  auto e = casson_v2(knot("long_trefoil"), params());
  expect_close(e, 1.0);
  EXPECT_LT(e.std_error, 0.05);
  for (auto key : {"I_X", "I_X_stderr", "I_tripod", "I_tripod_stderr"}) EXPECT_TRUE(e.diagnostics.extra.count(key));
  EXPECT_NEAR(e.diagnostics.extra.at("I_X") - e.diagnostics.extra.at("I_tripod"), e.value, 1e-12);
}

TEST(Casson, FigureEight) {
  auto e = casson_v2(knot("long_figure_eight"), params());
  expect_close(e, -1.0);
  EXPECT_LT(e.std_error, 0.1);
}

TEST(Casson, IsotopicParametrizationsAgree) {
  auto a = casson_v2(knot("long_trefoil"), params());
  auto b = casson_v2(long_trefoil_alternate(), params());
  EXPECT_NEAR(a.value, b.value, 4 * std::hypot(a.std_error, b.std_error) + 0.02);
}

TEST(TypeK, CassonWeightSystemReproducesV2) {
  auto k = knot("long_trefoil");
  auto w = casson_weight_system();
  EXPECT_TRUE(weight_system_violations(w).empty());
  auto a = type_k_invariant(w, k, params(500000));
  auto b = casson_v2(k, params(500000));
  EXPECT_NEAR(a.value, b.value, 1e-12);
  EXPECT_NEAR(a.std_error, b.std_error, 1e-12);
}

TEST(TypeK, LinearInTheWeightSystem) {
  auto k = knot("long_trefoil");
  auto w = casson_weight_system();
  for (auto& [d, v] : w.values) v *= 3;
  EXPECT_NEAR(type_k_invariant(w, k, params(200000)).value,
              3 * type_k_invariant(casson_weight_system(), k, params(200000)).value, 1e-12);
}

TEST(TypeK, ZeroWeightSystemNeedsNoSampling) {
  WeightSystem w{2, Family::trivalent, Parity::odd, {}};
  auto e = type_k_invariant(w, knot("long_trefoil"), params(1000000000000ULL, 9));
  EXPECT_EQ(e.value, 0.0);
  EXPECT_EQ(e.std_error, 0.0);
  EXPECT_EQ(e.seed, 9u);
  EXPECT_EQ(e.diagnostics.evaluated, 0u);
}

TEST(TypeK, AnomalySubtractsSelfLinking) {
  auto k = knot("long_trefoil");
  auto p = params(300000);
  Anomaly mu{{canonical_form(x_diagram()).diagram, 0.5}};
  auto with = type_k_invariant(casson_weight_system(), k, p, mu);
  auto plain = type_k_invariant(casson_weight_system(), k, p);
  auto a = self_linking_A(k, p);
  EXPECT_NEAR(with.value, plain.value - 0.5 * a.value, 1e-12);
}

TEST(TypeK, RejectsMismatchedInput) {
  auto k = knot("long_trefoil");
  auto w = casson_weight_system();
  w.k = 3;
  EXPECT_THROW(type_k_invariant(w, k, params(1000)), Error);
  w.k = 5;
  EXPECT_THROW(type_k_invariant(w, k, params(1000)), Error);
  auto c = casson_weight_system();
  c.family = Family::chord;
  EXPECT_THROW(type_k_invariant(c, k, params(1000)), Error);
  Anomaly bad{{single_chord(), 1.0}};
  EXPECT_THROW(type_k_invariant(casson_weight_system(), k, params(1000), bad), Error);
}

TEST(Skein, ThreeDoublePointsKillV2) {
  auto s = std::get<SingularLongKnot>(builtin("singular_x3"));
  auto e = skein_alternating_sum(s, casson_v2, kDefaultResolutionEps, params(1000000));
  expect_close(e, 0.0, 0.01);
  EXPECT_EQ(e.diagnostics.extra.count("resolution_7"), 1u);
}

TEST(Skein, NestedDoublePointsGiveZero) {
  auto s = std::get<SingularLongKnot>(builtin("singular_x2_nested"));
  expect_close(skein_alternating_sum(s, casson_v2, kDefaultResolutionEps, params(1000000)), 0.0, 0.01);
}

TEST(Skein, CrossedDoublePointsGiveTheWeightSystemValue) {
  auto s = std::get<SingularLongKnot>(builtin("singular_x2_crossed"));
  auto e = skein_alternating_sum(s, casson_v2, kDefaultResolutionEps, params());
  expect_close(e, 1.0, 0.05);
  EXPECT_LT(e.std_error, 0.15);
}

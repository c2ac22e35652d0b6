#include <gtest/gtest.h>

#include <csi/diagram.hpp>
#include <csi/integrand.hpp>

#include <numbers>
#include <random>

using namespace csi;

namespace {

const Diagram kChord = decode("p=2 q=0 chords=[(1,2)] loops=[] edges=[] parity=odd");
const Diagram kX = decode("p=4 q=0 chords=[(1,3),(2,4)] loops=[] edges=[] parity=odd");
const Diagram kTripod = decode("p=3 q=1 chords=[] loops=[] edges=[(1,4),(2,4),(3,4)] parity=odd");
const Diagram kH = decode("p=4 q=2 chords=[] loops=[] edges=[(1,5),(2,5),(5,6),(3,6),(4,6)] parity=odd");

// Classical Gauss linking integrand det(d1, d2, x1 - x2) / (4 pi |x1 - x2|^3).
double gauss_oracle(const CurvePoint& a, const CurvePoint& b) {
  Vec3 r = a.x - b.x;
  return a.dx.cross(b.dx).dot(r) / (4 * std::numbers::pi * std::pow(r.norm(), 3));
}

Vec3 random_vec(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return {g(rng), g(rng), g(rng)};
}

std::vector<CurvePoint> random_segment(std::mt19937_64& rng, int n) {
  std::vector<CurvePoint> out;
  for (int i = 0; i < n; ++i) out.push_back({random_vec(rng), random_vec(rng)});
  return out;
}

std::vector<Vec3> random_free(std::mt19937_64& rng, int n) {
  std::vector<Vec3> out;
  for (int i = 0; i < n; ++i) out.push_back(random_vec(rng));
  return out;
}

}  // namespace

TEST(GaussMap, Examples) {
  EXPECT_EQ(gauss_map(Vec3(0, 0, 0), Vec3(0, 0, 2)), Vec3(0, 0, 1));
  EXPECT_EQ(gauss_map(Vec3(1, 1, 0), Vec3(-2, 1, 0)), Vec3(-1, 0, 0));
  EXPECT_THROW(gauss_map(Vec3(1, 2, 3), Vec3(1, 2, 3)), Error);
}

TEST(GaussMap, AntipodalUnderSwap) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    Vec3 a = random_vec(rng), b = random_vec(rng);
    EXPECT_NEAR((gauss_map(a, b) + gauss_map(b, a)).norm(), 0, 1e-15);
    EXPECT_NEAR(gauss_map(a, b).norm(), 1, 1e-15);
  }
}

TEST(SphereFrame, OrthonormalAndPositivelyOriented) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 200; ++i) {
    Vec3 u = random_vec(rng).normalized();
    auto f = SphereFrame::at(u).rotated(0.37 * i);
    EXPECT_NEAR(f.e1.dot(u), 0, 1e-14);
    EXPECT_NEAR(f.e2.dot(u), 0, 1e-14);
    EXPECT_NEAR(f.e1.dot(f.e2), 0, 1e-14);
    EXPECT_NEAR(f.e1.cross(f.e2).dot(u), 1, 1e-14);
  }
}

TEST(Integrand, OrientationSign) {
  EXPECT_EQ(orientation_sign(1), 1);
  EXPECT_EQ(orientation_sign(2), -1);
  EXPECT_EQ(orientation_sign(3), -1);
  EXPECT_EQ(orientation_sign(4), 1);
}

TEST(Integrand, SkewLinesAtTheOrigin) {
  LongLink2 skew{line(0.0), curve_from_function([](double t) {
                   return CurvePoint{Vec3(0, t, 1), Vec3(0, 1, 0)};
                 })};
  FiberPoint x{{0.0, 0.0}, {0, 1}, {}};
  EXPECT_NEAR(pullback_integrand(kChord, skew, x), -1 / (4 * std::numbers::pi), 1e-15);
}

TEST(Integrand, SingleChordIsTheGaussIntegrand) {
  std::mt19937_64 rng(1);
  DiagramIntegrand f(kChord);
  EXPECT_EQ(f.dimension(), 2);
  for (int i = 0; i < 1000; ++i) {
    auto seg = random_segment(rng, 2);
    double want = gauss_oracle(seg[0], seg[1]);
    EXPECT_NEAR(f.evaluate(seg.data(), nullptr), want, 1e-10 * std::abs(want) + 1e-300);
  }
}

TEST(Integrand, FrameRotationsDoNotMatter) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ang(0, 2 * std::numbers::pi);
  for (const auto& d : {kChord, kX, kTripod, kH}) {
    DiagramIntegrand f(d);
    for (int i = 0; i < 200; ++i) {
      auto seg = random_segment(rng, d.p);
      auto free = random_free(rng, d.q);
      std::vector<double> rot(static_cast<std::size_t>(d.edge_count()));
      for (auto& r : rot) r = ang(rng);
      double a = f.evaluate(seg.data(), free.data()), b = f.evaluate(seg.data(), free.data(), rot.data());
      EXPECT_NEAR(a, b, 1e-10 * std::abs(a) + 1e-14) << encode(d);
    }
  }
}

TEST(Integrand, ReversingAnEdgeNegates) {
  std::mt19937_64 rng(5);
  for (const auto& d : {kChord, kX, kTripod, kH}) {
    DiagramIntegrand f(d);
    for (std::size_t e = 0; e < d.chords.size() + d.edges.size(); ++e) {
      Diagram r = d;
      auto& pair = e < d.chords.size() ? r.chords[e] : r.edges[e - d.chords.size()];
      std::swap(pair.first, pair.second);
      DiagramIntegrand g(r);
      for (int i = 0; i < 20; ++i) {
        auto seg = random_segment(rng, d.p);
        auto free = random_free(rng, d.q);
        double a = f.evaluate(seg.data(), free.data()), b = g.evaluate(seg.data(), free.data());
        EXPECT_NEAR(a, -b, 1e-10 * std::abs(a) + 1e-14);
      }
    }
  }
}

// Relabelling changes the integrand by the same sign the canonical form
// assigns, so the analytic and algebraic sides agree.
TEST(Integrand, RelabellingMatchesCanonicalSign) {
  std::mt19937_64 rng(6);
  for (const auto& d : {kX, kTripod, kH}) {
    DiagramIntegrand f(d);
    const int sd = canonical_form(d).sign;
    std::vector<int> labels(static_cast<std::size_t>(d.vertex_count()));
    std::iota(labels.begin(), labels.end(), 1);
    for (int t = 0; t < 10; ++t) {
      std::shuffle(labels.begin(), labels.end(), rng);
      Diagram r = d;
      r.vertex_labels = labels;
      auto cr = canonical_form(r);
      ASSERT_EQ(cr.diagram, canonical_form(d).diagram);
      DiagramIntegrand g(r);
      auto seg = random_segment(rng, d.p);
      auto free = random_free(rng, d.q);
      double a = f.evaluate(seg.data(), free.data()), b = g.evaluate(seg.data(), free.data());
      EXPECT_NEAR(b, cr.sign * sd * a, 1e-10 * std::abs(a) + 1e-14) << encode(r);
    }
  }
}

TEST(Integrand, SwappingFreeVerticesMatchesCanonicalSign) {
  // H with its two free vertices exchanged, evaluated at exchanged positions
  const Diagram swapped =
      decode("p=4 q=2 chords=[] loops=[] edges=[(1,6),(2,6),(6,5),(3,5),(4,5)] parity=odd");
  ASSERT_EQ(canonical_form(swapped).diagram, canonical_form(kH).diagram);
  const int rel = canonical_form(swapped).sign * canonical_form(kH).sign;
  DiagramIntegrand f(kH), g(swapped);
  std::mt19937_64 rng(8);
  for (int i = 0; i < 50; ++i) {
    auto seg = random_segment(rng, 4);
    auto free = random_free(rng, 2);
    std::vector<Vec3> other{free[1], free[0]};
    double a = f.evaluate(seg.data(), free.data()), b = g.evaluate(seg.data(), other.data());
    EXPECT_NEAR(b, rel * a, 1e-10 * std::abs(a) + 1e-14);
  }
}

TEST(Integrand, DegenerateConfigurationsVanish) {
  // everything on the line, or a planar writhe configuration
  DiagramIntegrand x(kX), c(kChord), t(kTripod);
  std::vector<CurvePoint> on_line;
  for (double s : {-2.0, -0.5, 0.3, 1.7}) on_line.push_back({Vec3(s, 0, 0), Vec3(1, 0, 0)});
  EXPECT_EQ(x.evaluate(on_line.data(), nullptr), 0.0);
  Vec3 above(0.1, 0, 0);
  EXPECT_EQ(t.evaluate(on_line.data(), &above), 0.0);
  std::mt19937_64 rng(9);
  for (int i = 0; i < 100; ++i) {
    auto seg = random_segment(rng, 2);
    for (auto& s : seg) s.x.z() = s.dx.z() = 0;
    EXPECT_EQ(c.evaluate(seg.data(), nullptr), 0.0);
  }
}

TEST(Integrand, CoincidentPointsGiveNaN) {
  DiagramIntegrand t(kTripod);
  std::vector<CurvePoint> seg{{Vec3(0, 0, 0), Vec3(1, 0, 0)}, {Vec3(1, 0, 0), Vec3(1, 0, 0)},
                              {Vec3(2, 0, 0), Vec3(1, 0, 0)}};
  Vec3 v(1, 0, 0);
  EXPECT_TRUE(std::isnan(t.evaluate(seg.data(), &v)));
  FiberPoint x{{0.0, 1.0, 2.0}, {}, {v}};
  EXPECT_THROW(pullback_integrand(kTripod, line(), x), Error);
}

TEST(Integrand, RejectsBadInput) {
  EXPECT_THROW(DiagramIntegrand(decode("p=3 q=0 chords=[(1,2)] loops=[3] edges=[] parity=odd")), Error);
  try {
    DiagramIntegrand(decode("p=3 q=0 chords=[(1,2),(2,3)] loops=[] edges=[] parity=odd"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("degree"), std::string::npos);
  }
  FiberPoint backwards{{1.0, 0.0, 2.0, 3.0}, {}, {}};
  EXPECT_THROW(pullback_integrand(kX, line(), backwards), Error);
  FiberPoint short_point{{0.0}, {}, {}};
  EXPECT_THROW(pullback_integrand(kX, line(), short_point), Error);
}

TEST(Integrand, LinkStrandsDefaultToHalves) {
  LongLink2 l{line(0.0), line(1.0)};
  // chord across two parallel strands: coplanar, so zero; the default strand
  // split puts the vertices on different strands and allows equal times
  FiberPoint x{{0.0, 0.0}, {}, {}};
  EXPECT_EQ(pullback_integrand(kChord, l, x), 0.0);
  EXPECT_THROW(pullback_integrand(kChord, line(), x), Error);
}

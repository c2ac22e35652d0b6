// Acceptance run: one PASS/FAIL line per criterion.

#include <csi/algebra.hpp>
#include <csi/integrand.hpp>
#include <csi/invariants.hpp>
#include <csi/report.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "random_diagram.hpp"

using namespace csi;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Line {
  bool ok = true;
  std::ostringstream detail;

  void check(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void report(int n, const std::string& name, Line& l) {
  std::printf("%s criterion %d (%s):%s\n", l.ok ? "PASS" : "FAIL", n, name.c_str(), l.detail.str().c_str());
  std::fflush(stdout);
  failures += !l.ok;
}

std::string pm(const IntegralEstimate& e) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.5f +- %.5f", e.value, e.std_error);
  return buf;
}

double rejection_fraction(const IntegralEstimate& e) {
  return e.diagnostics.evaluated ? double(e.diagnostics.rejected) / double(e.diagnostics.evaluated) : 0.0;
}

MCParams params(std::uint64_t n, std::uint64_t seed = 7) {
  MCParams p;
  p.samples = n;
  p.seed = seed;
  return p;
}

LongCurve knot(const std::string& name) { return std::get<LongCurve>(builtin(name)); }

LongLink2 skew_lines() {
  return {line(0.0), curve_from_function([](double t) { return CurvePoint{Vec3(0, t, 1), Vec3(0, 1, 0)}; })};
}

constexpr double kSkewL = 1e4;
constexpr std::uint64_t kCassonBudget = 8000000;
constexpr std::uint64_t kSkeinBudget = 4000000;
constexpr std::uint64_t kCrossedBudget = 8000000;

bool in_span(const std::vector<Diagram>& space, std::vector<RelationSet> rel, const DiagramVector& v) {
  const auto before = bareiss_rank(relation_matrix(space, rel));
  rel.push_back({RelationKind::stu, {v}});
  return bareiss_rank(relation_matrix(space, rel)) == before;
}

void linking() {
  Line l;
  auto t0 = Clock::now();
  auto e = linking_number(std::get<LongLink2>(builtin("long_hopf")), params(2000000));
  double secs = seconds_since(t0);
  auto z = linking_number(std::get<LongLink2>(builtin("parallel_lines")), params(2000000));
  l.detail << " lk(hopf) = " << pm(e) << " in " << secs << " s; lk(parallel) = " << z.value;
  l.check(e.value >= 0.98 && e.value <= 1.02, "value in [0.98, 1.02]");
  l.check(e.std_error < 0.01, "stderr < 0.01");
  l.check(secs < 60, "runtime < 60 s");
  l.check(z.value == 0.0 && z.std_error == 0.0, "parallel lines exactly 0");
  l.check(rejection_fraction(e) < 1e-6, "rejection fraction < 1e-6");
  report(1, "linking number", l);
}

void skew() {
  Line l;
  auto p = params(2000000);
  p.truncation = kSkewL;
  auto e = integrate_diagram(single_chord(), skew_lines(), p);
  l.detail << " I = " << pm(e) << " at L = " << kSkewL << " (closed form -1/2)";
  l.check(std::abs(e.value + 0.5) <= 3 * e.std_error, "within 3 sigma of -1/2");
  l.check(e.std_error < 0.005, "stderr < 0.005");
  report(2, "skew-lines oracle", l);
}

void casson_and_truncation() {
  Line c, t;
  struct Case {
    const char* name;
    double want;
    double max_sigma;
  };
  for (auto [name, want, max_sigma] : {Case{"line", 0.0, 0.03}, Case{"long_trefoil", 1.0, 0.05},
                                       Case{"long_figure_eight", -1.0, 1e9}}) {
    auto k = knot(name);
    auto p = params(kCassonBudget);
    auto t0 = Clock::now();
    auto e = casson_v2(k, p);
    double secs = seconds_since(t0);
    c.detail << " " << name << " " << pm(e) << " (" << secs << " s);";
    c.check(std::abs(e.value - want) <= 3 * e.std_error, std::string(name) + " within 3 sigma");
    if (max_sigma < 1e9) c.check(e.std_error < max_sigma, std::string(name) + " sigma bound");
    c.check(secs < 900, std::string(name) + " runtime");
    c.check(rejection_fraction(e) < 1e-6, std::string(name) + " rejection fraction");

    auto q = p;
    q.truncation = 2 * e.truncation;
    auto d = casson_v2(k, q);
    double diff = std::abs(d.value - e.value), bound = 2 * std::hypot(e.std_error, d.std_error);
    t.detail << " " << name << " L=" << e.truncation << " -> " << q.truncation << ": |diff| " << diff << " < " << bound
             << ";";
    t.check(diff < bound, std::string(name) + " stable under doubling L");
  }
  report(3, "Casson invariant", c);
  report(4, "truncation stability", t);
}

void finite_type() {
  Line l;
  struct Case {
    const char* name;
    double want;
    std::uint64_t budget;
  };
  for (auto [name, want, budget] : {Case{"singular_x3", 0.0, kSkeinBudget},
                                    Case{"singular_x2_crossed", 1.0, kCrossedBudget},
                                    Case{"singular_x2_nested", 0.0, kSkeinBudget}}) {
    auto s = std::get<SingularLongKnot>(builtin(name));
    auto e = skein_alternating_sum(s, casson_v2, kDefaultResolutionEps, params(budget));
    l.detail << " " << name << " " << pm(e) << ";";
    l.check(std::abs(e.value - want) <= 3 * e.std_error, std::string(name) + " within 3 sigma");
  }
  report(5, "finite-type property", l);
}

void combinatorics() {
  Line l;
  for (auto par : {Parity::odd, Parity::even}) {
    auto r = verify_complex(par, 8, 3);
    l.detail << " d^2=0 on " << r.checked << " " << to_string(par) << " diagrams (<= 8 vertices);";
    l.check(r.failures.empty(), std::string("d^2 = 0, ") + to_string(par));
  }
  std::mt19937 rng(2024);
  int random_ok = 0;
  for (auto par : {Parity::odd, Parity::even})
    for (int done = 0; done < 100;) {
      int p = 3 + static_cast<int>(rng() % 5), q = 1 + static_cast<int>(rng() % 3);
      if (p + q < 9) continue;
      auto d = testing::random_diagram(rng, par, p, q);
      if (!d) continue;
      ++done;
      random_ok += coboundary(coboundary(*d)).is_zero();
    }
  l.detail << " d^2=0 on " << random_ok << "/200 random larger diagrams;";
  l.check(random_ok == 200, "random larger diagrams");

  l.detail << " chord ranks";
  const std::size_t want[] = {0, 1, 1, 3};
  for (int k = 1; k <= 4; ++k) {
    auto q = quotient_rank(family_space(k, Family::chord, Parity::odd),
                           family_relations(k, Family::chord, Parity::odd));
    l.detail << " " << q.rank;
    l.check(q.rank == want[k - 1], "chord rank k=" + std::to_string(k));
  }
  l.detail << ";";
  for (int k = 1; k <= 3; ++k)
    l.check(weight_system_space(k, Family::chord).size() == weight_system_space(k, Family::trivalent).size(),
            "weight-system dimensions agree at k=" + std::to_string(k));
  auto ws = weight_system_space(2, Family::trivalent);
  bool prop = ws.size() == 1;
  if (prop) {
    auto x = ws[0](x_diagram()), t = ws[0](tripod_diagram());
    prop = sgn(x) != 0 && t == -x;
    l.detail << " W2(X) : W2(tripod) = " << x.get_str() << " : " << t.get_str();
  }
  l.check(prop, "degree-2 weight system proportional to (1, -1)");
  report(6, "exact combinatorics", l);
}

void stu_well_defined() {
  Line l;
  std::mt19937 rng(99);
  StuSelector shuffled = [&rng](const Diagram&, std::vector<int> c) {
    std::shuffle(c.begin(), c.end(), rng);
    return c;
  };
  std::size_t checked = 0;
  for (int k = 1; k <= 3; ++k) {
    auto space = family_space(k, Family::chord, Parity::odd);
    auto rel = family_relations(k, Family::chord, Parity::odd);
    for (auto& g : trivalent_data(k, Parity::odd).basis) {
      auto a = stu_reduce(g, stu_first());
      for (auto& b : {stu_reduce(g, stu_last()), stu_reduce(g, shuffled)}) {
        ++checked;
        l.check(in_span(space, rel, a - b), encode(g));
      }
    }
  }
  l.detail << " " << checked << " order pairs agree modulo 1T+4T";
  report(7, "STU well-definedness", l);
}

void integrand_oracle() {
  Line l;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  auto vec = [&] { return Vec3(g(rng), g(rng), g(rng)); };
  double worst = 0, worst_rot = 0;
  const Diagram chord = single_chord();
  for (int i = 0; i < 1000; ++i) {
    Vec3 x1 = vec(), d1 = vec(), x2 = vec(), d2 = vec();
    LongLink2 pair{curve_from_function([=](double t) { return CurvePoint{x1 + t * d1, d1}; }),
                   curve_from_function([=](double t) { return CurvePoint{x2 + t * d2, d2}; })};
    double got = pullback_integrand(chord, pair, FiberPoint{{0.0, 0.0}, {0, 1}, {}});
    Vec3 r = x1 - x2;
    double want = d1.cross(d2).dot(r) / (4 * std::numbers::pi * std::pow(r.norm(), 3));
    worst = std::max(worst, std::abs(got - want) / std::abs(want));
  }
  std::uniform_real_distribution<double> ang(0, 2 * std::numbers::pi);
  for (const Diagram& d : {single_chord(), x_diagram(), tripod_diagram()}) {
    DiagramIntegrand f(d);
    for (int i = 0; i < 1000; ++i) {
      std::vector<CurvePoint> seg;
      for (int j = 0; j < d.p; ++j) seg.push_back({vec(), vec()});
      std::vector<Vec3> free;
      for (int j = 0; j < d.q; ++j) free.push_back(vec());
      std::vector<double> rot(static_cast<std::size_t>(d.edge_count()));
      for (auto& a : rot) a = ang(rng);
      double a = f.evaluate(seg.data(), free.data()), b = f.evaluate(seg.data(), free.data(), rot.data());
      worst_rot = std::max(worst_rot, std::abs(a - b) / std::max(std::abs(a), 1e-300));
    }
  }
  l.detail << " max relative error " << worst << " vs Gauss integrand; " << worst_rot << " under frame rotation";
  l.check(worst <= 1e-10, "Gauss integrand");
  l.check(worst_rot <= 1e-10, "frame rotation");
  report(8, "integrand oracle", l);
}

void determinism() {
  Line l;
  // Bit-identity does not depend on the budget; smaller runs keep this quick.
  using Op = std::function<IntegralEstimate(const MCParams&)>;
  const std::uint64_t n = 200000;
  auto skein = [](const char* name) {
    return [name](const MCParams& p) {
      return skein_alternating_sum(std::get<SingularLongKnot>(builtin(name)), casson_v2, kDefaultResolutionEps, p);
    };
  };
  const std::vector<std::pair<std::string, Op>> ops{
      {"lk long_hopf", [](const MCParams& p) { return linking_number(std::get<LongLink2>(builtin("long_hopf")), p); }},
      {"lk parallel_lines",
       [](const MCParams& p) { return linking_number(std::get<LongLink2>(builtin("parallel_lines")), p); }},
      {"skew lines",
       [](const MCParams& p) {
         auto q = p;
         q.truncation = kSkewL;
         return integrate_diagram(single_chord(), skew_lines(), q);
       }},
      {"v2 line", [](const MCParams& p) { return casson_v2(knot("line"), p); }},
      {"v2 long_trefoil", [](const MCParams& p) { return casson_v2(knot("long_trefoil"), p); }},
      {"v2 long_figure_eight", [](const MCParams& p) { return casson_v2(knot("long_figure_eight"), p); }},
      {"type-k casson", [](const MCParams& p) { return type_k_invariant(casson_weight_system(), knot("long_trefoil"), p); }},
      {"skein singular_x3", skein("singular_x3")},
      {"skein singular_x2_crossed", skein("singular_x2_crossed")},
      {"skein singular_x2_nested", skein("singular_x2_nested")},
  };
  int identical = 0;
  for (auto& [name, op] : ops) {
    std::string first;
    bool same = true;
    for (unsigned w : {1u, 4u, 8u}) {
      auto p = params(n, 11);
      p.workers = w;
      auto text = estimate_report(name, "", "", p, op(p)).dump();
      if (w == 1)
        first = text;
      else
        same = same && text == first;
    }
    identical += same;
    l.check(same, name);
  }
  l.detail << " " << identical << "/" << ops.size() << " operations bit-identical across 1, 4, 8 workers";
  report(9, "determinism", l);
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> steps{linking, skew, casson_and_truncation, finite_type,
                                                 combinatorics, stu_well_defined, integrand_oracle, determinism};
  for (auto& s : steps) {
    try {
      s();
    } catch (const std::exception& e) {
      std::printf("FAIL (exception): %s\n", e.what());
      ++failures;
    }
  }
  std::printf("%d criteria failed\n", failures);
  return failures ? 1 : 0;
}

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <vector>

#include "algebra.hpp"
#include "curve.hpp"
#include "integrand.hpp"
#include "qmc.hpp"

namespace csi {

// Time proposal on [-L, L], a mixture of: a uniform density on the support
// window [-s, s]; a Cauchy density of scale s centred at 0; and Cauchy
// densities at "hotspot" parameters (near self-approaches of the curve) with
// their own scales.  All Cauchy parts are truncated to [-L, L].
class TimeProposal {
 public:
  struct Hotspot {
    double center, scale;
  };

  TimeProposal(double scale, double truncation, double uniform_weight,
               std::vector<Hotspot> hotspots = {}, double hotspot_weight = 0)
      : l_(truncation), h_(std::min(scale, truncation)) {
    const double rest = hotspots.empty() ? 1.0 : 1.0 - hotspot_weight;
    parts_.push_back({0, 0, rest * uniform_weight, 0, 0});
    add_cauchy(0.0, scale, rest * (1 - uniform_weight));
    for (auto& hs : hotspots) add_cauchy(hs.center, hs.scale, hotspot_weight / static_cast<double>(hotspots.size()));
  }

  double sample(double u) const {
    std::size_t i = 0;
    while (i + 1 < parts_.size() && u >= parts_[i].weight) u -= parts_[i++].weight;
    const Part& c = parts_[i];
    double v = std::clamp(u / c.weight, 0.0, 1.0);
    if (i == 0) return h_ * (2 * v - 1);
    return std::clamp(c.center + c.scale * std::tan(c.lo + v * (c.hi - c.lo)), -l_, l_);
  }

  double density(double t) const {
    double g = std::abs(t) <= h_ ? parts_[0].weight / (2 * h_) : 0.0;
    for (std::size_t i = 1; i < parts_.size(); ++i) {
      const Part& c = parts_[i];
      double z = (t - c.center) / c.scale;
      g += c.weight / (c.scale * (c.hi - c.lo) * (1 + z * z));
    }
    return g;
  }

  double truncation() const { return l_; }
  std::size_t components() const { return parts_.size(); }

 private:
  struct Part {
    double center, scale, weight, lo, hi;  // angles lo, hi bound the truncated arctan
  };

  void add_cauchy(double c, double s, double w) {
    if (w <= 0) return;
    parts_.push_back({c, s, w, std::atan((-l_ - c) / s), std::atan((l_ - c) / s)});
  }

  double l_, h_;
  std::vector<Part> parts_;
};

// Importance sampler for the fiber of a diagram over one or two strands.
// Coordinates: one per segment vertex (its time), then four per free vertex
// (mixture component, direction z, direction phi, radius).
class FiberSampler {
 public:
  static constexpr int kMaxSegment = 16;
  static constexpr int kMaxFree = 8;

  FiberSampler(const Diagram& d, std::vector<LongCurve> strands, std::vector<int> strand_of,
               const MCParams& params)
      : f_(d), strands_(std::move(strands)), strand_of_(std::move(strand_of)),
        params_(params), times_(1, 1, 0.5) {
    if (d.p > kMaxSegment || d.q > kMaxFree) throw Error("diagram too large to integrate");
    if (static_cast<int>(strand_of_.size()) != d.p) throw Error("strand assignment does not match the diagram");
    if (!(params.concentration > 0)) throw Error("concentration scale a must be positive");
    if (params.broad_weight < 0 || params.broad_weight > 1) throw Error("broad_weight must lie in [0, 1]");
    if (params.uniform_weight < 0 || params.uniform_weight >= 1) throw Error("uniform_weight must lie in [0, 1)");
    double r = 0;
    for (auto& k : strands_) r = std::max(r, k.support_radius());
    const bool bounded = std::isfinite(r);
    double l = params.truncation;
    if (l == 0) {
      if (!bounded) throw Error("curve has unbounded support: set the truncation L explicitly");
      l = 4 * (r + 1);
    }
    if (bounded && !(l > r)) throw Error("truncation L must exceed the support radius " + std::to_string(r));
    double scale = params.time_scale > 0 ? params.time_scale : (bounded ? r + 1 : 1.0);
    std::vector<TimeProposal::Hotspot> hot;
    if (bounded && params.hotspot_weight > 0)
      for (auto& k : strands_)
        for (auto& c : close_approaches(k, params.hotspot_threshold)) {
          double w = std::max(c.distance, 0.02);
          hot.push_back({c.s, w});
          hot.push_back({c.t, w});
        }
    times_ = TimeProposal(scale, l, params.uniform_weight, std::move(hot), params.hotspot_weight);

    broad_center_ = Vec3::Zero();
    broad_scale_ = scale;
    if (bounded) {
      Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
      for (auto& k : strands_)
        for (int i = 0; i <= 400; ++i) {
          Vec3 x = k.point(-(r + 1) + 2 * (r + 1) * i / 400.0);
          lo = lo.cwiseMin(x);
          hi = hi.cwiseMax(x);
        }
      broad_center_ = (lo + hi) / 2;
      broad_scale_ = std::max(scale, (hi - lo).norm() / 2);
    }

    std::vector<int> count(strands_.size(), 0);
    for (int s : strand_of_) {
      if (s < 0 || s >= static_cast<int>(strands_.size())) throw Error("bad strand index");
      ++count[s];
    }
    factor_ = 1;
    for (int c : count) factor_ /= std::tgamma(c + 1.0);

    anchors_.resize(d.q);
    for (auto [a, b] : d.edges)
      for (auto [v, w] : {std::pair{a, b}, std::pair{b, a}})
        if (v > d.p && w < v) anchors_[v - d.p - 1].push_back(w);
  }

  std::size_t dimension() const { return f_.diagram().p + 4 * static_cast<std::size_t>(f_.diagram().q); }
  double truncation() const { return times_.truncation(); }

  double operator()(const double* u) const {
    const Diagram& d = f_.diagram();
    const int p = d.p, q = d.q;
    double w = factor_;
    std::array<double, kMaxSegment> t{};
    for (int i = 0; i < p; ++i) {
      t[i] = times_.sample(u[i]);
      w /= times_.density(t[i]);
    }
    // sorted times are assigned to each strand's vertices in segment order
    std::array<CurvePoint, kMaxSegment> seg;
    for (int s = 0; s < static_cast<int>(strands_.size()); ++s) {
      std::array<double, kMaxSegment> ts{};
      int n = 0;
      for (int i = 0; i < p; ++i)
        if (strand_of_[i] == s) ts[n++] = t[i];
      std::sort(ts.begin(), ts.begin() + n);
      n = 0;
      for (int i = 0; i < p; ++i)
        if (strand_of_[i] == s) seg[i] = strands_[s].eval(ts[n++]);
    }
    std::array<Vec3, kMaxFree> y;
    for (int j = 0; j < q; ++j) {
      const double* v = u + p + 4 * j;
      const auto& anc = anchors_[j];
      const int m = static_cast<int>(anc.size());
      const double wb = m ? params_.broad_weight : 1.0;
      auto center = [&](int c) -> const Vec3& {
        int a = anc[c];
        return a <= p ? seg[a - 1].x : y[a - p - 1];
      };
      // component
      Vec3 c0;
      double a0;
      if (v[0] < wb || m == 0) {
        c0 = broad_center_;
        a0 = broad_scale_;
      } else {
        int c = std::min(m - 1, static_cast<int>((v[0] - wb) / (1 - wb) * m));
        c0 = center(c);
        a0 = params_.concentration;
      }
      double z = 1 - 2 * v[1], phi = 2 * std::numbers::pi * v[2];
      double sz = std::sqrt(std::max(0.0, 1 - z * z));
      double r = a0 * v[3] / (1 - v[3]);
      y[j] = c0 + r * Vec3(sz * std::cos(phi), sz * std::sin(phi), z);
      double dens = wb * radial_density(y[j] - broad_center_, broad_scale_);
      for (int c = 0; c < m; ++c)
        dens += (1 - wb) / m * radial_density(y[j] - center(c), params_.concentration);
      if (!(dens > 0) || !std::isfinite(dens)) return std::numeric_limits<double>::quiet_NaN();
      w /= dens;
    }
    return f_.evaluate(seg.data(), y.data()) * w;
  }

 private:
  // Density a / (4 pi r^2 (r + a)^2) of the isotropic heavy-tailed offset.
  static double radial_density(const Vec3& x, double a) {
    double r = x.norm();
    return a / (4 * std::numbers::pi * r * r * (r + a) * (r + a));
  }

  DiagramIntegrand f_;
  std::vector<LongCurve> strands_;
  std::vector<int> strand_of_;
  MCParams params_;
  TimeProposal times_;
  Vec3 broad_center_;
  double broad_scale_ = 1;
  double factor_ = 1;
  std::vector<std::vector<int>> anchors_;
};

inline IntegralEstimate integrate_fiber(const FiberSampler& s, const MCParams& p) {
  auto e = cube_integrate([&s](const double* u) { return s(u); }, s.dimension(), p);
  e.truncation = s.truncation();
  return e;
}

inline IntegralEstimate integrate_diagram(const Diagram& d, const LongCurve& k, const MCParams& p) {
  return integrate_fiber(FiberSampler(d, {k}, std::vector<int>(d.p, 0), p), p);
}

// Diagram on a two-strand link: segment vertices 1..p/2 lie on the first
// strand, the rest on the second, unless an assignment is given.
inline IntegralEstimate integrate_diagram(const Diagram& d, const LongLink2& l, const MCParams& p,
                                          std::vector<int> strand_of = {}) {
  if (strand_of.empty())
    for (int i = 0; i < d.p; ++i) strand_of.push_back(i < d.p / 2 ? 0 : 1);
  return integrate_fiber(FiberSampler(d, {l.first, l.second}, std::move(strand_of), p), p);
}

inline Diagram single_chord() {
  Diagram d;
  d.p = 2;
  d.chords = {{1, 2}};
  return d;
}

inline Diagram x_diagram() {
  Diagram d;
  d.p = 4;
  d.chords = {{1, 3}, {2, 4}};
  return d;
}

inline Diagram tripod_diagram() {
  Diagram d;
  d.p = 3;
  d.q = 1;
  d.edges = {{1, 4}, {2, 4}, {3, 4}};
  return d;
}

inline IntegralEstimate linking_number(const LongLink2& l, const MCParams& p) {
  auto e = integrate_diagram(single_chord(), l, p);
  double n = std::round(e.value);
  e.diagnostics.extra["nearest_integer"] = n;
  e.diagnostics.extra["distance_to_integer"] = std::abs(e.value - n);
  return e;
}

inline IntegralEstimate self_linking_A(const LongCurve& k, const MCParams& p) {
  return integrate_diagram(single_chord(), k, p);
}

inline IntegralEstimate casson_v2(const LongCurve& k, const MCParams& p) {
  auto x = integrate_diagram(x_diagram(), k, p);
  auto t = integrate_diagram(tripod_diagram(), k, p);
  auto e = combine({{1.0, &x}, {-1.0, &t}});
  e.diagnostics.extra["I_X"] = x.value;
  e.diagnostics.extra["I_X_stderr"] = x.std_error;
  e.diagnostics.extra["I_tripod"] = t.value;
  e.diagnostics.extra["I_tripod_stderr"] = t.std_error;
  return e;
}

// The degree-2 weight system: 1 on X, -1 on the tripod.
inline WeightSystem casson_weight_system() {
  WeightSystem w{2, Family::trivalent, Parity::odd, {}};
  for (auto [d, c] : {std::pair{x_diagram(), 1}, std::pair{tripod_diagram(), -1}}) {
    auto cf = canonical_form(d);
    w.values[cf.diagram] = cf.sign * c;
  }
  return w;
}

// Anomaly coefficients mu per canonical basis diagram; missing entries are 0.
using Anomaly = std::map<Diagram, double>;

// sum over the trivalent basis of W(G)/|Aut G| * I_G(K) - sum mu_G * A(K).
inline IntegralEstimate type_k_invariant(const WeightSystem& w, const LongCurve& k, const MCParams& p,
                                         const Anomaly& mu = {}) {
  if (w.family != Family::trivalent) throw Error("type_k_invariant needs a trivalent weight system");
  if (w.parity != Parity::odd) throw Error("type_k_invariant needs an odd-parity weight system");
  if (w.k < 1 || w.k > 4) throw Error("weight system degree must be between 1 and 4");
  const auto& data = trivalent_data(w.k, w.parity);
  for (auto& [d, v] : w.values)
    if (!data.aut.count(d))
      throw Error("weight system diagram is not in the degree-" + std::to_string(w.k) +
                  " trivalent basis: " + encode(d));
  for (auto& [d, v] : mu)
    if (!data.aut.count(d)) throw Error("anomaly diagram is not in the basis: " + encode(d));

  std::vector<IntegralEstimate> parts;
  std::vector<double> coef;
  double mu_total = 0;
  for (auto& g : data.basis) {
    auto it = w.values.find(g);
    if (it != w.values.end() && sgn(it->second) != 0) {
      parts.push_back(integrate_diagram(g, k, p));
      coef.push_back(it->second.get_d() / static_cast<double>(data.aut.at(g)));
    }
    auto m = mu.find(g);
    if (m != mu.end()) mu_total += m->second;
  }
  if (mu_total != 0) {
    parts.push_back(self_linking_A(k, p));
    coef.push_back(-mu_total);
  }
  if (parts.empty()) {
    IntegralEstimate zero;
    zero.seed = p.seed;
    return zero;
  }
  std::vector<std::pair<double, const IntegralEstimate*>> terms;
  for (std::size_t i = 0; i < parts.size(); ++i) terms.emplace_back(coef[i], &parts[i]);
  return combine(terms);
}

using KnotInvariant = std::function<IntegralEstimate(const LongCurve&, const MCParams&)>;

// Alternating sum over all 2^k resolutions, each weighted by the product of
// its signs; every resolution uses the same seed.
inline IntegralEstimate skein_alternating_sum(const SingularLongKnot& s, const KnotInvariant& f,
                                              double eps, const MCParams& p) {
  const std::size_t k = s.marks.size();
  if (k > 10) throw Error("too many double points for a skein sum");
  std::vector<IntegralEstimate> parts;
  std::vector<double> coef;
  for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
    std::vector<int> signs(k);
    int prod = 1;
    for (std::size_t i = 0; i < k; ++i) {
      signs[i] = (mask >> i) & 1 ? -1 : 1;
      prod *= signs[i];
    }
    MCParams q = p;
    if (q.truncation == 0) q.truncation = 4 * (s.curve.support_radius() + 1);
    parts.push_back(f(resolve_singular(s, signs, eps), q));
    coef.push_back(prod);
  }
  std::vector<std::pair<double, const IntegralEstimate*>> terms;
  for (std::size_t i = 0; i < parts.size(); ++i) terms.emplace_back(coef[i], &parts[i]);
  auto e = combine(terms);
  for (std::size_t i = 0; i < parts.size(); ++i)
    e.diagnostics.extra["resolution_" + std::to_string(i)] = parts[i].value;
  return e;
}

}  // namespace csi

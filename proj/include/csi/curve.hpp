#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "diagram.hpp"

namespace csi {

using Vec3 = Eigen::Vector3d;

struct CurvePoint {
  Vec3 x;
  Vec3 dx;
};

// Smooth map R -> R^3 equal to the reference line (t, offset, 0) for |t| > R.
class LongCurve {
 public:
  class Impl {
   public:
    virtual ~Impl() = default;
    // Only called for |t| <= support radius.
    virtual CurvePoint eval_inside(double t) const = 0;
  };

  LongCurve() : LongCurve(nullptr, 0.0, 0.0) {}
  LongCurve(std::shared_ptr<const Impl> impl, double radius, double offset)
      : impl_(std::move(impl)), radius_(radius), offset_(offset) {}

  CurvePoint eval(double t) const {
    if (!impl_ || std::abs(t) > radius_) return {Vec3(t, offset_, 0.0), Vec3(1.0, 0.0, 0.0)};
    return impl_->eval_inside(t);
  }
  Vec3 point(double t) const { return eval(t).x; }
  Vec3 derivative(double t) const { return eval(t).dx; }

  double support_radius() const { return radius_; }
  double offset() const { return offset_; }

 private:
  std::shared_ptr<const Impl> impl_;
  double radius_;
  double offset_;
};

struct LongLink2 {
  LongCurve first;   // offset 0
  LongCurve second;  // offset 1
};

// A long curve with marked parameter pairs s_i < t_i where K(s_i) = K(t_i).
struct SingularLongKnot {
  LongCurve curve;
  std::vector<std::pair<double, double>> marks;
};

using Geometry = std::variant<LongCurve, LongLink2, SingularLongKnot>;

namespace detail {

struct Hermite {
  // Cubic Hermite on u in [0,1]; returns value and d/du.
  static std::pair<Vec3, Vec3> eval(double u, const Vec3& p0, const Vec3& m0, const Vec3& p1,
                                    const Vec3& m1) {
    double u2 = u * u, u3 = u2 * u;
    Vec3 x = (2 * u3 - 3 * u2 + 1) * p0 + (u3 - 2 * u2 + u) * m0 + (-2 * u3 + 3 * u2) * p1 +
             (u3 - u2) * m1;
    Vec3 d = (6 * u2 - 6 * u) * p0 + (3 * u2 - 4 * u + 1) * m0 + (-6 * u2 + 6 * u) * p1 +
             (3 * u2 - 2 * u) * m1;
    return {x, d};
  }
};

class LineImpl final : public LongCurve::Impl {
 public:
  explicit LineImpl(double c) : c_(c) {}
  CurvePoint eval_inside(double t) const override { return {Vec3(t, c_, 0), Vec3(1, 0, 0)}; }

 private:
  double c_;
};

}  // namespace detail

inline LongCurve line(double offset = 0.0) { return LongCurve(nullptr, 0.0, offset); }

namespace detail {

class FunctionImpl final : public LongCurve::Impl {
 public:
  explicit FunctionImpl(std::function<CurvePoint(double)> f) : f_(std::move(f)) {}
  CurvePoint eval_inside(double t) const override { return f_(t); }

 private:
  std::function<CurvePoint(double)> f_;
};

}  // namespace detail

// Arbitrary parametrized curve, evaluated everywhere (no reference tails).
// Used for test geometries such as skew lines; not a long knot in general.
inline LongCurve curve_from_function(std::function<CurvePoint(double)> f) {
  return LongCurve(std::make_shared<detail::FunctionImpl>(std::move(f)),
                   std::numeric_limits<double>::infinity(), 0.0);
}

// ---------------------------------------------------------------------------
// Closed curves opened onto the reference line

enum class ClosedShape { trefoil, figure_eight, planar_trefoil };

inline CurvePoint closed_curve(ClosedShape shape, double th) {
  using std::cos;
  using std::sin;
  switch (shape) {
    case ClosedShape::trefoil:
    case ClosedShape::planar_trefoil: {
      double z = shape == ClosedShape::trefoil ? 1.0 : 0.0;
      return {Vec3(sin(th) + 2 * sin(2 * th), cos(th) - 2 * cos(2 * th), -z * sin(3 * th)),
              Vec3(cos(th) + 4 * cos(2 * th), -sin(th) + 4 * sin(2 * th), -3 * z * cos(3 * th))};
    }
    case ClosedShape::figure_eight: {
      double r = 2 + cos(2 * th), dr = -2 * sin(2 * th);
      return {Vec3(r * cos(3 * th), r * sin(3 * th), sin(4 * th)),
              Vec3(dr * cos(3 * th) - 3 * r * sin(3 * th), dr * sin(3 * th) + 3 * r * cos(3 * th),
                   4 * cos(4 * th))};
    }
  }
  return {};
}

// How a closed curve is cut open and grafted onto the line.  The curve is
// rotated about z, cut at its lowest point (a short arc of angular width
// 2*gap is removed), lifted so the cut sits at height `height` above the
// line, traversed over a parameter interval of length `arc`, and joined to
// the line by cubic Hermite connectors of parameter length `conn`.
struct GraftParams {
  double gap = 0.3;
  double height = 1.5;
  double arc = 6.0;
  double conn = 2.0;
  double rotation = 0.0;
};

namespace detail {

class GraftImpl final : public LongCurve::Impl {
 public:
  GraftImpl(ClosedShape shape, GraftParams gp) : shape_(shape), gp_(gp) {
    rot_ = Eigen::AngleAxisd(gp.rotation, Vec3::UnitZ()).toRotationMatrix();
    auto y_at = [&](double th) { return (rot_ * closed_curve(shape_, th).x).y(); };
    const int n = 20000;
    double best = 0, by = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      double th = 2 * std::numbers::pi * i / n;
      if (double y = y_at(th); y < by) by = y, best = th;
    }
    double lo = best - 2 * std::numbers::pi / n, hi = best + 2 * std::numbers::pi / n;
    for (int it = 0; it < 100; ++it) {  // golden section on the lowest point
      double a = hi - 0.618033988749895 * (hi - lo), b = lo + 0.618033988749895 * (hi - lo);
      if (y_at(a) < y_at(b))
        hi = b;
      else
        lo = a;
    }
    double thc = 0.5 * (lo + hi);
    Vec3 tip = rot_ * closed_curve(shape_, thc).x;
    shift_ = Vec3(-tip.x(), gp.height - tip.y(), -tip.z());
    Vec3 tan = rot_ * closed_curve(shape_, thc).dx;
    double dir = tan.x() > 0 ? -1.0 : 1.0;  // keeps the entry connector on the left
    th0_ = thc + dir * gp.gap;
    double th1 = thc + dir * (2 * std::numbers::pi - gp.gap);
    rate_ = (th1 - th0_) / gp.arc;
    radius_ = gp.arc / 2 + gp.conn;
    auto s = arc_point(-gp.arc / 2), e = arc_point(gp.arc / 2);
    p_start_ = s.x;
    m_start_ = s.dx * gp.conn;
    p_end_ = e.x;
    m_end_ = e.dx * gp.conn;
  }

  double radius() const { return radius_; }

  CurvePoint eval_inside(double t) const override {
    const double a = gp_.arc / 2;
    if (t < -a) {
      auto [x, d] = Hermite::eval((t + radius_) / gp_.conn, Vec3(-radius_, 0, 0),
                                  Vec3(gp_.conn, 0, 0), p_start_, m_start_);
      return {x, d / gp_.conn};
    }
    if (t > a) {
      auto [x, d] = Hermite::eval((t - a) / gp_.conn, p_end_, m_end_, Vec3(radius_, 0, 0),
                                  Vec3(gp_.conn, 0, 0));
      return {x, d / gp_.conn};
    }
    return arc_point(t);
  }

 private:
  CurvePoint arc_point(double t) const {
    auto c = closed_curve(shape_, th0_ + (t + gp_.arc / 2) * rate_);
    return {rot_ * c.x + shift_, rot_ * c.dx * rate_};
  }

  ClosedShape shape_;
  GraftParams gp_;
  Eigen::Matrix3d rot_;
  Vec3 shift_;
  double th0_ = 0, rate_ = 0, radius_ = 0;
  Vec3 p_start_, m_start_, p_end_, m_end_;
};

}  // namespace detail

inline LongCurve graft_closed(ClosedShape shape, const GraftParams& gp = {}) {
  auto impl = std::make_shared<detail::GraftImpl>(shape, gp);
  double r = impl->radius();
  return LongCurve(std::move(impl), r, 0.0);
}

// ---------------------------------------------------------------------------
// Hermite spline through control points

namespace detail {

class SplineImpl final : public LongCurve::Impl {
 public:
  SplineImpl(std::vector<double> knots, std::vector<Vec3> pts, std::vector<Vec3> tangents)
      : tau_(std::move(knots)), p_(std::move(pts)), m_(std::move(tangents)) {}

  CurvePoint eval_inside(double t) const override {
    if (t <= tau_.front() || t >= tau_.back()) {
      double c = p_.front().y();
      return {Vec3(t, c, 0), Vec3(1, 0, 0)};
    }
    std::size_t i = static_cast<std::size_t>(std::upper_bound(tau_.begin(), tau_.end(), t) - tau_.begin()) - 1;
    double h = tau_[i + 1] - tau_[i];
    auto [x, d] = Hermite::eval((t - tau_[i]) / h, p_[i], m_[i] * h, p_[i + 1], m_[i + 1] * h);
    return {x, d / h};
  }

 private:
  std::vector<double> tau_;
  std::vector<Vec3> p_, m_;
};

}  // namespace detail

// C1 Hermite spline through pts with unit directions dirs.  The first and
// last points must lie on the x-axis; knots follow chord length rescaled so
// the end knots equal the end points' x coordinates, and the end tangents are
// (1,0,0), matching the reference line.
inline LongCurve hermite_long_curve(const std::vector<Vec3>& pts, const std::vector<Vec3>& dirs) {
  const std::size_t n = pts.size();
  if (n < 2 || dirs.size() != n) throw Error("hermite_long_curve: need matching points and directions");
  const Vec3 &a = pts.front(), &b = pts.back();
  if (a.y() != 0 || a.z() != 0 || b.y() != 0 || b.z() != 0 || b.x() <= a.x())
    throw Error("hermite_long_curve: end points must lie on the x-axis in increasing order");
  std::vector<double> chord(n - 1);
  double total = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) total += chord[i] = (pts[i + 1] - pts[i]).norm();
  double scale = (b.x() - a.x()) / total;
  std::vector<double> tau(n);
  tau[0] = a.x();
  for (std::size_t i = 1; i < n; ++i) tau[i] = tau[i - 1] + chord[i - 1] * scale;
  tau[n - 1] = b.x();
  std::vector<Vec3> m(n);
  for (std::size_t i = 0; i < n; ++i) m[i] = dirs[i].normalized() / scale;
  m.front() = m.back() = Vec3(1, 0, 0);
  double r = std::max(std::abs(a.x()), std::abs(b.x()));
  return LongCurve(std::make_shared<detail::SplineImpl>(std::move(tau), pts, std::move(m)), r, 0.0);
}

// ---------------------------------------------------------------------------
// Windowed trigonometric perturbation of a line (the CurveSpec family)

namespace detail {

class WindowedSineImpl final : public LongCurve::Impl {
 public:
  WindowedSineImpl(double c, double a, double b, std::vector<std::array<double, 3>> coeffs)
      : c_(c), a_(a), b_(b), coeffs_(std::move(coeffs)) {}

  CurvePoint eval_inside(double t) const override {
    CurvePoint out{Vec3(t, c_, 0), Vec3(1, 0, 0)};
    if (t <= a_ || t >= b_ || coeffs_.empty()) return out;
    const double len = b_ - a_, u = (t - a_) / len;
    // w = 16 u^2 (1-u)^2 vanishes to second order at both ends
    const double w = 16 * u * u * (1 - u) * (1 - u);
    const double dw = 32 * u * (1 - u) * (1 - 2 * u) / len;
    Vec3 s = Vec3::Zero(), ds = Vec3::Zero();
    for (std::size_t m = 0; m < coeffs_.size(); ++m) {
      const double k = (static_cast<double>(m) + 1) * std::numbers::pi;
      const Vec3 c(coeffs_[m][0], coeffs_[m][1], coeffs_[m][2]);
      s += std::sin(k * u) * c;
      ds += (k / len) * std::cos(k * u) * c;
    }
    out.x += w * s;
    out.dx += dw * s + w * ds;
    return out;
  }

 private:
  double c_, a_, b_;
  std::vector<std::array<double, 3>> coeffs_;
};

}  // namespace detail

inline LongCurve perturbed_line(double offset, double a, double b,
                                std::vector<std::array<double, 3>> coeffs) {
  if (!(a < b)) throw Error("perturbed_line: window must satisfy a < b");
  double r = std::max(std::abs(a), std::abs(b));
  return LongCurve(std::make_shared<detail::WindowedSineImpl>(offset, a, b, std::move(coeffs)), r,
                   offset);
}

// ---------------------------------------------------------------------------
// Compact bumps added to a curve

struct Bump {
  double center = 0;
  double half_width = 1;
  Vec3 vector = Vec3::Zero();
};

// b(u) = (1 - u^2)^3 on |u| < 1, zero outside.
inline std::pair<double, double> bump_profile(double u) {
  if (std::abs(u) >= 1) return {0.0, 0.0};
  double v = 1 - u * u;
  return {v * v * v, -6 * u * v * v};
}

namespace detail {

class BumpedImpl final : public LongCurve::Impl {
 public:
  BumpedImpl(LongCurve base, std::vector<Bump> bumps) : base_(std::move(base)), bumps_(std::move(bumps)) {}
  CurvePoint eval_inside(double t) const override {
    CurvePoint c = base_.eval(t);
    for (auto& b : bumps_) {
      auto [v, dv] = bump_profile((t - b.center) / b.half_width);
      if (v == 0 && dv == 0) continue;
      c.x += v * b.vector;
      c.dx += (dv / b.half_width) * b.vector;
    }
    return c;
  }

 private:
  LongCurve base_;
  std::vector<Bump> bumps_;
};

class MapImpl final : public LongCurve::Impl {
 public:
  MapImpl(LongCurve base, std::function<CurvePoint(const LongCurve&, double)> f)
      : base_(std::move(base)), f_(std::move(f)) {}
  CurvePoint eval_inside(double t) const override { return f_(base_, t); }

 private:
  LongCurve base_;
  std::function<CurvePoint(const LongCurve&, double)> f_;
};

class ConcatImpl final : public LongCurve::Impl {
 public:
  ConcatImpl(LongCurve k1, LongCurve k2, double c1, double c2, double m)
      : k1_(std::move(k1)), k2_(std::move(k2)), c1_(c1), c2_(c2), m_(m) {}
  CurvePoint eval_inside(double t) const override {
    const LongCurve& k = t < m_ ? k1_ : k2_;
    const double c = t < m_ ? c1_ : c2_;
    CurvePoint p = k.eval(t - c);
    p.x.x() += c;
    return p;
  }

 private:
  LongCurve k1_, k2_;
  double c1_, c2_, m_;
};

}  // namespace detail

inline LongCurve with_bumps(const LongCurve& base, std::vector<Bump> bumps) {
  double r = base.support_radius();
  for (auto& b : bumps) r = std::max(r, std::abs(b.center) + b.half_width);
  return LongCurve(std::make_shared<detail::BumpedImpl>(base, std::move(bumps)), r, base.offset());
}

// Reflection through the plane z = 0.
inline LongCurve reflected_z(const LongCurve& k) {
  auto f = [](const LongCurve& b, double t) {
    CurvePoint c = b.eval(t);
    c.x.z() = -c.x.z();
    c.dx.z() = -c.dx.z();
    return c;
  };
  return LongCurve(std::make_shared<detail::MapImpl>(k, f), k.support_radius(), k.offset());
}

// t -> K(t - a) + a e_x; still a long curve, with support radius R + |a|.
inline LongCurve shifted(const LongCurve& k, double a) {
  auto f = [a](const LongCurve& b, double t) {
    CurvePoint c = b.eval(t - a);
    c.x.x() += a;
    return c;
  };
  return LongCurve(std::make_shared<detail::MapImpl>(k, f), k.support_radius() + std::abs(a),
                   k.offset());
}

namespace detail {

inline std::pair<double, double> x_extent(const LongCurve& k) {
  double r = k.support_radius(), lo = -r, hi = r;
  const int n = 4000;
  for (int i = 0; i <= n; ++i) {
    double x = k.point(-r + 2 * r * i / n).x();
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  return {lo, hi};
}

}  // namespace detail

// Stacking: k1 acts left of k2.  The gap keeps the bodies' x-extents at least
// 0.5 away from the switch point.
inline LongCurve concatenate(const LongCurve& k1, const LongCurve& k2) {
  if (k1.offset() != 0 || k2.offset() != 0) throw Error("concatenate: both curves must be long knots");
  const double r1 = k1.support_radius(), r2 = k2.support_radius();
  auto [lo1, hi1] = detail::x_extent(k1);
  auto [lo2, hi2] = detail::x_extent(k2);
  (void)lo1;
  (void)hi2;
  const double g = 2 * std::max({0.5, hi1 - r1 + 0.5, -lo2 - r2 + 0.5});
  const double c1 = -r2 - g / 2, c2 = r1 + g / 2, m = r1 - r2;
  return LongCurve(std::make_shared<detail::ConcatImpl>(k1, k2, c1, c2, m), r1 + r2 + g / 2, 0.0);
}

// ---------------------------------------------------------------------------
// Hopf link strand: (t, cos phi, s sin phi) with phi running 0 -> 2 pi

namespace detail {

class HopfImpl final : public LongCurve::Impl {
 public:
  HopfImpl(double r, double s) : r_(r), s_(s) {}
  CurvePoint eval_inside(double t) const override {
    double u = (t + r_) / (2 * r_);
    double S = u * u * u * (10 + u * (-15 + 6 * u));
    double dS = 30 * u * u * (1 - u) * (1 - u) / (2 * r_);
    double phi = 2 * std::numbers::pi * S, dphi = 2 * std::numbers::pi * dS;
    return {Vec3(t, std::cos(phi), s_ * std::sin(phi)),
            Vec3(1, -std::sin(phi) * dphi, s_ * std::cos(phi) * dphi)};
  }

 private:
  double r_, s_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Planar projection crossings and double points

struct ProjectionCrossing {
  double s = 0, t = 0;  // s < t
  bool s_over = false;  // the s-strand has larger z
  int sign = 0;         // right-hand rule sign of the crossing
};

// Crossings of the xy-projection of K restricted to [lo, hi], found on a
// polyline with n segments and refined by Newton iteration.
inline std::vector<ProjectionCrossing> projection_crossings(const LongCurve& k, double lo, double hi,
                                                            int n = 4000) {
  std::vector<Vec3> p(static_cast<std::size_t>(n) + 1);
  std::vector<double> t(p.size());
  for (int i = 0; i <= n; ++i) {
    t[i] = lo + (hi - lo) * i / n;
    p[i] = k.point(t[i]);
  }
  std::vector<ProjectionCrossing> out;
  for (int i = 0; i < n; ++i) {
    Eigen::Vector2d a = p[i].head<2>(), r = (p[i + 1] - p[i]).head<2>();
    for (int j = i + 2; j < n; ++j) {
      Eigen::Vector2d c = p[j].head<2>(), s = (p[j + 1] - p[j]).head<2>();
      double den = r.x() * s.y() - r.y() * s.x();
      if (std::abs(den) < 1e-15) continue;
      Eigen::Vector2d q = c - a;
      double u = (q.x() * s.y() - q.y() * s.x()) / den;
      double v = (q.x() * r.y() - q.y() * r.x()) / den;
      if (u < 0 || u >= 1 || v < 0 || v >= 1) continue;
      double ts = t[i] + u * (t[i + 1] - t[i]), tt = t[j] + v * (t[j + 1] - t[j]);
      for (int it = 0; it < 50; ++it) {
        auto A = k.eval(ts), B = k.eval(tt);
        Eigen::Vector2d f = (A.x - B.x).head<2>();
        Eigen::Matrix2d J;
        J.col(0) = A.dx.head<2>();
        J.col(1) = -B.dx.head<2>();
        Eigen::Vector2d step = J.partialPivLu().solve(f);
        ts -= step.x();
        tt -= step.y();
        if (step.norm() < 1e-15) break;
      }
      auto A = k.eval(ts), B = k.eval(tt);
      ProjectionCrossing c2;
      c2.s = ts;
      c2.t = tt;
      c2.s_over = A.x.z() > B.x.z();
      const Vec3& over = c2.s_over ? A.dx : B.dx;
      const Vec3& under = c2.s_over ? B.dx : A.dx;
      c2.sign = over.x() * under.y() - over.y() * under.x() > 0 ? 1 : -1;
      out.push_back(c2);
    }
  }
  std::sort(out.begin(), out.end(), [](auto& x, auto& y) { return x.s < y.s; });
  return out;
}

// ---------------------------------------------------------------------------
// Separation checks

namespace detail {

struct RefinedMin {
  double s, t, d;
};

template <class Dist>
RefinedMin refine_min(Dist&& dist, double s, double t, double h) {
  double best = dist(s, t);
  for (int level = 0; level < 40 && h > 1e-13; ++level) {
    bool moved = false;
    for (int a = -1; a <= 1; ++a)
      for (int b = -1; b <= 1; ++b) {
        if (!a && !b) continue;
        double v = dist(s + a * h, t + b * h);
        if (v < best) {
          best = v;
          s += a * h;
          t += b * h;
          moved = true;
        }
      }
    if (!moved) h *= 0.5;
  }
  return {s, t, best};
}

}  // namespace detail

struct CloseApproach {
  double s, t;      // s < t
  double distance;  // |K(s) - K(t)|
};

// Interior local minima of |K(s) - K(t)| with s, t at least `collar` apart
// in arclength, refined, keeping those closer than `threshold`.
inline std::vector<CloseApproach> close_approaches(const LongCurve& k, double threshold,
                                                   double collar = 0.5, int n = 1200) {
  // the body may reach back over a tail, so scan the whole x-extent
  auto [lo, hi] = detail::x_extent(k);
  const double r = std::max({k.support_radius(), -lo, hi}) + 1.0;
  std::vector<double> t(static_cast<std::size_t>(n) + 1), arc(t.size(), 0.0);
  std::vector<Vec3> p(t.size());
  for (int i = 0; i <= n; ++i) {
    t[i] = -r + 2 * r * i / n;
    p[i] = k.point(t[i]);
    if (i) arc[i] = arc[i - 1] + (p[i] - p[i - 1]).norm();
  }
  auto off = [&](int i, int j) { return i >= 0 && j <= n && j > i && arc[j] - arc[i] >= collar; };
  auto dist = [&](double s, double u) { return (k.point(s) - k.point(u)).norm(); };
  std::vector<CloseApproach> out;
  const double h = t[1] - t[0];
  for (int i = 0; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) {
      if (!off(i, j)) continue;
      double d = (p[i] - p[j]).norm();
      if (d >= threshold) continue;
      bool local = true;
      for (auto [a, b] : {std::pair{-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
        int ii = i + a, jj = j + b;
        if (!off(ii, jj) || (p[ii] - p[jj]).norm() < d) {
          local = false;
          break;
        }
      }
      if (!local) continue;
      auto m = detail::refine_min(dist, t[i], t[j], h);
      if (m.d < threshold) out.push_back({m.s, m.t, m.d});
    }
  return out;
}

// Off-diagonal self distance of a knot outside an arclength collar: the
// smallest interior local minimum of |K(s) - K(t)|, refined.  Returns the
// collar when no interior minimum exists.
inline double min_separation(const LongCurve& k, double collar = 0.5, int n = 1200) {
  double best = collar;
  for (auto& c : close_approaches(k, collar, collar, n)) best = std::min(best, c.distance);
  return best;
}

inline double min_separation(const LongLink2& l, int n = 800) {
  const double r = std::max(l.first.support_radius(), l.second.support_radius()) + 1.0;
  std::vector<Vec3> a(static_cast<std::size_t>(n) + 1), b(a.size());
  std::vector<double> t(a.size());
  for (int i = 0; i <= n; ++i) {
    t[i] = -r + 2 * r * i / n;
    a[i] = l.first.point(t[i]);
    b[i] = l.second.point(t[i]);
  }
  double best = std::abs(l.first.offset() - l.second.offset());
  int bi = -1, bj = -1;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j)
      if (double d = (a[i] - b[j]).norm(); d < best) best = d, bi = i, bj = j;
  if (bi >= 0) {
    auto dist = [&](double s, double u) { return (l.first.point(s) - l.second.point(u)).norm(); };
    best = std::min(best, detail::refine_min(dist, t[bi], t[bj], t[1] - t[0]).d);
  }
  return best;
}

inline double min_separation(const SingularLongKnot& s) {
  double best = std::numeric_limits<double>::infinity();
  for (auto [a, b] : s.marks) best = std::min(best, (s.curve.point(a) - s.curve.point(b)).norm());
  return std::min(best, min_separation(s.curve));
}

inline std::vector<std::string> validate(const SingularLongKnot& s) {
  std::vector<std::string> out;
  for (auto [a, b] : s.marks) {
    auto A = s.curve.eval(a), B = s.curve.eval(b);
    if (!(a < b)) out.push_back("marked pair not ordered s < t");
    if ((A.x - B.x).norm() > 1e-12) out.push_back("marked pair is not a double point");
    if (A.dx.cross(B.dx).norm() <= 1e-9) out.push_back("marked pair has dependent tangents");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Resolutions of singular knots

// Default push-off length used by resolve_singular.
inline constexpr double kDefaultResolutionEps = 0.2;

// Over/under calibration: the t-strand of marked pair i moves by
// kResolutionOrientation * sign_i * eps * normalize(K'(s_i) x K'(t_i)).
inline constexpr double kResolutionOrientation = -1.0;

inline double resolution_window(const SingularLongKnot& s, std::size_t i) {
  double gap = std::numeric_limits<double>::infinity();
  const double ti = s.marks[i].second;
  for (std::size_t j = 0; j < s.marks.size(); ++j) {
    gap = std::min(gap, std::abs(ti - s.marks[j].first));
    if (j != i) gap = std::min(gap, std::abs(ti - s.marks[j].second));
  }
  return 0.45 * gap;
}

inline LongCurve resolve_singular(const SingularLongKnot& s, const std::vector<int>& signs,
                                  double eps = kDefaultResolutionEps) {
  if (signs.size() != s.marks.size())
    throw Error("resolve_singular: need one sign per marked double point");
  std::vector<Bump> bumps;
  for (std::size_t i = 0; i < s.marks.size(); ++i) {
    if (signs[i] != 1 && signs[i] != -1) throw Error("resolve_singular: signs must be +1 or -1");
    auto [a, b] = s.marks[i];
    Vec3 nrm = s.curve.derivative(a).cross(s.curve.derivative(b)).normalized();
    double w = resolution_window(s, i);
    if (!(eps < 0.5 * w))
      throw Error("resolve_singular: eps " + std::to_string(eps) +
                  " too large for bump window half-width " + std::to_string(w));
    bumps.push_back({b, w, kResolutionOrientation * signs[i] * eps * nrm});
  }
  for (std::size_t i = 0; i < bumps.size(); ++i)
    for (std::size_t j = i + 1; j < bumps.size(); ++j)
      if (std::abs(bumps[i].center - bumps[j].center) < bumps[i].half_width + bumps[j].half_width)
        throw Error("resolve_singular: bump windows overlap");
  LongCurve out = with_bumps(s.curve, std::move(bumps));
  if (!(min_separation(out) > 0.25 * eps))
    throw Error("resolve_singular: resolution is not embedded at eps " + std::to_string(eps));
  return out;
}

// ---------------------------------------------------------------------------
// Builtins

inline const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{
      "line",          "long_unknot_planar",  "long_trefoil",       "long_figure_eight",
      "long_hopf",     "parallel_lines",      "singular_x2_crossed", "singular_x2_nested",
      "singular_x3"};
  return names;
}

inline LongCurve long_trefoil(const GraftParams& gp = {}) { return graft_closed(ClosedShape::trefoil, gp); }

// Second parametrization of the same knot type, used for isotopy checks.
inline LongCurve long_trefoil_alternate() {
  return graft_closed(ClosedShape::trefoil, {0.45, 2.0, 8.0, 3.0, 0.7});
}

inline LongLink2 long_hopf(double winding = 1.0) {
  const double r = 3.0;
  return {line(0.0), LongCurve(std::make_shared<detail::HopfImpl>(r, winding), r, 1.0)};
}

inline SingularLongKnot singular_from_crossings(const LongCurve& k, const std::vector<ProjectionCrossing>& cs) {
  SingularLongKnot s{k, {}};
  for (auto& c : cs) s.marks.emplace_back(c.s, c.t);
  return s;
}

inline SingularLongKnot singular_x3() {
  // a long arc spreads the double points so eps-windows fit
  auto k = graft_closed(ClosedShape::planar_trefoil, {0.3, 1.5, 12.0, 3.0, 0.0});
  double r = k.support_radius();
  return singular_from_crossings(k, projection_crossings(k, -r, r));
}

// The planar trefoil with its last double point lifted apart: the remaining
// two double points interlace.
inline SingularLongKnot singular_x2_crossed() {
  auto base = singular_x3();
  auto [s3, t3] = base.marks.back();
  double gap = std::numeric_limits<double>::infinity();
  for (auto [a, b] : base.marks) {
    for (double x : {a, b})
      if (x != t3) gap = std::min(gap, std::abs(x - t3));
  }
  (void)s3;
  auto k = with_bumps(base.curve, {{t3, 0.45 * gap, Vec3(0, 0, 0.6)}});
  base.marks.pop_back();
  return {k, base.marks};
}

// Planar curve with two nested double points (Gauss word 1 2 2 1).
inline SingularLongKnot singular_x2_nested() {
  std::vector<Vec3> pts{{-4, 0, 0},   {0, 0, 0},  {1.5, 1.5, 0},  {0, 3, 0},
                        {-0.5, 3.6, 0}, {0, 4, 0}, {0.5, 3.6, 0},  {0, 3, 0},
                        {-1.5, 1.5, 0}, {0, 0, 0}, {1.5, -0.8, 0}, {4, 0, 0}};
  std::vector<Vec3> dirs{{1, 0, 0},  {1, 1, 0},   {0, 1, 0},   {-1, 1, 0},
                         {0.3, 1, 0}, {1, 0, 0},  {-0.3, -1, 0}, {-1, -1, 0},
                         {0, -1, 0}, {1, -1, 0},  {1, 0, 0},   {1, 0, 0}};
  auto k = hermite_long_curve(pts, dirs);
  double r = k.support_radius();
  return singular_from_crossings(k, projection_crossings(k, -r, r));
}

inline Geometry builtin(const std::string& name) {
  if (name == "line") return line(0.0);
  if (name == "long_unknot_planar") return perturbed_line(0.0, -3.0, 3.0, {{0, 2.0, 0}, {0, 0.7, 0}});
  if (name == "long_trefoil") return long_trefoil();
  if (name == "long_figure_eight") return graft_closed(ClosedShape::figure_eight);
  if (name == "long_hopf") return long_hopf();
  if (name == "parallel_lines") return LongLink2{line(0.0), line(1.0)};
  if (name == "singular_x2_crossed") return singular_x2_crossed();
  if (name == "singular_x2_nested") return singular_x2_nested();
  if (name == "singular_x3") return singular_x3();
  std::string valid;
  for (auto& n : builtin_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw Error("unknown builtin curve '" + name + "'; valid names: " + valid);
}

}  // namespace csi

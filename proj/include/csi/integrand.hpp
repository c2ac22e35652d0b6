#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <vector>

#include "curve.hpp"
#include "diagram.hpp"

namespace csi {

// Unit vector from a to b.
inline Vec3 gauss_map(const Vec3& a, const Vec3& b) {
  Vec3 r = b - a;
  double n = r.norm();
  if (!(n > 0)) throw Error("gauss_map: coincident points");
  return r / n;
}

// Oriented orthonormal basis of the tangent plane at u: (e1, e2, u) is
// right-handed.  e1 = normalize(a x u) for the coordinate axis a least
// aligned with u.
struct SphereFrame {
  Vec3 e1, e2;

  static SphereFrame at(const Vec3& u) {
    Vec3 a = Vec3::Zero();
    Eigen::Index i;
    u.cwiseAbs().minCoeff(&i);
    a[i] = 1.0;
    Vec3 e1 = a.cross(u).normalized();
    return {e1, u.cross(e1)};
  }

  SphereFrame rotated(double angle) const {
    double c = std::cos(angle), s = std::sin(angle);
    return {c * e1 + s * e2, -s * e1 + c * e2};
  }
};

// A point of the fiber over a knot or link: times in segment order, the
// strand of each segment vertex (empty: all on one strand), and free
// positions in free-vertex order.
struct FiberPoint {
  std::vector<double> times;
  std::vector<int> strands;
  std::vector<Vec3> free;
};

// Sign fixing the fiber orientation of an order-k diagram, (-1)^(k(k-1)/2).
inline int orientation_sign(int k) { return (k * (k - 1) / 2) % 2 ? -1 : 1; }

// Precompiled pullback integrand of a degree-zero diagram.  Columns run over
// vertex blocks in label order (one column per segment vertex, three per free
// vertex); each edge contributes the row pair of its Gauss map differential
// in the SphereFrame at its value.
class DiagramIntegrand {
 public:
  static constexpr int kMaxDim = 24;
  using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

  explicit DiagramIntegrand(const Diagram& d) : d_(d) {
    require_valid(d);
    if (degree(d) != 0)
      throw Error("integrand requires degree 0: form degree 2*edges - 3*q - p = " +
                  std::to_string(degree(d)) + " must vanish for a top-dimensional fiber form");
    if (!d.loops.empty()) throw Error("integrand: degree-zero diagrams carry no loops");
    dim_ = d.p + 3 * d.q;
    if (dim_ > kMaxDim) throw Error("integrand: diagram too large");
    std::vector<int> label(static_cast<std::size_t>(d.vertex_count()));
    for (int v = 1; v <= d.vertex_count(); ++v)
      label[v - 1] = d.vertex_labels.empty() ? v : d.vertex_labels[v - 1];
    // column of the first coordinate of each vertex block, blocks in label order
    std::vector<int> by_label(label.size());
    for (std::size_t v = 0; v < label.size(); ++v) by_label[label[v] - 1] = static_cast<int>(v) + 1;
    col_.assign(label.size() + 1, 0);
    int c = 0;
    for (int v : by_label) {
      col_[v] = c;
      c += d.is_segment(v) ? 1 : 3;
    }
    for (auto e : d.chords) pairs_.push_back(e);
    for (auto e : d.edges) pairs_.push_back(e);
    scale_ = orientation_sign(order(d)) / std::pow(4 * std::numbers::pi, d.edge_count());
  }

  int dimension() const { return dim_; }
  const Diagram& diagram() const { return d_; }

  // seg[i]: point and derivative of segment vertex i+1; free[j]: position of
  // free vertex p+1+j.  rotations (optional) rotate each edge's frame.
  double evaluate(const CurvePoint* seg, const Vec3* free, const double* rotations = nullptr) const {
    Mat J = Mat::Zero(dim_, dim_);
    const int p = d_.p;
    for (std::size_t e = 0; e < pairs_.size(); ++e) {
      auto [a, b] = pairs_[e];
      const Vec3& xa = a <= p ? seg[a - 1].x : free[a - p - 1];
      const Vec3& xb = b <= p ? seg[b - 1].x : free[b - p - 1];
      Vec3 r = xb - xa;
      double n = r.norm();
      if (!(n > 0)) return std::numeric_limits<double>::quiet_NaN();
      SphereFrame f = SphereFrame::at(r / n);
      if (rotations) f = f.rotated(rotations[e]);
      const int row = 2 * static_cast<int>(e);
      for (int k = 0; k < 2; ++k) {
        const Vec3& ek = k ? f.e2 : f.e1;
        if (b <= p)
          J(row + k, col_[b]) += ek.dot(seg[b - 1].dx) / n;
        else
          for (int j = 0; j < 3; ++j) J(row + k, col_[b] + j) += ek[j] / n;
        if (a <= p)
          J(row + k, col_[a]) -= ek.dot(seg[a - 1].dx) / n;
        else
          for (int j = 0; j < 3; ++j) J(row + k, col_[a] + j) -= ek[j] / n;
      }
    }
    return scale_ * J.partialPivLu().determinant();
  }

 private:
  Diagram d_;
  int dim_ = 0;
  std::vector<int> col_;
  std::vector<VertexPair> pairs_;
  double scale_ = 1;
};

namespace detail {

inline std::vector<CurvePoint> segment_points(const Diagram& d, const FiberPoint& x,
                                              const LongCurve* strands, int nstrands) {
  if (static_cast<int>(x.times.size()) != d.p || static_cast<int>(x.free.size()) != d.q)
    throw Error("pullback_integrand: fiber point does not match the diagram");
  std::vector<CurvePoint> seg;
  for (int i = 0; i < d.p; ++i) {
    int s = x.strands.empty() ? 0 : x.strands[i];
    if (s < 0 || s >= nstrands) throw Error("pullback_integrand: bad strand index");
    seg.push_back(strands[s].eval(x.times[i]));
  }
  for (int i = 0; i < d.p; ++i)
    for (int j = i + 1; j < d.p; ++j) {
      bool same = x.strands.empty() || x.strands[i] == x.strands[j];
      if (same && !(x.times[i] < x.times[j])) throw Error("pullback_integrand: times must increase along a strand");
    }
  return seg;
}

}  // namespace detail

inline double pullback_integrand(const Diagram& d, const LongCurve& k, const FiberPoint& x) {
  DiagramIntegrand f(d);
  auto seg = detail::segment_points(d, x, &k, 1);
  double v = f.evaluate(seg.data(), x.free.data());
  if (std::isnan(v)) throw Error("pullback_integrand: coincident mapped points");
  return v;
}

inline double pullback_integrand(const Diagram& d, const LongLink2& l, const FiberPoint& x) {
  DiagramIntegrand f(d);
  const LongCurve strands[2] = {l.first, l.second};
  FiberPoint y = x;
  if (y.strands.empty())
    for (int i = 0; i < d.p; ++i) y.strands.push_back(i < d.p / 2 ? 0 : 1);
  auto seg = detail::segment_points(d, y, strands, 2);
  double v = f.evaluate(seg.data(), y.free.data());
  if (std::isnan(v)) throw Error("pullback_integrand: coincident mapped points");
  return v;
}

}  // namespace csi

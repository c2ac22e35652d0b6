#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cstddef>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "diagram.hpp"

namespace csi {

using Rational = mpq_class;
using Integer = mpz_class;

inline Rational parse_rational(const std::string& s) {
  Rational r;
  if (r.set_str(s, 10) != 0) throw Error("not a rational number: '" + s + "'");
  r.canonicalize();
  return r;
}

// Dense exact matrix, row-major.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Rational& operator()(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }
  const Rational& operator()(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }

  bool is_zero() const {
    return std::all_of(a_.begin(), a_.end(), [](const Rational& x) { return sgn(x) == 0; });
  }

  Matrix operator*(const Matrix& b) const {
    if (cols_ != b.rows_) throw Error("matrix product: dimension mismatch");
    Matrix out(rows_, b.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = 0; k < cols_; ++k) {
        const Rational& x = (*this)(i, k);
        if (sgn(x) == 0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j)
          if (sgn(b(k, j)) != 0) out(i, j) += x * b(k, j);
      }
    return out;
  }

  Matrix permuted(const std::vector<std::size_t>& row_order,
                  const std::vector<std::size_t>& col_order) const {
    Matrix out(row_order.size(), col_order.size());
    for (std::size_t i = 0; i < row_order.size(); ++i)
      for (std::size_t j = 0; j < col_order.size(); ++j)
        out(i, j) = (*this)(row_order[i], col_order[j]);
    return out;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<Rational> a_;
};

// Sparse column-major matrix; used for coboundary slices.
struct SparseMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<std::vector<std::pair<std::size_t, Rational>>> columns;

  Matrix dense() const {
    Matrix m(rows, cols);
    for (std::size_t j = 0; j < columns.size(); ++j)
      for (auto& [i, v] : columns[j]) m(i, j) = v;
    return m;
  }

  std::size_t nonzeros() const {
    std::size_t n = 0;
    for (auto& c : columns) n += c.size();
    return n;
  }
};

// Triplet dump: a header line "rows cols nnz", then one "row col value"
// line per nonzero (0-based indices, values as reduced fractions).
inline std::string triplet_text(const SparseMatrix& m) {
  std::ostringstream os;
  os << m.rows << ' ' << m.cols << ' ' << m.nonzeros() << '\n';
  for (std::size_t j = 0; j < m.columns.size(); ++j)
    for (auto& [i, v] : m.columns[j]) os << i << ' ' << j << ' ' << v.get_str() << '\n';
  return os.str();
}

inline std::string triplet_text(const Matrix& m) {
  SparseMatrix s{m.rows(), m.cols(), {}};
  s.columns.resize(m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = 0; i < m.rows(); ++i)
      if (sgn(m(i, j)) != 0) s.columns[j].emplace_back(i, m(i, j));
  return triplet_text(s);
}

// Fraction-free Bareiss elimination.  Rows are first scaled to integers.
// Pivot policy: columns left to right; the pivot is the first remaining row
// (in input order after earlier swaps) with a nonzero entry in that column.
inline std::size_t bareiss_rank(const Matrix& m) {
  const std::size_t R = m.rows(), C = m.cols();
  std::vector<std::vector<Integer>> a(R, std::vector<Integer>(C));
  for (std::size_t i = 0; i < R; ++i) {
    Integer l = 1;
    for (std::size_t j = 0; j < C; ++j)
      if (sgn(m(i, j)) != 0) l = lcm(l, m(i, j).get_den());
    for (std::size_t j = 0; j < C; ++j)
      if (sgn(m(i, j)) != 0) a[i][j] = m(i, j).get_num() * (l / m(i, j).get_den());
  }
  Integer prev = 1;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < C && rank < R; ++c) {
    std::size_t piv = rank;
    while (piv < R && sgn(a[piv][c]) == 0) ++piv;
    if (piv == R) continue;
    std::swap(a[piv], a[rank]);
    const Integer& p = a[rank][c];
    for (std::size_t i = rank + 1; i < R; ++i) {
      const Integer f = a[i][c];
      for (std::size_t j = c + 1; j < C; ++j) {
        if (sgn(f) == 0 && sgn(a[i][j]) == 0) continue;
        Integer v = p * a[i][j] - f * a[rank][j];
        mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), prev.get_mpz_t());
        a[i][j] = std::move(v);
      }
      a[i][c] = 0;
    }
    prev = p;
    ++rank;
  }
  return rank;
}

struct ReducedRowEchelon {
  Matrix matrix;
  std::vector<std::size_t> pivot_columns;
};

// Gauss-Jordan over the rationals, same pivot policy as bareiss_rank.
inline ReducedRowEchelon rref(Matrix m) {
  const std::size_t R = m.rows(), C = m.cols();
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < C && r < R; ++c) {
    std::size_t piv = r;
    while (piv < R && sgn(m(piv, c)) == 0) ++piv;
    if (piv == R) continue;
    if (piv != r)
      for (std::size_t j = 0; j < C; ++j) std::swap(m(piv, j), m(r, j));
    Rational inv = 1 / m(r, c);
    for (std::size_t j = c; j < C; ++j) m(r, j) *= inv;
    for (std::size_t i = 0; i < R; ++i) {
      if (i == r || sgn(m(i, c)) == 0) continue;
      Rational f = m(i, c);
      for (std::size_t j = c; j < C; ++j)
        if (sgn(m(r, j)) != 0) m(i, j) -= f * m(r, j);
    }
    pivots.push_back(c);
    ++r;
  }
  return {std::move(m), std::move(pivots)};
}

// Scales v to a primitive integer vector whose first nonzero entry is positive.
inline std::vector<Rational> primitive(std::vector<Rational> v) {
  Integer l = 1, g = 0;
  for (auto& x : v)
    if (sgn(x) != 0) l = lcm(l, x.get_den());
  for (auto& x : v) {
    x *= l;
    x.canonicalize();
    if (sgn(x) != 0) g = gcd(g, x.get_num());
  }
  if (g == 0) return v;
  int s = 0;
  for (auto& x : v)
    if (sgn(x) != 0) {
      s = sgn(x);
      break;
    }
  for (auto& x : v) x = x / g * s;
  return v;
}

// Basis of {x : m x = 0}, one vector per non-pivot column, made primitive.
inline std::vector<std::vector<Rational>> nullspace(const Matrix& m) {
  auto red = rref(m);
  std::vector<char> is_pivot(m.cols(), 0);
  for (auto c : red.pivot_columns) is_pivot[c] = 1;
  std::vector<std::vector<Rational>> basis;
  for (std::size_t f = 0; f < m.cols(); ++f) {
    if (is_pivot[f]) continue;
    std::vector<Rational> v(m.cols());
    v[f] = 1;
    for (std::size_t r = 0; r < red.pivot_columns.size(); ++r) v[red.pivot_columns[r]] = -red.matrix(r, f);
    basis.push_back(primitive(std::move(v)));
  }
  return basis;
}

}  // namespace csi

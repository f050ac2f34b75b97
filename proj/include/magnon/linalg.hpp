#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace magnon {

using cdouble = std::complex<double>;

// ---------------------------------------------------------------- vectors

inline double norm2(const std::vector<cdouble>& x) {
  double s = 0;
  for (const auto& v : x) s += std::norm(v);
  return std::sqrt(s);
}

// conjugate-linear in the first argument
inline cdouble dot(const std::vector<cdouble>& x, const std::vector<cdouble>& y) {
  cdouble s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::conj(x[i]) * y[i];
  return s;
}

// ---------------------------------------------------------- dense matrices

// Dense complex matrix, row-major.
class CMatrix {
 public:
  CMatrix() = default;
  explicit CMatrix(std::size_t n) : n_(n), a_(n * n) {}

  static CMatrix identity(std::size_t n) {
    CMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t dim() const { return n_; }
  cdouble& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  const cdouble& operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  cdouble* row(std::size_t i) { return a_.data() + i * n_; }
  const cdouble* row(std::size_t i) const { return a_.data() + i * n_; }
  const std::vector<cdouble>& data() const { return a_; }

  friend bool operator==(const CMatrix& x, const CMatrix& y) {
    return x.n_ == y.n_ && x.a_ == y.a_;
  }

  // max |a_ij - conj(a_ji)|
  double hermiticity_defect() const {
    double worst = 0;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i; j < n_; ++j)
        worst = std::max(worst, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
    return worst;
  }

  double frobenius_norm() const {
    double s = 0;
    for (const auto& v : a_) s += std::norm(v);
    return std::sqrt(s);
  }

  std::vector<cdouble> apply(const std::vector<cdouble>& x) const {
    if (x.size() != n_) throw std::invalid_argument("CMatrix::apply: size mismatch");
    std::vector<cdouble> y(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      cdouble s = 0;
      const cdouble* r = row(i);
      for (std::size_t j = 0; j < n_; ++j) s += r[j] * x[j];
      y[i] = s;
    }
    return y;
  }

 private:
  std::size_t n_ = 0;
  std::vector<cdouble> a_;
};

// --------------------------------------------------- 2x2 blocks and pairs

struct Vec2 {
  cdouble x{}, y{};
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double norm2(const Vec2& v) { return std::sqrt(std::norm(v.x) + std::norm(v.y)); }
inline cdouble dot(const Vec2& a, const Vec2& b) {
  return std::conj(a.x) * b.x + std::conj(a.y) * b.y;
}

// 2x2 complex matrix [[a, b], [c, d]]
struct Mat2 {
  cdouble a{}, b{}, c{}, d{};

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static Mat2 zero() { return {}; }

  friend bool operator==(const Mat2&, const Mat2&) = default;

  Mat2 adjoint() const {
    return {std::conj(a), std::conj(c), std::conj(b), std::conj(d)};
  }
  cdouble det() const { return a * d - b * c; }
  cdouble trace() const { return a + d; }
  double frobenius_norm() const {
    return std::sqrt(std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d));
  }
  double hermiticity_defect() const {
    double e = std::abs(b - std::conj(c));
    e = std::max(e, std::abs(a.imag()));
    return std::max(e, std::abs(d.imag()));
  }

  Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  Vec2 operator*(const Vec2& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
  Mat2 operator+(const Mat2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
  Mat2 operator-(const Mat2& o) const { return {a - o.a, b - o.b, c - o.c, d - o.d}; }
  Mat2 scaled(double s) const { return {s * a, s * b, s * c, s * d}; }
};

inline double commutator_norm(const Mat2& k, const Mat2& m) {
  return (k * m - m * k).frobenius_norm();
}

}  // namespace magnon

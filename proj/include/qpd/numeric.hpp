#pragma once

// Scalar helpers shared by the double and __float128 code paths.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include <quadmath.h>

namespace qpd {

using quad = __float128;

namespace num {

inline double sqrt(double x) { return std::sqrt(x); }
inline double sin(double x) { return std::sin(x); }
inline double cos(double x) { return std::cos(x); }
inline double exp(double x) { return std::exp(x); }
inline double log(double x) { return std::log(x); }
inline double asinh(double x) { return std::asinh(x); }
inline double erf(double x) { return std::erf(x); }
inline double abs(double x) { return std::fabs(x); }
inline double hypot(double x, double y) { return std::hypot(x, y); }

inline quad sqrt(quad x) { return ::sqrtq(x); }
inline quad sin(quad x) { return ::sinq(x); }
inline quad cos(quad x) { return ::cosq(x); }
inline quad exp(quad x) { return ::expq(x); }
inline quad log(quad x) { return ::logq(x); }
inline quad asinh(quad x) { return ::asinhq(x); }
inline quad erf(quad x) { return ::erfq(x); }
inline quad abs(quad x) { return ::fabsq(x); }
inline quad hypot(quad x, quad y) { return ::hypotq(x, y); }

template <class Real>
inline Real pi() {
  if constexpr (std::is_same_v<Real, quad>) {
    return M_PIq;
  } else {
    return std::numbers::pi_v<Real>;
  }
}

template <class Real>
inline Real epsilon() {
  if constexpr (std::is_same_v<Real, quad>) {
    return FLT128_EPSILON;
  } else {
    return std::numeric_limits<Real>::epsilon();
  }
}

}  // namespace num

// Minimal complex type; std::complex is unspecified for __float128.
template <class Real>
struct Cx {
  Real re{0};
  Real im{0};

  Cx() = default;
  Cx(Real r, Real i = Real(0)) : re(r), im(i) {}

  Cx& operator+=(const Cx& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  Cx& operator-=(const Cx& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  friend Cx operator+(Cx a, const Cx& b) { return a += b; }
  friend Cx operator-(Cx a, const Cx& b) { return a -= b; }
  friend Cx operator*(const Cx& a, const Cx& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend Cx operator*(Real s, const Cx& a) { return {s * a.re, s * a.im}; }
  friend Cx operator*(const Cx& a, Real s) { return {s * a.re, s * a.im}; }

  Real norm() const { return re * re + im * im; }
  Real abs() const { return num::hypot(re, im); }
  Cx conj() const { return {re, -im}; }

  std::complex<double> to_std() const {
    return {static_cast<double>(re), static_cast<double>(im)};
  }
};

template <class Real>
inline Cx<Real> expi(Real theta) {
  return {num::cos(theta), num::sin(theta)};
}

// Neumaier compensated sum.
template <class T>
class CompensatedSum {
 public:
  void add(T x) {
    T t = sum_ + x;
    if (num::abs(sum_) >= num::abs(x)) {
      c_ += (sum_ - t) + x;
    } else {
      c_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  T value() const { return sum_ + c_; }

 private:
  T sum_{0};
  T c_{0};
};

}  // namespace qpd

#pragma once

// Gauss-Legendre rules on [-1,1], cached per (Real, n).

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "qpd/numeric.hpp"

namespace qpd {

template <class Real>
struct GaussRule {
  int n = 0;
  std::vector<Real> x;
  std::vector<Real> w;
  // Legendre values P_j(x_i), row j, column i.
  std::vector<Real> P;
};

template <class Real>
GaussRule<Real> build_gauss_legendre(int n) {
  GaussRule<Real> r;
  r.n = n;
  r.x.resize(n);
  r.w.resize(n);
  const Real pi = num::pi<Real>();
  const Real tol = num::epsilon<Real>() * 4;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    Real z = num::cos(pi * (Real(i) + Real(0.75)) / (Real(n) + Real(0.5)));
    Real dp = 0;
    for (int it = 0; it < 100; ++it) {
      Real p0 = 1, p1 = z;
      for (int k = 2; k <= n; ++k) {
        Real p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1;
      dp = n * (z * p1 - p0) / (z * z - 1);
      Real dz = p1 / dp;
      z -= dz;
      if (num::abs(dz) < tol) break;
    }
    r.x[i] = -z;
    r.x[n - 1 - i] = z;
    Real w = 2 / ((1 - z * z) * dp * dp);
    r.w[i] = w;
    r.w[n - 1 - i] = w;
  }
  r.P.assign(std::size_t(n) * n, Real(0));
  for (int i = 0; i < n; ++i) {
    Real p0 = 1, p1 = r.x[i];
    r.P[i] = 1;
    if (n > 1) r.P[n + i] = p1;
    for (int k = 2; k < n; ++k) {
      Real p2 = ((2 * k - 1) * r.x[i] * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
      r.P[std::size_t(k) * n + i] = p2;
    }
  }
  return r;
}

template <class Real>
const GaussRule<Real>& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussRule<Real>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussRule<Real>>(build_gauss_legendre<Real>(n));
  return *slot;
}

template <class Real, class F>
Real integrate_fixed(const GaussRule<Real>& rule, const F& f, Real a, Real b) {
  Real half = (b - a) / 2, mid = (a + b) / 2;
  Real s = 0;
  for (int i = 0; i < rule.n; ++i) s += rule.w[i] * f(mid + half * rule.x[i]);
  return s * half;
}

}  // namespace qpd

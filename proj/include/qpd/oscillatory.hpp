#pragma once

// Filon-Legendre rule for int_a^b F(x) exp(i theta(x)) dx.
//
// On each panel theta is replaced by its chord through the panel ends, the
// remainder F exp(i(theta - chord)) is expanded in Legendre polynomials from
// Gauss values, and the Legendre moments int P_n(x) e^{i b x} = 2 i^n j_n(b)
// are exact. Panels are bisected while the trailing coefficients exceed the
// local share of abs_tol.

#include <algorithm>
#include <cmath>
#include <vector>

#include "qpd/gauss.hpp"
#include "qpd/numeric.hpp"

namespace qpd {

template <class Real>
struct OscOptions {
  int nodes = 24;
  int initial_panels = 8;
  int max_depth = 48;
  long max_panels = 100000;
  Real abs_tol = 0;
};

template <class Real>
struct OscResult {
  Cx<Real> value;
  Real tail = 0;
  long panels = 0;
  bool capped = false;           // depth or panel cap hit before abs_tol
  bool precision_floor = false;  // abs_tol below the rounding level of a panel
};

// j_0(x) .. j_{n-1}(x).
template <class Real>
void spherical_bessel(Real x, int n, Real* out) {
  if (n <= 0) return;
  if (x == 0) {
    out[0] = 1;
    for (int k = 1; k < n; ++k) out[k] = 0;
    return;
  }
  Real ax = num::abs(x);
  if (ax > Real(n)) {
    Real s = num::sin(ax), c = num::cos(ax);
    out[0] = s / ax;
    if (n > 1) out[1] = s / (ax * ax) - c / ax;
    for (int k = 1; k + 1 < n; ++k) out[k + 1] = Real(2 * k + 1) / ax * out[k] - out[k - 1];
  } else {
    int m = n + 60 + static_cast<int>(std::sqrt(40.0 * n));
    std::vector<Real> t(m + 2, Real(0));
    t[m] = Real(1e-30);
    const Real big = Real(1e100);
    for (int k = m; k >= 1; --k) {
      t[k - 1] = Real(2 * k + 1) / ax * t[k] - t[k + 1];
      if (num::abs(t[k - 1]) > big) {
        for (int j = k - 1; j <= m; ++j) t[j] /= big;
      }
    }
    Real sum = 0;
    for (int k = m; k >= 0; --k) sum += Real(2 * k + 1) * t[k] * t[k];
    Real scale = 1 / num::sqrt(sum);
    Real s = num::sin(ax), c = num::cos(ax);
    Real j0 = s / ax, j1 = s / (ax * ax) - c / ax;
    bool flip = num::abs(j0) >= num::abs(j1) ? (j0 * t[0] < 0) : (j1 * t[1] < 0);
    if (flip) scale = -scale;
    for (int k = 0; k < n; ++k) out[k] = t[k] * scale;
  }
  if (x < 0) {
    for (int k = 1; k < n; k += 2) out[k] = -out[k];
  }
}

template <class Real, class Amp, class Phase>
OscResult<Real> filon_integrate(const Amp& amp, const Phase& theta, Real a, Real b,
                                const OscOptions<Real>& opt) {
  OscResult<Real> res;
  if (!(b > a)) return res;
  const GaussRule<Real>& rule = gauss_legendre<Real>(opt.nodes);
  const int n = rule.n;
  const Real span = b - a;
  std::vector<Cx<Real>> F(n), c(n);
  std::vector<Real> jn(n);
  CompensatedSum<Real> sum_re, sum_im, tail;

  struct Panel {
    Real lo, hi, th_lo, th_hi;
    int depth;
  };
  std::vector<Panel> stack;
  std::vector<Real> edges(opt.initial_panels + 1);
  for (int i = 0; i <= opt.initial_panels; ++i)
    edges[i] = i == opt.initial_panels ? b : a + span * Real(i) / Real(opt.initial_panels);
  std::vector<Real> th_edges(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) th_edges[i] = theta(edges[i]);
  for (int i = opt.initial_panels - 1; i >= 0; --i)
    stack.push_back({edges[i], edges[i + 1], th_edges[i], th_edges[i + 1], 0});

  while (!stack.empty()) {
    Panel p = stack.back();
    stack.pop_back();
    const Real h = (p.hi - p.lo) / 2, mid = (p.hi + p.lo) / 2;
    const Real slope = (p.th_hi - p.th_lo) / 2;
    const Real th_mid = (p.th_hi + p.th_lo) / 2;
    for (int i = 0; i < n; ++i) {
      Real x = mid + h * rule.x[i];
      Real resid = theta(x) - (th_mid + slope * rule.x[i]);
      F[i] = amp(x) * expi(resid);
    }
    for (int j = 0; j < n; ++j) {
      Cx<Real> s;
      const Real* Pj = &rule.P[std::size_t(j) * n];
      for (int i = 0; i < n; ++i) s += (rule.w[i] * Pj[i]) * F[i];
      c[j] = (Real(2 * j + 1) / 2) * s;
    }
    Real tail_est = 2 * h * (c[n - 1].abs() + c[n - 2].abs());
    Real local_tol = opt.abs_tol * (2 * h) / span;
    Real cmax = 0;
    for (int j = 0; j < n; ++j) cmax = std::max(cmax, c[j].abs());
    // Rounding in F carries the absolute size of the phase.
    Real th_scale = std::max(Real(1), std::max(num::abs(p.th_lo), num::abs(p.th_hi)));
    Real floor = 50 * n * num::epsilon<Real>() * th_scale * 2 * h * cmax;
    bool can_split = p.depth < opt.max_depth && res.panels + long(stack.size()) < opt.max_panels;
    if (tail_est > local_tol && tail_est <= floor) {
      res.precision_floor = true;
    } else if (tail_est > local_tol && can_split) {
      Real m = mid;
      Real th_m = theta(m);
      stack.push_back({m, p.hi, th_m, p.th_hi, p.depth + 1});
      stack.push_back({p.lo, m, p.th_lo, th_m, p.depth + 1});
      continue;
    }
    if (tail_est > local_tol && tail_est > floor) res.capped = true;
    spherical_bessel(slope, n, jn.data());
    // sum_j c_j 2 i^j j_j(slope)
    Cx<Real> acc;
    for (int j = 0; j < n; ++j) {
      Real m2 = 2 * jn[j];
      Cx<Real> mom;
      switch (j & 3) {
        case 0: mom = {m2, 0}; break;
        case 1: mom = {0, m2}; break;
        case 2: mom = {-m2, 0}; break;
        default: mom = {0, -m2}; break;
      }
      acc += c[j] * mom;
    }
    Cx<Real> val = h * (expi(th_mid) * acc);
    sum_re.add(val.re);
    sum_im.add(val.im);
    tail.add(tail_est);
    ++res.panels;
  }
  res.value = {sum_re.value(), sum_im.value()};
  res.tail = tail.value();
  return res;
}

}  // namespace qpd

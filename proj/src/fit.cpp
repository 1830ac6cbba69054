#include "qpd/fit.hpp"

#include <algorithm>
#include <cmath>

#include "qpd/error.hpp"
#include "qpd/numeric.hpp"

namespace qpd {

namespace {

FitResult ols(const std::vector<double>& x, const std::vector<double>& y, FitModel model) {
  const std::size_t n = x.size();
  require(n >= 2 && y.size() == n, ErrorCode::fit_failure, "fit: need matching samples");
  CompensatedSum<double> sx, sy;
  for (std::size_t i = 0; i < n; ++i) {
    require(std::isfinite(x[i]) && std::isfinite(y[i]), ErrorCode::fit_failure,
            "fit: non-finite sample");
    sx.add(x[i]);
    sy.add(y[i]);
  }
  const double mx = sx.value() / n, my = sy.value() / n;
  CompensatedSum<double> sxx, sxy, syy;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxx.add(dx * dx);
    sxy.add(dx * dy);
    syy.add(dy * dy);
  }
  require(sxx.value() > 0, ErrorCode::fit_failure, "fit: degenerate x values");
  FitResult r;
  r.model = model;
  r.exponent = sxy.value() / sxx.value();
  r.intercept = my - r.exponent * mx;
  r.prefactor = model == FitModel::linear ? r.intercept : std::exp(r.intercept);
  CompensatedSum<double> ss;
  for (std::size_t i = 0; i < n; ++i) {
    double res = y[i] - (r.intercept + r.exponent * x[i]);
    r.residuals.push_back(res);
    ss.add(res * res);
  }
  r.r2 = syy.value() > 0 ? std::clamp(1 - ss.value() / syy.value(), 0.0, 1.0) : 1.0;
  return r;
}

// Scaling fits need enough points for the residuals to mean something.
void require_scaling_sample(const std::vector<double>& xs, const std::vector<double>& ys) {
  require(xs.size() == ys.size(), ErrorCode::fit_failure, "fit: need matching samples");
  require(xs.size() >= 4, ErrorCode::fit_failure, "fit: need at least 4 points");
}

}  // namespace

const char* to_string(FitModel model) {
  switch (model) {
    case FitModel::power_law: return "power_law";
    case FitModel::exponential: return "exponential";
    case FitModel::linear: return "linear";
  }
  return "?";
}

FitResult fit_linear(const std::vector<double>& xs, const std::vector<double>& ys) {
  FitResult r = ols(xs, ys, FitModel::linear);
  r.x_lo = *std::min_element(xs.begin(), xs.end());
  r.x_hi = *std::max_element(xs.begin(), xs.end());
  return r;
}

FitResult fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys) {
  require_scaling_sample(xs, ys);
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    require(xs[i] > 0 && ys[i] > 0, ErrorCode::fit_failure, "fit: nonpositive value in log fit");
    lx.push_back(std::log(xs[i]));
    ly.push_back(std::log(ys[i]));
  }
  FitResult r = ols(lx, ly, FitModel::power_law);
  r.x_lo = *std::min_element(xs.begin(), xs.end());
  r.x_hi = *std::max_element(xs.begin(), xs.end());
  return r;
}

FitResult fit_exponential(const std::vector<double>& xs, const std::vector<double>& ys) {
  require_scaling_sample(xs, ys);
  std::vector<double> ly;
  for (double y : ys) {
    require(y > 0, ErrorCode::fit_failure, "fit: nonpositive value in log fit");
    ly.push_back(std::log(y));
  }
  FitResult r = ols(xs, ly, FitModel::exponential);
  r.x_lo = *std::min_element(xs.begin(), xs.end());
  r.x_hi = *std::max_element(xs.begin(), xs.end());
  return r;
}

}  // namespace qpd

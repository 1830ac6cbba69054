#include <doctest.h>

#include <cmath>
#include <random>

#include "qpd/error.hpp"
#include "qpd/fit.hpp"
#include "qpd/ising_spectral.hpp"

using namespace qpd;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::io;
}

}  // namespace

TEST_CASE("exact power law") {
  std::vector<double> x{2, 3, 5, 8, 13}, y;
  for (double v : x) y.push_back(v * v);
  FitResult f = fit_power_law(x, y);
  CHECK(f.model == FitModel::power_law);
  CHECK(f.exponent == doctest::Approx(2).epsilon(1e-13));
  CHECK(f.prefactor == doctest::Approx(1).epsilon(1e-12));
  CHECK(f.r2 == doctest::Approx(1).epsilon(1e-14));
  CHECK(f.x_lo == 2);
  CHECK(f.x_hi == 13);
  REQUIRE(f.residuals.size() == 5);
  for (double r : f.residuals) CHECK(std::fabs(r) < 1e-13);
}

TEST_CASE("exact exponential") {
  std::vector<double> x, y;
  for (int i = 0; i < 8; ++i) {
    x.push_back(0.5 * i);
    y.push_back(3 * std::exp(-0.7 * x.back()));
  }
  FitResult f = fit_exponential(x, y);
  CHECK(f.model == FitModel::exponential);
  CHECK(std::fabs(f.exponent + 0.7) < 1e-9);
  CHECK(f.prefactor == doctest::Approx(3).epsilon(1e-12));
  CHECK(f.r2 == doctest::Approx(1).epsilon(1e-14));
}

TEST_CASE("linear fit and r2 under noise") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> noise(0, 0.05);
  std::vector<double> x, y, clean;
  for (int i = 0; i < 200; ++i) {
    x.push_back(i / 20.0);
    clean.push_back(1.5 - 0.25 * x.back());
    y.push_back(clean.back() + noise(rng));
  }
  FitResult f = fit_linear(x, y);
  CHECK(f.exponent == doctest::Approx(-0.25).epsilon(0.02));
  CHECK(f.prefactor == doctest::Approx(1.5).epsilon(0.02));
  CHECK(f.intercept == f.prefactor);
  CHECK(f.r2 < 1);
  CHECK(f.r2 > 0.9);
  CHECK(fit_linear(x, clean).r2 == doctest::Approx(1).epsilon(1e-14));
  // A flat series is fitted exactly.
  CHECK(fit_linear({1, 2, 3}, {4, 4, 4}).r2 == 1.0);
}

TEST_CASE("fit errors") {
  CHECK(code_of([] { fit_power_law({1, 2, 3}, {1, 4, 9}); }) == ErrorCode::fit_failure);
  CHECK(code_of([] { fit_exponential({1, 2, 3}, {1, 2, 3}); }) == ErrorCode::fit_failure);
  CHECK(code_of([] { fit_power_law({1, 2, 3, 4}, {1, 4, 9}); }) == ErrorCode::fit_failure);
  CHECK(code_of([] { fit_linear({1, 2}, {1}); }) == ErrorCode::fit_failure);
  CHECK(code_of([] { fit_power_law({1, 2, 3, 4}, {1, -4, 9, 16}); }) == ErrorCode::fit_failure);
  CHECK(code_of([] { fit_power_law({0, 2, 3, 4}, {1, 4, 9, 16}); }) == ErrorCode::fit_failure);
  CHECK(code_of([] { fit_exponential({1, 2, 3, 4}, {1, 0, 9, 16}); }) == ErrorCode::fit_failure);
  CHECK(code_of([] { fit_linear({2, 2, 2}, {1, 2, 3}); }) == ErrorCode::fit_failure);
  CHECK(code_of([] { fit_linear({1, NAN, 3}, {1, 2, 3}); }) == ErrorCode::fit_failure);
}

TEST_CASE("minimum gap of the chain falls as 1/N") {
  std::vector<double> n, gap;
  for (int k = 3; k <= 10; ++k) {
    n.push_back(std::ldexp(1.0, k));
    gap.push_back(global_min_gap(ChainParams::make(int(n.back()))));
  }
  FitResult f = fit_power_law(n, gap);
  CHECK(std::fabs(f.exponent + 1) <= 0.02);
  CHECK(f.r2 > 0.999);
}

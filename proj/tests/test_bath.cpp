#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "qpd/bath.hpp"
#include "qpd/error.hpp"

using namespace qpd;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

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

ThermalParams ohmic(double beta, double omega_c = inf) {
  ThermalParams p;
  p.theta = 0.5;
  p.omega_ph = 1;
  p.epsilon = 1;
  p.beta = beta;
  p.omega_c = omega_c;
  return p;
}

}  // namespace

TEST_CASE("spectral density") {
  CHECK(spectral_density(ohmic(inf), 2) == doctest::Approx(2).epsilon(1e-15));
  CHECK(spectral_density(ohmic(inf), 0) == 0.0);
  ThermalParams flat = ohmic(inf);
  flat.epsilon = 0;
  flat.omega_ph = 3;
  flat.theta = 0.25;
  CHECK(spectral_density(flat, 0) == doctest::Approx(2 * 0.25 * 3));
  ThermalParams sup = ohmic(inf, 2);
  sup.epsilon = 3;
  sup.omega_ph = 0.5;
  // 2 * 0.5 * 0.5^-2 * 1.5^3 * exp(-0.75)
  CHECK(spectral_density(sup, 1.5) == doctest::Approx(4 * 3.375 * std::exp(-0.75)).epsilon(1e-14));
  CHECK(code_of([] { spectral_density(ohmic(inf), -1); }) == ErrorCode::domain);
}

TEST_CASE("zero temperature absorbs only") {
  auto f = SpectralFunction::thermal_bosonic(ohmic(inf, 5));
  for (double w : {-3.0, -0.5, -1e-6}) CHECK(f.evaluate(w) == 0.0);
  for (double w : {0.2, 1.0, 7.0})
    CHECK(f.evaluate(w) == doctest::Approx(spectral_density(ohmic(inf, 5), w)).epsilon(1e-15));
}

TEST_CASE("classical limit at omega -> 0") {
  auto f = SpectralFunction::thermal_bosonic(ohmic(1));
  // J(w) [1/(e^w - 1) + 1] with J = w: limit 1 from both sides.
  CHECK(f.evaluate(0) == doctest::Approx(1).epsilon(1e-15));
  CHECK(f.evaluate(1e-7) == doctest::Approx(1).epsilon(1e-6));
  CHECK(f.evaluate(-1e-7) == doctest::Approx(1).epsilon(1e-6));
  CHECK(f.evaluate(0.1) == doctest::Approx(0.1 / std::expm1(0.1) + 0.1).epsilon(1e-14));
}

TEST_CASE("detailed balance") {
  for (double beta : {0.1, 1.0, 3.0, 20.0}) {
    for (double eps : {0.5, 1.0, 2.0}) {
      ThermalParams p = ohmic(beta, 4);
      p.epsilon = eps;
      auto f = SpectralFunction::thermal_bosonic(p);
      for (double w : {0.3, 0.01, 1.7, 6.0}) {
        double ratio = f.evaluate(-w) / f.evaluate(w);
        CHECK(ratio == doctest::Approx(std::exp(-beta * w)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("sub-ohmic divergence at omega = 0") {
  ThermalParams p = ohmic(2);
  p.epsilon = 0.5;
  auto f = SpectralFunction::thermal_bosonic(p);
  CHECK(code_of([&] { f.evaluate(0); }) == ErrorCode::divergent_at_zero);
  CHECK(std::isfinite(f.evaluate(1e-3)));
  p.beta = inf;
  CHECK(SpectralFunction::thermal_bosonic(p).evaluate(0) == 0.0);
}

TEST_CASE("nonnegativity on random frequencies") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uw(-50, 50);
  ThermalParams sub = ohmic(0.7, 3);
  sub.epsilon = 0.4;
  ThermalParams sup = ohmic(5, 1);
  sup.epsilon = 2.5;
  const SpectralFunction fs[] = {
      SpectralFunction::thermal_bosonic(ohmic(1, 10)), SpectralFunction::thermal_bosonic(sub),
      SpectralFunction::thermal_bosonic(sup), SpectralFunction::thermal_bosonic(ohmic(inf, 2)),
      SpectralFunction::tabulated({{-2, 0}, {-1, 3}, {0, 0.1}, {0.5, 0}, {4, 9}, {9, 0}})};
  for (const auto& f : fs) {
    bool ok = true;
    for (int i = 0; i < 100000; ++i) {
      double w = uw(rng);
      if (w == 0) continue;
      ok = ok && f.evaluate(w) >= 0;
    }
    CHECK(ok);
  }
}

TEST_CASE("cutoff decay") {
  for (double wc : {0.5, 1.0, 10.0}) {
    for (double beta : {1.0, inf}) {
      auto f = SpectralFunction::thermal_bosonic(ohmic(beta, wc));
      double ref = f.evaluate(wc);
      for (double m : {40.5, 60.0, 200.0}) CHECK(f.evaluate(m * wc) < 1e-12 * ref);
    }
  }
}

TEST_CASE("beta -> infinity limit") {
  auto cold = SpectralFunction::thermal_bosonic(ohmic(1e4, 3));
  auto zero = SpectralFunction::thermal_bosonic(ohmic(inf, 3));
  for (double w = 0.1; w <= 10; w += 0.1)
    CHECK(cold.evaluate(w) == doctest::Approx(zero.evaluate(w)).epsilon(1e-4));
}

TEST_CASE("tabulated") {
  auto z = SpectralFunction::tabulated({{0, 0}, {1, 0}});
  for (double w : {0.0, 0.3, 0.99, 1.0}) CHECK(z.evaluate(w) == 0.0);
  CHECK(z.evaluate(-1) == 0.0);
  CHECK(z.evaluate(2) == 0.0);

  auto closed = SpectralFunction::thermal_bosonic(ohmic(2, 5));
  std::vector<std::pair<double, double>> s;
  for (int i = 0; i <= 1000; ++i) {
    double w = 0.05 + 9.95 * i / 1000;
    s.emplace_back(w, closed.evaluate(w));
  }
  auto tab = SpectralFunction::tabulated(s);
  CHECK(tab.kind() == BathKind::tabulated);
  double worst = 0;
  for (int i = 0; i < 999; ++i) {
    double w = 0.05 + 9.95 * (i + 0.37) / 1000;
    worst = std::max(worst, std::fabs(tab.evaluate(w) - closed.evaluate(w)));
  }
  CHECK(worst < 1e-6);

  CHECK(code_of([] { SpectralFunction::tabulated({{0, 1}, {0, 2}}); }) == ErrorCode::invalid_argument);
  CHECK(code_of([] { SpectralFunction::tabulated({{1, 1}, {0, 2}}); }) == ErrorCode::invalid_argument);
  CHECK(code_of([] { SpectralFunction::tabulated({{0, 1}, {1, -2}}); }) == ErrorCode::invalid_argument);
}

TEST_CASE("tabulated from CSV") {
  std::istringstream with_header("omega,f\n0,0\n1,2\n2,0\n");
  auto f = SpectralFunction::from_csv(with_header);
  CHECK(f.evaluate(1) == doctest::Approx(2));
  std::istringstream bare("0 0\n1 2\n2 0\n");
  CHECK(SpectralFunction::from_csv(bare).evaluate(0.5) == doctest::Approx(f.evaluate(0.5)));
  std::istringstream bad("0,0\nx,y\n");
  CHECK(code_of([&] { SpectralFunction::from_csv(bad); }) == ErrorCode::io);
}

TEST_CASE("dirac probe") {
  auto p = SpectralFunction::dirac_probe(0.5, 1);
  CHECK(p.kind() == BathKind::dirac_comb);
  CHECK_FALSE(p.has_density());
  REQUIRE(p.atoms().size() == 1);
  CHECK(p.atoms()[0].omega == 0.5);
  CHECK(p.window_weight(0, 1) == doctest::Approx(1));
  CHECK(p.window_weight(0.6, 1) == 0.0);
  CHECK(p.mirrored().atoms()[0].omega == -0.5);
  CHECK(code_of([] { SpectralFunction::dirac_probe(0.5, 0); }) == ErrorCode::invalid_argument);
}

TEST_CASE("mirror, scale and sum") {
  auto f = SpectralFunction::thermal_bosonic(ohmic(1.5, 2));
  auto m = f.mirrored();
  for (double w : {-2.0, -0.4, 0.7, 3.0}) {
    CHECK(m.evaluate(w) == doctest::Approx(f.evaluate(-w)).epsilon(1e-15));
    CHECK(f.scaled(3).evaluate(w) == doctest::Approx(3 * f.evaluate(w)));
    CHECK((f + m).evaluate(w) == doctest::Approx(f.evaluate(w) + f.evaluate(-w)));
  }
  CHECK(SpectralFunction().is_zero());
  CHECK(SpectralFunction().evaluate(1.0) == 0.0);
}

TEST_CASE("window weight") {
  // int_0^inf w e^-w dw = 1 at zero temperature with theta = 1/2.
  auto f = SpectralFunction::thermal_bosonic(ohmic(inf, 1));
  CHECK(f.window_weight(0, inf) == doctest::Approx(1).epsilon(1e-8));
  CHECK(f.window_weight(-inf, 0) == 0.0);
  CHECK(f.window_weight(0, 1) == doctest::Approx(1 - 2 / std::exp(1.0)).epsilon(1e-8));
}

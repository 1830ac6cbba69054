#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "qpd/error.hpp"
#include "qpd/exact_diag.hpp"
#include "qpd/fit.hpp"
#include "qpd/ising_spectral.hpp"
#include "qpd/schedule.hpp"

using namespace qpd;
using std::numbers::pi;

TEST_CASE("momentum grid") {
  auto g2 = momentum_grid(ChainParams::make(2));
  REQUIRE(g2.size() == 2);
  CHECK(g2[0] == doctest::Approx(-pi / 2).epsilon(1e-15));
  CHECK(g2[1] == doctest::Approx(pi / 2).epsilon(1e-15));

  auto g4 = momentum_grid(ChainParams::make(4));
  REQUIRE(g4.size() == 4);
  const double want[] = {-3 * pi / 4, -pi / 4, pi / 4, 3 * pi / 4};
  for (int i = 0; i < 4; ++i) CHECK(g4[i] == doctest::Approx(want[i]).epsilon(1e-15));

  for (int n : {8, 64, 1024}) {
    auto g = momentum_grid(ChainParams::make(n));
    REQUIRE(int(g.size()) == n);
    double sum = 0, min_abs = 10;
    for (std::size_t i = 0; i < g.size() / 2; ++i) sum += g[i] + g[g.size() - 1 - i];
    for (std::size_t i = 0; i < g.size(); ++i) {
      min_abs = std::min(min_abs, std::fabs(g[i]));
      CHECK(g[i] == -g[g.size() - 1 - i]);
      if (i) CHECK(g[i] > g[i - 1]);
      CHECK(std::fabs(g[i]) < pi);
    }
    CHECK(sum == 0.0);
    CHECK(min_abs == doctest::Approx(pi / n).epsilon(1e-15));
  }
  CHECK_THROWS_AS(ChainParams::make(3), Error);
  CHECK_THROWS_AS(ChainParams::make(0), Error);
}

TEST_CASE("positive modes are the upper half of the grid") {
  auto p = positive_modes(ChainParams::make(8));
  REQUIRE(p.size() == 4);
  CHECK(p[0] == doctest::Approx(pi / 8));
  CHECK(p[3] == doctest::Approx(7 * pi / 8));
}

TEST_CASE("dispersion") {
  CHECK(dispersion(pi / 3, 0) == doctest::Approx(2).epsilon(1e-15));
  for (double ka : {0.1, 1.0, 2.5, -0.7})
    CHECK(dispersion(ka, 0.5) == doctest::Approx(2 * std::fabs(std::sin(ka / 2))).epsilon(1e-14));
  CHECK(dispersion(pi / 2, 0.25) == doctest::Approx(std::sqrt(2.5)).epsilon(1e-14));
  CHECK(dispersion(pi / 2, 0.25) == doctest::Approx(1.5811).epsilon(1e-4));
  CHECK_THROWS_AS(dispersion(0.3, 1.5), Error);
  CHECK_THROWS_AS(dispersion(0.3, -0.1), Error);
  CHECK_THROWS_AS(dispersion(4.0, 0.5), Error);
}

TEST_CASE("mode coefficients") {
  for (double ka : {0.2, 1.3, -2.0}) {
    auto m = mode_coefficients(ka, 0);
    CHECK(m.alpha == doctest::Approx(2));
    CHECK(m.beta == 0.0);
  }
  auto h = mode_coefficients(pi / 2, 0.5);
  CHECK(h.alpha == doctest::Approx(1).epsilon(1e-14));
  CHECK(h.beta == doctest::Approx(1).epsilon(1e-14));
  CHECK(h.alpha * h.alpha + h.beta * h.beta == doctest::Approx(2).epsilon(1e-14));
  for (double g : {0.0, 0.3, 0.77}) {
    auto m = mode_coefficients(pi, g);
    CHECK(m.alpha == doctest::Approx(2).epsilon(1e-14));
    CHECK(std::fabs(m.beta) < 1e-14);
  }
}

TEST_CASE("alpha^2 + beta^2 = E^2 on random inputs") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uk(-pi * 0.999, pi * 0.999), ug(0, 1);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    double ka = uk(rng), g = ug(rng);
    auto m = mode_coefficients(ka, g);
    double e = dispersion(ka, g);
    worst = std::max(worst, std::fabs(m.alpha * m.alpha + m.beta * m.beta - e * e));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("instantaneous Bogoliubov pair") {
  auto b = instantaneous_bogoliubov(pi / 2, 0.5);
  double s2 = std::sqrt(2.0);
  CHECK(std::abs(b.u) == doctest::Approx(std::sqrt((s2 + 1) / (2 * s2))).epsilon(1e-13));
  CHECK(std::abs(b.v) == doctest::Approx(std::sqrt(1 / (2 * s2 * (s2 + 1)))).epsilon(1e-13));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uk(-3.1, 3.1), ug(0, 1);
  for (int i = 0; i < 1000; ++i) {
    auto p = instantaneous_bogoliubov(uk(rng), ug(rng));
    CHECK(std::norm(p.u) + std::norm(p.v) == doctest::Approx(1).epsilon(1e-12));
  }
}

TEST_CASE("adiabatic Bogoliubov pair") {
  Schedule s = Schedule::linear(10);
  auto b0 = adiabatic_bogoliubov(pi / 4, s, 0);
  CHECK(std::abs(b0.u - std::complex<double>(1, 0)) < 1e-14);
  CHECK(std::abs(b0.v) < 1e-14);
  for (double t : {1.0, 5.0, 9.5}) {
    auto b = adiabatic_bogoliubov(0.7, s, t);
    CHECK(std::norm(b.u) + std::norm(b.v) == doctest::Approx(1).epsilon(1e-12));
    // Phase is exp(-i int E dt).
    auto inst = instantaneous_bogoliubov(0.7, t / 10);
    double phi = s.phase_integral(0.7, t);
    CHECK(std::abs(b.u - inst.u * std::polar(1.0, -phi)) < 1e-12);
  }
}

TEST_CASE("frozen g=0 evolution is a pure phase") {
  auto tr = integrate_bogoliubov(pi / 2, Schedule::frozen(0, 1));
  CHECK(std::abs(tr.end.u - std::polar(1.0, -2.0)) < 1e-9);
  CHECK(std::abs(tr.end.v) < 1e-12);
  CHECK(tr.converged);
}

TEST_CASE("norm conservation and endpoint mismatch") {
  const double ka = 3 * pi / 64;
  double prev = 1e9;
  for (double T : {50.0, 100.0, 200.0, 400.0}) {
    Schedule s = Schedule::linear(T);
    auto tr = integrate_bogoliubov(ka, s);
    CHECK(tr.max_norm_error < 1e-9);
    CHECK(tr.converged);
    double m = state_mismatch(tr.end, adiabatic_bogoliubov(ka, s, T));
    CHECK(m < prev);
    prev = m;
  }
  CHECK(prev < 0.05);

  prev = 1e9;
  for (double T : {50.0, 100.0, 200.0, 400.0}) {
    Schedule s = Schedule::linear(T);
    auto tr = integrate_bogoliubov(pi / 16, s);
    double m = state_mismatch(tr.end, adiabatic_bogoliubov(pi / 16, s, T));
    CHECK(m < prev);
    prev = m;
  }
}

TEST_CASE("ground energy closed forms") {
  for (int n : {2, 4, 8, 16}) {
    CHECK(ground_energy_analytic(ChainParams::make(n), 0) == doctest::Approx(-n).epsilon(1e-14));
    CHECK(ground_energy_analytic(ChainParams::make(n), 1) == doctest::Approx(-n).epsilon(1e-14));
  }
  double want = 0;
  for (double ka : momentum_grid(ChainParams::make(8))) want -= std::fabs(std::sin(ka / 2));
  CHECK(ground_energy_analytic(ChainParams::make(8), 0.5) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("analytic ground energy equals even-sector ED") {
  for (int n : {2, 4, 6, 8}) {
    for (int i = 0; i <= 10; ++i) {
      double g = i / 10.0;
      double ed = ground_energy(SpinModel::ising_ring, n, g, Sector::even);
      CHECK(std::fabs(ed - ground_energy_analytic(ChainParams::make(n), g)) < 1e-9);
    }
  }
}

TEST_CASE("gap") {
  CHECK(global_min_gap(ChainParams::make(4)) == doctest::Approx(4 * std::sin(pi / 8)).epsilon(1e-14));
  CHECK(global_min_gap(ChainParams::make(4)) == doctest::Approx(1.53073).epsilon(1e-5));
  CHECK(min_gap(ChainParams::make(8), 0) == doctest::Approx(4).epsilon(1e-14));
  CHECK(min_gap(ChainParams::make(16), 0.5) == doctest::Approx(global_min_gap(ChainParams::make(16))));
  CHECK(global_min_gap(ChainParams::make(4096)) * 4096 == doctest::Approx(2 * pi).epsilon(1e-6));

  std::vector<double> ns, gaps;
  for (int n = 8; n <= 1024; n *= 2) {
    ns.push_back(n);
    gaps.push_back(global_min_gap(ChainParams::make(n)));
  }
  FitResult f = fit_power_law(ns, gaps);
  CHECK(f.exponent == doctest::Approx(-1).epsilon(0.02));
}

TEST_CASE("excitation probability") {
  auto frozen = excitation_probability_mode(0.4, Schedule::frozen(0.3, 50));
  CHECK(frozen.probability < 1e-9);

  double prev = 2;
  for (double T : {100.0, 200.0, 400.0}) {
    auto r = excitation_probability_mode(pi / 64, Schedule::linear(T));
    CHECK(r.converged);
    CHECK(r.probability >= 0);
    CHECK(r.probability <= 1);
    CHECK(r.probability < prev);
    prev = r.probability;
  }

  // Sudden limit: |<(1,0)|excited(g=1)>|^2 with the excited state (-conj v, conj u).
  auto fin = instantaneous_bogoliubov(pi / 2, 1.0);
  double direct = std::norm(fin.v);
  CHECK(sudden_excitation_probability(pi / 2) == doctest::Approx(direct).epsilon(1e-12));
  auto fast = excitation_probability_mode(pi / 2, Schedule::linear(1e-4));
  CHECK(fast.probability == doctest::Approx(direct).epsilon(1e-3));
}

TEST_CASE("chain spectrum bundles the per-mode data") {
  ChainSpectrum s = chain_spectrum(ChainParams::make(64), 0.5);
  REQUIRE(s.momenta.size() == 64);
  REQUIRE(s.energies.size() == 64);
  for (std::size_t i = 0; i < 64; ++i) {
    CHECK(s.energies[i] == doctest::Approx(dispersion(s.momenta[i], 0.5)));
    CHECK(std::norm(s.bogoliubov[i].u) + std::norm(s.bogoliubov[i].v) ==
          doctest::Approx(1).epsilon(1e-12));
  }
}

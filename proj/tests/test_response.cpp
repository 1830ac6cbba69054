#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "qpd/bath.hpp"
#include "qpd/error.hpp"
#include "qpd/exact_diag.hpp"
#include "qpd/fit.hpp"
#include "qpd/ising_spectral.hpp"
#include "qpd/response.hpp"
#include "qpd/schedule.hpp"

using namespace qpd;
using std::numbers::pi;
using cd = std::complex<double>;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::io;
}

double near_gap_exponent(ScheduleKind kind, bool divide_log) {
  std::vector<double> ns, ys;
  for (int n : {32, 64, 128, 256}) {
    Schedule s = Schedule::make(kind, n, adiabatic_runtime(kind, n, 0.1));
    double y = amplitude_bound_near_gap(pi / n, s, 2 * pi / n);
    ns.push_back(n);
    ys.push_back(divide_log ? y / std::log(double(n)) : y);
  }
  return fit_power_law(ns, ys).exponent;
}

// RMS relative modulus mismatch between saddle and quadrature over
// T in T0 * [1, 1.5]; averages out the beat between the two saddles.
double saddle_mismatch(double T0) {
  double sum = 0;
  const int samples = 16;
  for (int i = 0; i < samples; ++i) {
    Schedule s = Schedule::linear(T0 * (1 + 0.5 * i / (samples - 1)));
    auto q = amplitude_direct_uniform(pi / 64, 0.4, s);
    auto a = amplitude_saddle_uniform(0.4, pi / 64, s);
    REQUIRE(q.converged);
    double r = a.modulus() / q.modulus() - 1;
    sum += r * r;
  }
  return std::sqrt(sum / samples);
}

}  // namespace

TEST_CASE("regime classification") {
  CHECK(classify_regime(-0.1, 0.3) == Regime::negative);
  CHECK(classify_regime(0.6, 0.3) == Regime::near_gap);
  CHECK(classify_regime(0.5, pi / 64) == Regime::intermediate);
  CHECK(classify_regime(0.0, 0.3) == Regime::sub_gap);
  CHECK(classify_regime(0.16, 0.25) == Regime::sub_gap);
  CHECK(classify_regime(0.17, 0.25) == Regime::near_gap);
  CHECK(classify_regime(1.5, 0.25) == Regime::near_gap);
  CHECK(classify_regime(1.51, 0.25) == Regime::intermediate);
  auto b = regime_bounds(0.1);
  CHECK(b.sub_gap_hi == doctest::Approx(0.2 / 3));
  CHECK(b.near_gap_hi == doctest::Approx(0.6));
  CHECK(b.intermediate_hi == 2.0);
  // Partition: every omega below 2 lands in exactly one window.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3, 2), uk(-3, 3);
  for (int i = 0; i < 1000; ++i) {
    double w = u(rng), ka = uk(rng);
    auto r = regime_bounds(ka);
    Regime want = w < 0 ? Regime::negative
                  : w < r.sub_gap_hi ? Regime::sub_gap
                  : w <= r.near_gap_hi ? Regime::near_gap
                                       : Regime::intermediate;
    CHECK(classify_regime(w, ka) == want);
  }
}

TEST_CASE("uniform matrix element") {
  CHECK(std::abs(matrix_element_uniform(0.4, 0)) == 0.0);
  CHECK(std::abs(matrix_element_uniform(pi / 2, 0.5) - cd(0, 1 / std::sqrt(2.0))) < 1e-14);
  for (double ka : {0.1, 1.2, 2.9})
    CHECK(std::abs(matrix_element_uniform(-ka, 0.3) + matrix_element_uniform(ka, 0.3)) < 1e-15);
}

TEST_CASE("empty sweep gives zero amplitude") {
  ResponseOptions o;
  o.t_end = 0;
  auto r = amplitude_direct_uniform(0.3, 0.5, Schedule::linear(100), o);
  CHECK(r.modulus() == 0.0);
}

TEST_CASE("sub-gap amplitude is exponentially suppressed") {
  const double ka = pi / 8;
  ResponseOptions o;
  o.extended = true;
  o.switching = true;
  std::vector<double> Ts{200, 400, 800}, ms;
  for (double T : Ts) {
    auto r = amplitude_direct_uniform(ka, 0.0, Schedule::linear(T), o);
    CHECK(r.converged);
    CHECK(r.regime == Regime::sub_gap);
    ms.push_back(r.modulus());
  }
  CHECK(ms[1] < ms[0]);
  CHECK(ms[2] < ms[1]);
  double rate = decay_rate(Ts, ms);
  CHECK(rate == doctest::Approx(ka * ka / 2).epsilon(0.25));
}

TEST_CASE("negative-frequency amplitude is exponentially suppressed") {
  const double ka = pi / 8;
  ResponseOptions o;
  o.extended = true;
  o.switching = true;
  std::vector<double> Ts{200, 400, 800}, ms;
  for (double T : Ts) {
    auto r = amplitude_direct_uniform(ka, -0.2, Schedule::linear(T), o);
    // At T = 800 the amplitude reaches the rounding floor of the extended
    // arithmetic and is reported as uncertified; it is still used for the rate.
    if (T < 800) CHECK(r.converged);
    CHECK(r.regime == Regime::negative);
    ms.push_back(r.modulus());
  }
  double rate = decay_rate(Ts, ms);
  CHECK(rate >= 0.5 * pi / 16 * ka * ka / 2);
}

TEST_CASE("saddle points") {
  auto a = saddle_points_uniform(2, 1e-9);
  CHECK(a.g_plus == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(a.g_minus == doctest::Approx(0.25).epsilon(1e-9));
  auto b = saddle_points_uniform(4 * std::sin(0.15) * (1 + 1e-15), 0.3);
  CHECK(b.g_plus == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(b.g_minus == doctest::Approx(0.5).epsilon(1e-6));
  auto c = saddle_points_uniform(1, pi / 16);
  CHECK(2 * dispersion(pi / 16, c.g_plus) == doctest::Approx(1).epsilon(1e-12));
  CHECK(2 * dispersion(pi / 16, c.g_minus) == doctest::Approx(1).epsilon(1e-12));
  CHECK(c.g_minus < 0.5);
  CHECK(c.g_plus > 0.5);
  CHECK(code_of([] { saddle_points_uniform(0.1, pi / 16); }) == ErrorCode::complex_saddle);
  CHECK(code_of([] { saddle_points_uniform(4 * std::sin(0.15), 0.3); }) == ErrorCode::saddle_collision);
  CHECK(code_of([] { saddle_points_uniform(4.5, 0.3); }) == ErrorCode::domain);
}

TEST_CASE("saddle amplitude scales as rate^-1/2") {
  // The two saddles beat against each other, so compare RMS moduli over a
  // window of run times.
  auto rms = [](double T0) {
    double sum = 0;
    for (int i = 0; i < 32; ++i) {
      double m = amplitude_saddle_uniform(0.4, pi / 64, Schedule::linear(T0 * (1 + i / 31.0))).modulus();
      sum += m * m;
    }
    return std::sqrt(sum / 32);
  };
  CHECK(rms(10000) / rms(5000) == doctest::Approx(std::sqrt(2.0)).epsilon(0.05));
}

TEST_CASE("saddle amplitude agrees with quadrature at T = 5000") {
  Schedule s = Schedule::linear(5000);
  auto q = amplitude_direct_uniform(pi / 64, 0.4, s);
  auto a = amplitude_saddle_uniform(0.4, pi / 64, s);
  REQUIRE(q.converged);
  CHECK(a.usable());
  CHECK(a.method == Method::saddle_point);
  CHECK(std::fabs(a.modulus() / q.modulus() - 1) < 0.25);
}

TEST_CASE("saddle agreement improves with T") {
  double m1 = saddle_mismatch(5000), m2 = saddle_mismatch(10000);
  INFO("rms mismatch " << m1 << " -> " << m2);
  CHECK(m2 < m1);
}

TEST_CASE("saddle amplitude flags its own breakdown near the collision") {
  const double ka = pi / 16;
  double w = 4 * std::sin(ka / 2) * 1.0005;
  auto r = amplitude_saddle_uniform(w, ka, Schedule::linear(1000));
  CHECK(r.validity > 1);
  CHECK_FALSE(r.usable());
}

TEST_CASE("amplitude accumulates between the saddles") {
  const double ka = pi / 64, w = 0.4, T = 5000;
  Schedule s = Schedule::linear(T);
  auto sp = saddle_points_uniform(w, ka);
  auto at = [&](double g) {
    ResponseOptions o;
    o.t_end = s.invert(g);
    return amplitude_direct_uniform(ka, w, s, o).value;
  };
  cd total = amplitude_direct_uniform(ka, w, s).value;
  cd window = at(sp.g_plus + 0.1) - at(sp.g_minus - 0.1);
  CHECK(std::abs(total - window) <= 0.2 * std::abs(total));
}

TEST_CASE("quadrature is self-consistent under refinement") {
  for (double w : {0.4, 0.1, 1.2}) {
    ResponseOptions lo, hi;
    lo.rel_tol = 1e-5;
    hi.rel_tol = 1e-9;
    auto a = amplitude_direct_uniform(pi / 32, w, Schedule::linear(800), lo);
    auto b = amplitude_direct_uniform(pi / 32, w, Schedule::linear(800), hi);
    REQUIRE(a.converged);
    CHECK(a.quad_error < 1e-3 * a.modulus());
    CHECK(std::abs(a.value - b.value) <= a.quad_error + 1e-12);
  }
}

TEST_CASE("parity selection rules") {
  // Sum_j sx_j keeps the bitflip parity, a single sz flips it.
  const int n = 6;
  auto h = build_hamiltonian(SpinModel::ising_ring, n, 0.35);
  auto s = low_spectrum(h, 1 << n, true);
  auto parity = parity_resolve(h, s);
  const std::size_t dim = std::size_t(1) << n;
  Eigen::VectorXd g0 = s.eigenvectors.col(0), sx = Eigen::VectorXd::Zero(dim),
                  sz = Eigen::VectorXd::Zero(dim);
  for (std::size_t b = 0; b < dim; ++b) {
    for (int j = 0; j < n; ++j) sx(b ^ (std::size_t(1) << j)) += g0(b);
    sz(b) = (b & 1) ? -g0(b) : g0(b);
  }
  double x_odd = 0, z_even = 0, x_even = 0, z_odd = 0;
  for (std::size_t i = 1; i < dim; ++i) {
    double mx = std::fabs(s.eigenvectors.col(i).dot(sx));
    double mz = std::fabs(s.eigenvectors.col(i).dot(sz));
    if (parity[i] == parity[0]) {
      z_even = std::max(z_even, mz);
      x_even = std::max(x_even, mx);
    } else {
      x_odd = std::max(x_odd, mx);
      z_odd = std::max(z_odd, mz);
    }
  }
  CHECK(x_odd < 1e-10);
  CHECK(z_even < 1e-10);
  CHECK(x_even > 0.1);
  CHECK(z_odd > 0.1);
}

TEST_CASE("phase-free near-gap bound") {
  Schedule lin = Schedule::linear(300);
  CHECK(amplitude_bound_near_gap(-0.2, lin) == doctest::Approx(amplitude_bound_near_gap(0.2, lin)));
  CHECK(amplitude_bound_near_gap(0.2, lin) >= 0);
  // Linear schedule: (2 sin ka) T int_0^1 g / E dg.
  auto e = [](double g) { return dispersion(0.2, g); };
  double I = 0;
  const int m = 20000;
  for (int i = 0; i < m; ++i) {
    double g = (i + 0.5) / m;
    I += g / e(g) / m;
  }
  CHECK(amplitude_bound_near_gap(0.2, lin) == doctest::Approx(2 * std::sin(0.2) * 300 * I).epsilon(1e-6));
}

TEST_CASE("near-gap bound scales as N^2 for the linear schedule at ka = pi/N") {
  CHECK(near_gap_exponent(ScheduleKind::linear, false) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("near-gap bound scales as N for the gap-squared schedule at ka = pi/N") {
  CHECK(near_gap_exponent(ScheduleKind::gap_squared_adapted, false) ==
        doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("nonuniform amplitude") {
  auto z = amplitude_direct_nonuniform(0.3, 0.7, 0.5, 16, Schedule::frozen(0, 200));
  CHECK(z.modulus() == 0.0);

  // k' = k: the integrand reduces to the uniform one.
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> uk(0.01, 3.1), ug(0.01, 1);
  double ref = 0, worst = 0;
  for (int i = 0; i < 100; ++i) {
    double ka = uk(rng), g = ug(rng);
    double e = dispersion(ka, g), alpha = 2 - 4 * g * std::pow(std::cos(ka / 2), 2);
    double env = nonuniform_coefficient(ka, ka, g) / std::sqrt(2 * e * e + 2 * alpha * e);
    double ratio = env / std::abs(matrix_element_uniform(ka, g));
    if (i == 0) ref = ratio;
    worst = std::max(worst, std::fabs(ratio - ref));
  }
  CHECK(worst < 1e-10);

  Schedule s = Schedule::linear(400);
  auto u = amplitude_direct_uniform(pi / 16, 0.9, s);
  auto nu = amplitude_direct_nonuniform(pi / 16, pi / 16, 0.9, 16, s);
  CHECK(std::abs(16.0 * nu.value - cd(0, 1) * u.value) < 1e-5 * std::abs(u.value));

  // 1/N at fixed modes and frequency.
  auto n16 = amplitude_direct_nonuniform(pi / 16, 3 * pi / 16, 0.9, 16, s);
  auto n32 = amplitude_direct_nonuniform(pi / 16, 3 * pi / 16, 0.9, 32, s);
  CHECK(n32.modulus() / n16.modulus() == doctest::Approx(0.5).epsilon(0.05));

  auto pp = amplitude_direct_nonuniform(pi / 16, 3 * pi / 16, 0.9, 16, s, {}, true);
  CHECK(pp.converged);
  CHECK(std::abs(pp.value - n16.value) > 0);
}

TEST_CASE("bitflip amplitudes on a frozen g = 0 path") {
  const double T = 37, w = 0.6, ka = 0.4;
  auto b = amplitude_bitflip(ka, w, Schedule::frozen(0, T));
  CHECK(b.first.modulus() == 0.0);
  // Integrand 1 * exp(i (4 - w) t).
  cd want = std::polar(1.0, ka) * (std::exp(cd(0, (4 - w) * T)) - 1.0) / cd(0, 4 - w);
  CHECK(std::abs(b.second.value - want) < 1e-9);
  CHECK(b.second.modulus() <= 2 / std::fabs(2 - w));
}

TEST_CASE("second bitflip term grows linearly in T") {
  std::vector<double> Ts{500, 1000, 2000}, ms;
  for (double T : Ts) {
    auto b = amplitude_bitflip(pi / 16, 0.6, Schedule::linear(T));
    CHECK(b.second.converged);
    ms.push_back(b.second.modulus());
  }
  CHECK(ms[1] / ms[0] == doctest::Approx(2).epsilon(0.2));
  CHECK(ms[2] / ms[1] == doctest::Approx(2).epsilon(0.2));
}

TEST_CASE("bitflip per-mode amplitude scales as N^3/2") {
  std::vector<double> ns, ys;
  for (int n : {32, 64, 128, 256}) {
    Schedule s = Schedule::linear(adiabatic_runtime(ScheduleKind::linear, n, 0.1));
    ns.push_back(n);
    ys.push_back(bitflip_bound(pi / n, s) / std::sqrt(double(n)));
  }
  CHECK(fit_power_law(ns, ys).exponent == doctest::Approx(1.5).epsilon(0.1));
}

TEST_CASE("total error") {
  Channel ch{ChannelKind::uniform_x, 1, 0};
  Schedule s = Schedule::linear(200);
  CHECK(total_error(ch, s, SpectralFunction(), {pi / 16}).value == 0.0);

  ThermalParams tp;
  tp.theta = 0.5;
  tp.epsilon = 1;
  tp.omega_c = 1;
  tp.beta = 1 / (4 * std::sin(pi / 64));
  auto ohmic = SpectralFunction::thermal_bosonic(tp).mirrored();
  double prev = 0;
  for (int n : {16, 32, 64, 128, 256}) {
    Schedule sn = Schedule::linear(adiabatic_runtime(ScheduleKind::linear, n, 0.1));
    auto te = total_error(ch, sn, ohmic, positive_modes(ChainParams::make(n)));
    CHECK(te.nonconverged == 0);
    CHECK(te.value >= prev);
    double parts = 0;
    for (const auto& r : te.regimes) parts += r.contribution;
    CHECK(parts == doctest::Approx(te.value).epsilon(1e-12));
    prev = te.value;
  }

  // Support below every gap: N independent.
  const double cap = 4 * std::sin(pi / 512) / 3;
  auto cold = SpectralFunction::tabulated({{0, 0}, {0.5 * cap, 1}, {0.99 * cap, 0}});
  std::vector<double> vals;
  for (int n : {32, 64, 128, 256}) {
    Schedule sn = Schedule::linear(adiabatic_runtime(ScheduleKind::linear, n, 0.1));
    vals.push_back(total_error(ch, sn, cold, positive_modes(ChainParams::make(n))).value);
  }
  auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
  CHECK(*hi / *lo < 1.2);

  // Quadrature source on a small case.
  auto q = total_error(ch, s, ohmic, {pi / 8}, {}, AmplitudeSource::quadrature);
  CHECK(q.nonconverged == 0);
  CHECK(q.value > 0);
}

TEST_CASE("decay rate fit") {
  std::vector<double> T{1, 2, 3, 4}, m;
  for (double t : T) m.push_back(3 * std::exp(-0.7 * t));
  CHECK(decay_rate(T, m) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(code_of([] { decay_rate({1, 2}, {1, 0}); }) == ErrorCode::invalid_argument);
}

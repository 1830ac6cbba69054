#include "qpd/ising_spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qpd/error.hpp"
#include "qpd/schedule.hpp"

namespace qpd {

namespace {

using cd = std::complex<double>;

void check_mode(double ka, double g) {
  require(g >= 0 && g <= 1, ErrorCode::domain, "g outside [0,1]");
  require(std::fabs(ka) <= std::numbers::pi, ErrorCode::domain, "|ka| > pi");
}

struct State {
  cd u, v;
};

State rhs(const State& s, double a, double b) {
  // i u' = a u + b v ; i v' = -a v + b u
  const cd mi(0, -1);
  return {mi * (a * s.u + b * s.v), mi * (-a * s.v + b * s.u)};
}

struct Coeffs {
  double a, b;
};

Coeffs coeffs_at(double ka, const Schedule& schedule, double t) {
  double g = schedule.evaluate(t).g;
  double c = std::cos(ka / 2);
  return {2 - 4 * g * c * c, 2 * g * std::sin(ka)};
}

struct RunResult {
  State end;
  double max_norm_error = 0;
  std::vector<double> t;
  std::vector<BogoliubovPair> uv;
};

RunResult run_rk4(double ka, const Schedule& schedule, long steps, int samples) {
  const double T = schedule.total_time();
  const double h = T / steps;
  BogoliubovPair start = instantaneous_bogoliubov(ka, schedule.evaluate(0.0).g);
  State s{start.u, start.v};
  RunResult out;
  long stride = samples > 1 ? std::max<long>(1, steps / (samples - 1)) : steps + 1;
  auto record = [&](long i) {
    out.t.push_back(i * h);
    out.uv.push_back({s.u, s.v});
  };
  record(0);
  Coeffs c0 = coeffs_at(ka, schedule, 0.0);
  for (long i = 0; i < steps; ++i) {
    double t = i * h;
    Coeffs cm = coeffs_at(ka, schedule, t + 0.5 * h);
    Coeffs c1 = coeffs_at(ka, schedule, i + 1 == steps ? T : t + h);
    State k1 = rhs(s, c0.a, c0.b);
    State s2{s.u + 0.5 * h * k1.u, s.v + 0.5 * h * k1.v};
    State k2 = rhs(s2, cm.a, cm.b);
    State s3{s.u + 0.5 * h * k2.u, s.v + 0.5 * h * k2.v};
    State k3 = rhs(s3, cm.a, cm.b);
    State s4{s.u + h * k3.u, s.v + h * k3.v};
    State k4 = rhs(s4, c1.a, c1.b);
    s.u += h / 6 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u);
    s.v += h / 6 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
    c0 = c1;
    double nerr = std::fabs(std::norm(s.u) + std::norm(s.v) - 1);
    out.max_norm_error = std::max(out.max_norm_error, nerr);
    if ((i + 1) % stride == 0 || i + 1 == steps) record(i + 1);
  }
  out.end = s;
  return out;
}

}  // namespace

ChainParams ChainParams::make(int n) {
  require(n >= 2 && n % 2 == 0, ErrorCode::invalid_argument,
          "chain: N must be even and >= 2, got " + std::to_string(n));
  return ChainParams{n};
}

std::vector<double> momentum_grid(const ChainParams& params) {
  ChainParams p = ChainParams::make(params.n_spins);
  const int n = p.n_spins;
  std::vector<double> out;
  out.reserve(n);
  for (int m = -n / 2; m < n / 2; ++m) out.push_back((2 * m + 1) * std::numbers::pi / n);
  return out;
}

std::vector<double> positive_modes(const ChainParams& params) {
  ChainParams p = ChainParams::make(params.n_spins);
  std::vector<double> out;
  for (int m = 0; m < p.n_spins / 2; ++m)
    out.push_back((2 * m + 1) * std::numbers::pi / p.n_spins);
  return out;
}

double dispersion(double ka, double g) {
  check_mode(ka, g);
  return SqrtQuadratic::ising_mode(ka).value(g);
}

ModeCoefficients mode_coefficients(double ka, double g) {
  check_mode(ka, g);
  double c = std::cos(ka / 2);
  return {2 - 4 * g * c * c, 2 * g * std::sin(ka)};
}

BogoliubovPair instantaneous_bogoliubov(double ka, double g) {
  ModeCoefficients m = mode_coefficients(ka, g);
  double e = dispersion(ka, g);
  // alpha + E cancels for alpha < 0; use beta^2 / (E - alpha) there.
  double ae = m.alpha >= 0 ? m.alpha + e : m.beta * m.beta / (e - m.alpha);
  double norm = std::sqrt(2 * e * ae);
  require(norm >= 1e-10, ErrorCode::degenerate_normalization,
          "bogoliubov: normalization below 1e-10");
  return {ae / norm, m.beta / norm};
}

BogoliubovPair adiabatic_bogoliubov(double ka, const Schedule& schedule, double t) {
  double g = schedule.evaluate(t).g;
  BogoliubovPair p = instantaneous_bogoliubov(ka, g);
  double phi = schedule.phase_integral(ka, t);
  cd ph = std::polar(1.0, -phi);
  return {p.u * ph, p.v * ph};
}

ChainSpectrum chain_spectrum(const ChainParams& params, double g) {
  ChainSpectrum out;
  out.params = ChainParams::make(params.n_spins);
  out.g = g;
  out.momenta = momentum_grid(out.params);
  for (double ka : out.momenta) {
    out.energies.push_back(dispersion(ka, g));
    out.bogoliubov.push_back(instantaneous_bogoliubov(ka, g));
  }
  return out;
}

BogoliubovTrajectory integrate_bogoliubov(double ka, const Schedule& schedule, long steps,
                                          int samples) {
  require(std::fabs(ka) < std::numbers::pi, ErrorCode::domain, "|ka| >= pi");
  const double T = schedule.total_time();
  if (steps == 0) steps = std::max<long>(64, static_cast<long>(std::ceil(T / 0.002)));
  require(steps >= 1, ErrorCode::invalid_argument, "integrate: steps < 1");
  RunResult coarse = run_rk4(ka, schedule, steps, samples);
  RunResult fine = run_rk4(ka, schedule, 2 * steps, samples);
  BogoliubovTrajectory out;
  out.t = std::move(fine.t);
  out.uv = std::move(fine.uv);
  out.end = {fine.end.u, fine.end.v};
  out.step_error = std::max(std::abs(fine.end.u - coarse.end.u),
                            std::abs(fine.end.v - coarse.end.v));
  out.max_norm_error = std::max(fine.max_norm_error, coarse.max_norm_error);
  out.steps = 2 * steps;
  out.converged = out.step_error < 1e-8;
  return out;
}

double state_mismatch(const BogoliubovPair& a, const BogoliubovPair& b) {
  double ov = std::abs(std::conj(a.u) * b.u + std::conj(a.v) * b.v);
  return std::sqrt(std::max(0.0, 2 - 2 * ov));
}

double ground_energy_analytic(const ChainParams& params, double g) {
  require(g >= 0 && g <= 1, ErrorCode::domain, "g outside [0,1]");
  CompensatedSum<double> acc;
  for (double ka : momentum_grid(params)) acc.add(dispersion(ka, g));
  return -0.5 * acc.value();
}

double min_gap(const ChainParams& params, double g) {
  ChainParams p = ChainParams::make(params.n_spins);
  require(g >= 0 && g <= 1, ErrorCode::domain, "g outside [0,1]");
  return ising_gap(p.n_spins, g);
}

double global_min_gap(const ChainParams& params) {
  ChainParams p = ChainParams::make(params.n_spins);
  return 4 * std::sin(std::numbers::pi / (2.0 * p.n_spins));
}

ExcitationResult excitation_probability_mode(double ka, const Schedule& schedule,
                                             long steps) {
  BogoliubovTrajectory tr = integrate_bogoliubov(ka, schedule, steps, 2);
  double g_end = schedule.evaluate(schedule.total_time()).g;
  BogoliubovPair inst = instantaneous_bogoliubov(ka, g_end);
  cd amp = tr.end.u * std::conj(inst.v) - tr.end.v * std::conj(inst.u);
  return {std::min(1.0, std::norm(amp)), tr.step_error, tr.converged};
}

double sudden_excitation_probability(double ka) {
  BogoliubovPair fin = instantaneous_bogoliubov(ka, 1.0);
  // Initial state (1,0); excited partner of (u,v) is (-v*, u*).
  cd amp = -std::conj(fin.v) * 1.0;
  return std::norm(amp);
}

}  // namespace qpd

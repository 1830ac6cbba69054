#include "qpd/response.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qpd/bath.hpp"
#include "qpd/error.hpp"
#include "qpd/gauss.hpp"
#include "qpd/ising_spectral.hpp"
#include "qpd/oscillatory.hpp"
#include "qpd/schedule.hpp"

namespace qpd {

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// Phase = ca * int E_a dt + cb * int E_b dt.
struct PhaseSpec {
  SqrtQuadratic a, b;
  double ca = 0, cb = 0;
};

template <class Real>
Real switch_profile(const ResponseOptions& o, Real g) {
  if (!o.switching) return Real(1);
  Real w = Real(o.switch_width);
  return (num::erf((g - Real(o.switch_on)) / w) - num::erf((g - Real(o.switch_off)) / w)) / 2;
}

template <class Real>
cd to_cd(const Cx<Real>& z) {
  return {double(z.re), double(z.im)};
}

// Runs the Filon rule with an absolute tolerance tightened toward
// 0.1 rel |I|, then once more on a doubled grid as a certificate.
template <class Real, class Amp, class Theta>
AmplitudeResult certified(const Amp& amp, const Theta& theta, Real lo, Real hi, double rel) {
  AmplitudeResult out;
  if (!(hi > lo)) return out;
  const auto& rule = gauss_legendre<Real>(16);
  Real scale = 0;
  const int pieces = 64;
  for (int i = 0; i < pieces; ++i) {
    Real a = lo + (hi - lo) * Real(i) / Real(pieces);
    Real b = lo + (hi - lo) * Real(i + 1) / Real(pieces);
    scale += integrate_fixed(rule, [&](Real x) { return amp(x).abs(); }, a, b);
  }
  if (scale == 0) return out;
  // Below this the phase rounding dominates.
  Real th_max = std::max({Real(1), num::abs(theta(lo)), num::abs(theta(hi))});
  const Real attainable = 4 * num::epsilon<Real>() * scale * th_max;
  OscOptions<Real> oo;
  oo.abs_tol = std::max(Real(rel) * scale, attainable);
  OscResult<Real> r = filon_integrate(amp, theta, lo, hi, oo);
  for (int it = 0; it < 8 && !r.precision_floor; ++it) {
    Real target = std::max(Real(0.1 * rel) * r.value.abs(), attainable);
    if (!(target < oo.abs_tol)) break;
    oo.abs_tol = target;
    r = filon_integrate(amp, theta, lo, hi, oo);
  }
  OscOptions<Real> fine = oo;
  fine.abs_tol = std::max(oo.abs_tol / 16, attainable);
  fine.initial_panels = 2 * oo.initial_panels;
  OscResult<Real> r2 = filon_integrate(amp, theta, lo, hi, fine);
  Real err = (r2.value - r.value).abs() + r2.tail;
  out.value = to_cd(r2.value);
  out.quad_error = double(err);
  out.converged = !r2.capped && err <= Real(1e-3) * r2.value.abs();
  return out;
}

// int over the sweep of env(g) exp(i(-omega t + phase)) dt.
template <class Real, class Env>
AmplitudeResult integrate_sweep(const Env& env, const PhaseSpec& ph, double omega,
                                const Schedule& s, const ResponseOptions& opt) {
  const double T = s.total_time();
  double t_end = std::isnan(opt.t_end) ? T : opt.t_end;
  require(t_end >= 0 && t_end <= T * (1 + 1e-15), ErrorCode::domain,
          "response: t_end outside [0,T]");
  if (t_end == 0 || T == 0) return {};
  const Real w = Real(omega), ca = Real(ph.ca), cb = Real(ph.cb);

  if (s.kind() == ScheduleKind::frozen) {
    const double g0 = s.frozen_value();
    const Real e = Real(env(Real(g0)));
    const Real rate = -w + ca * ph.a.value(Real(g0)) + cb * ph.b.value(Real(g0));
    const Real TT = Real(T);
    auto amp = [&](Real t) { return Cx<Real>{e * switch_profile(opt, t / TT), Real(0)}; };
    auto theta = [&](Real t) { return rate * t; };
    return certified<Real>(amp, theta, Real(0), Real(t_end), opt.rel_tol);
  }
  if (s.kind() == ScheduleKind::linear) {
    const Real TT = Real(T);
    auto amp = [&](Real g) { return Cx<Real>{TT * env(g) * switch_profile(opt, g), Real(0)}; };
    auto theta = [&](Real g) {
      Real v = -w * TT * g;
      if (ph.ca != 0) v += ca * TT * ph.a.integral(g);
      if (ph.cb != 0) v += cb * TT * ph.b.integral(g);
      return v;
    };
    return certified<Real>(amp, theta, Real(0), Real(t_end / T), opt.rel_tol);
  }
  if constexpr (std::is_same_v<Real, double>) {
    double g_end = t_end >= T ? 1.0 : s.evaluate(t_end).g;
    PhaseTable pa = s.phase_table(ph.a);
    PhaseTable pb = s.phase_table(ph.b);
    auto amp = [&](double g) {
      return Cx<double>{env(g) * switch_profile(opt, g) / s.rate_at(g), 0.0};
    };
    auto theta = [&](double g) {
      double v = -omega * s.invert(std::clamp(g, 0.0, 1.0));
      if (ph.ca != 0) v += ph.ca * pa(g);
      if (ph.cb != 0) v += ph.cb * pb(g);
      return v;
    };
    return certified<double>(amp, theta, 0.0, g_end, opt.rel_tol);
  } else {
    throw Error(ErrorCode::invalid_argument,
                "response: extended precision needs a linear or frozen schedule");
  }
}

template <class Env>
AmplitudeResult integrate_sweep_any(const Env& env, const PhaseSpec& ph, double omega,
                                    const Schedule& s, const ResponseOptions& opt) {
  if (opt.extended) {
    require(s.kind() == ScheduleKind::linear || s.kind() == ScheduleKind::frozen,
            ErrorCode::invalid_argument,
            "response: extended precision needs a linear or frozen schedule");
    return integrate_sweep<quad>(env, ph, omega, s, opt);
  }
  return integrate_sweep<double>(env, ph, omega, s, opt);
}

void check_ka(double ka) {
  require(std::isfinite(ka) && std::fabs(ka) < kPi, ErrorCode::domain, "response: |ka| >= pi");
}

// 1/2 + (1 - 2g cos^2(ka/2)) / E_k, clamped at 0 against rounding.
template <class Real>
Real half_plus(const SqrtQuadratic& e, double c2, Real g) {
  Real v = Real(0.5) + (1 - 2 * g * Real(c2)) / e.value(g);
  return v < 0 ? Real(0) : v;
}

template <class F>
double integrate_smooth(const F& f, double a, double b) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-12);
}

// int_0^T h(g(t)) dt for a nonnegative smooth h.
template <class F>
double sweep_integral(const F& h, const Schedule& s) {
  if (s.kind() == ScheduleKind::frozen) return h(s.frozen_value()) * s.total_time();
  return integrate_smooth([&](double g) { return h(g) / s.rate_at(g); }, 0.0, 1.0);
}

double effective_time(const Schedule& s) {
  if (s.kind() == ScheduleKind::frozen) return s.total_time();
  return 1.0 / s.rate_at(0.5);
}

}  // namespace

const char* to_string(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::uniform_x: return "uniform_x";
    case ChannelKind::nonuniform_x: return "nonuniform_x";
    case ChannelKind::single_site_z: return "single_site_z";
  }
  return "?";
}

const char* to_string(Regime regime) {
  switch (regime) {
    case Regime::intermediate: return "intermediate";
    case Regime::near_gap: return "near_gap";
    case Regime::sub_gap: return "sub_gap";
    case Regime::negative: return "negative";
  }
  return "?";
}

const char* to_string(Method method) {
  switch (method) {
    case Method::quadrature: return "quadrature";
    case Method::saddle_point: return "saddle_point";
    case Method::phase_free_bound: return "phase_free_bound";
    case Method::contour_estimate: return "contour_estimate";
  }
  return "?";
}

const char* to_string(AmplitudeSource source) {
  return source == AmplitudeSource::quadrature ? "quadrature" : "asymptotic";
}

ChannelKind channel_kind_from_string(const std::string& name) {
  for (ChannelKind k :
       {ChannelKind::uniform_x, ChannelKind::nonuniform_x, ChannelKind::single_site_z})
    if (name == to_string(k)) return k;
  throw Error(ErrorCode::config, "unknown channel: " + name);
}

RegimeBounds regime_bounds(double ka, double rho) {
  require(rho >= 1, ErrorCode::invalid_argument, "regime: rho < 1");
  double gap = 2 * std::fabs(ka);
  RegimeBounds b;
  b.sub_gap_hi = std::min(2.0, gap / rho);
  b.near_gap_hi = std::min(2.0, gap * rho);
  return b;
}

Regime classify_regime(double omega, double ka, double rho) {
  check_ka(ka);
  if (omega < 0) return Regime::negative;
  RegimeBounds b = regime_bounds(ka, rho);
  if (omega < b.sub_gap_hi) return Regime::sub_gap;
  if (omega <= b.near_gap_hi) return Regime::near_gap;
  return Regime::intermediate;
}

std::complex<double> matrix_element_uniform(double ka, double g) {
  check_ka(ka);
  require(g >= 0 && g <= 1, ErrorCode::domain, "response: g outside [0,1]");
  return {0.0, 2 * g * std::sin(ka) / dispersion(ka, g)};
}

AmplitudeResult amplitude_direct_uniform(double ka, double omega, const Schedule& schedule,
                                         const ResponseOptions& opt) {
  check_ka(ka);
  SqrtQuadratic e = SqrtQuadratic::ising_mode(ka);
  const double sk = std::sin(ka);
  auto env = [&](auto g) { return 2 * g * decltype(g)(sk) / e.value(g); };
  AmplitudeResult r = integrate_sweep_any(env, PhaseSpec{e, e, 2, 0}, omega, schedule, opt);
  r.method = Method::quadrature;
  r.regime = classify_regime(omega, ka, opt.rho);
  r.ka = r.kpa = ka;
  r.omega = omega;
  return r;
}

SaddlePoints saddle_points_uniform(double omega, double ka) {
  check_ka(ka);
  double s = std::sin(ka / 2), c = std::cos(ka / 2);
  double disc = omega * omega - 16 * s * s;
  require(omega > 0 && disc >= 0, ErrorCode::complex_saddle,
          "saddle: omega below the mode gap, saddles are complex");
  require(disc > 0, ErrorCode::saddle_collision, "saddle: coalescing saddles");
  require(omega <= 4, ErrorCode::domain, "saddle: omega above 2 E_k(0), no saddle in [0,1]");
  double d = std::sqrt(disc) / (8 * c);
  return {0.5 - d, 0.5 + d};
}

AmplitudeResult amplitude_saddle_uniform(double omega, double ka, const Schedule& schedule) {
  require(schedule.is_monotone(), ErrorCode::domain, "saddle: frozen path");
  SaddlePoints sp = saddle_points_uniform(omega, ka);
  SqrtQuadratic e = SqrtQuadratic::ising_mode(ka);
  const double sk = std::sin(ka);
  const double c = std::cos(ka / 2);
  const double root = std::sqrt(omega * omega - 16 * std::sin(ka / 2) * std::sin(ka / 2));

  auto b = [&](double g) { return 2 * g * sk / (e.value(g) * schedule.rate_at(g)); };
  auto dpsi = [&](double g) { return (2 * e.value(g) - omega) / schedule.rate_at(g); };

  AmplitudeResult out;
  out.method = Method::saddle_point;
  out.regime = classify_regime(omega, ka);
  out.ka = out.kpa = ka;
  out.omega = omega;
  cd total = 0;
  const double h = std::min(1e-3, (sp.g_plus - sp.g_minus) / 8);
  for (int sign : {-1, 1}) {
    double g = sign < 0 ? sp.g_minus : sp.g_plus;
    // dE/dg at the saddle, positive after the transition.
    double dE = sign * 4 * c * root / omega;
    double rate = schedule.rate_at(g);
    double psi2 = 2 * dE / rate;
    double t = schedule.invert(g);
    double psi = -omega * t + 2 * schedule.phase_integral_g(ka, g);
    double mod = b(g) * std::sqrt(2 * kPi / std::fabs(psi2));
    total += std::polar(mod, psi + sign * kPi / 4);

    double gm2 = std::max(0.0, g - 2 * h), gp2 = std::min(1.0, g + 2 * h);
    double hh = std::min({h, (gp2 - g) / 2, (g - gm2) / 2});
    double p_m2 = dpsi(g - 2 * hh), p_m1 = dpsi(g - hh), p0 = dpsi(g), p_p1 = dpsi(g + hh),
           p_p2 = dpsi(g + 2 * hh);
    double psi3 = (p_p1 - 2 * p0 + p_m1) / (hh * hh);
    double psi4 = (p_p2 - 2 * p_p1 + 2 * p_m1 - p_m2) / (2 * hh * hh * hh);
    double b0 = b(g), b1 = (b(g + hh) - b(g - hh)) / (2 * hh);
    double b2 = (b(g + hh) - 2 * b0 + b(g - hh)) / (hh * hh);
    double score = std::fabs(b2 / (2 * b0 * psi2)) + std::fabs(b1 * psi3 / (2 * b0 * psi2 * psi2)) +
                   std::fabs(psi4 / (8 * psi2 * psi2)) +
                   std::fabs(5 * psi3 * psi3 / (24 * psi2 * psi2 * psi2));
    out.validity = std::max(out.validity, score);
  }
  out.value = total;
  return out;
}

double amplitude_bound_near_gap(double ka, const Schedule& schedule, double) {
  check_ka(ka);
  SqrtQuadratic e = SqrtQuadratic::ising_mode(ka);
  const double sk = std::fabs(std::sin(ka));
  return 2 * sk * sweep_integral([&](double g) { return g / e.value(g); }, schedule);
}

double nonuniform_coefficient(double ka, double kpa, double g) {
  check_ka(ka);
  check_ka(kpa);
  SqrtQuadratic e = SqrtQuadratic::ising_mode(ka);
  double c = std::cos(ka / 2);
  return 4 * g * std::sin(kpa) * std::sqrt(half_plus(e, c * c, g));
}

AmplitudeResult amplitude_direct_nonuniform(double ka, double kpa, double omega, int n_spins,
                                            const Schedule& schedule,
                                            const ResponseOptions& opt, bool pair_phase) {
  check_ka(ka);
  check_ka(kpa);
  ChainParams::make(n_spins);
  SqrtQuadratic ek = SqrtQuadratic::ising_mode(ka);
  SqrtQuadratic ep = SqrtQuadratic::ising_mode(kpa);
  const double ck2 = std::cos(ka / 2) * std::cos(ka / 2);
  const double cp2 = std::cos(kpa / 2) * std::cos(kpa / 2);
  const double sp = std::sin(kpa);
  auto env = [&](auto g) {
    using R = decltype(g);
    R Ep = ep.value(g);
    R alpha = 2 - 4 * g * R(cp2);
    R norm = num::sqrt(2 * Ep * Ep + 2 * alpha * Ep);
    return 4 * g * R(sp) * num::sqrt(half_plus(ek, ck2, g)) / norm;
  };
  PhaseSpec ph = pair_phase ? PhaseSpec{ek, ep, 1, 1} : PhaseSpec{ek, ek, 2, 0};
  AmplitudeResult r = integrate_sweep_any(env, ph, omega, schedule, opt);
  r.value *= cd(0, 1.0 / n_spins);
  r.quad_error /= n_spins;
  r.method = Method::quadrature;
  r.regime = classify_regime(omega, 0.5 * (std::fabs(ka) + std::fabs(kpa)), opt.rho);
  r.ka = ka;
  r.kpa = kpa;
  r.omega = omega;
  return r;
}

BitflipAmplitudes amplitude_bitflip(double ka, double omega, const Schedule& schedule,
                                    const ResponseOptions& opt) {
  check_ka(ka);
  SqrtQuadratic e = SqrtQuadratic::ising_mode(ka);
  const double c2 = std::cos(ka / 2) * std::cos(ka / 2);
  const double sk = std::sin(ka);
  auto xi = [&](auto g) {
    using R = decltype(g);
    R E = e.value(g);
    return 2 * g / num::sqrt(2 * E * E + 4 * (1 - 2 * g * R(c2)) * E);
  };
  auto env2 = [&](auto g) { return num::sqrt(half_plus(e, c2, g)); };

  BitflipAmplitudes out;
  const cd pre1 = cd(0, 1) * std::polar(1.0, -ka) * sk;
  out.first = integrate_sweep_any(xi, PhaseSpec{e, e, 0, 0}, omega, schedule, opt);
  out.first.value *= pre1;
  out.first.quad_error *= std::fabs(sk);
  if (schedule.is_monotone()) {
    // Pre-sweep window [-T, 0] with g continued linearly at the initial rate.
    const double r0 = schedule.rate_at(0.0);
    const double T = schedule.total_time();
    auto amp = [&](double g) { return Cx<double>{xi(g) / r0, 0.0}; };
    auto theta = [&](double g) { return -omega * g / r0; };
    AmplitudeResult tail = certified<double>(amp, theta, -r0 * T, 0.0, opt.rel_tol);
    out.first.tail = std::abs(tail.value * pre1);
  }
  out.second = integrate_sweep_any(env2, PhaseSpec{e, e, 2, 0}, omega, schedule, opt);
  out.second.value *= std::polar(1.0, ka);
  for (AmplitudeResult* r : {&out.first, &out.second}) {
    r->method = Method::quadrature;
    r->regime = classify_regime(omega, ka, opt.rho);
    r->ka = r->kpa = ka;
    r->omega = omega;
  }
  return out;
}

double bitflip_bound(double ka, const Schedule& schedule) {
  check_ka(ka);
  SqrtQuadratic e = SqrtQuadratic::ising_mode(ka);
  const double c2 = std::cos(ka / 2) * std::cos(ka / 2);
  return sweep_integral([&](double g) { return std::sqrt(half_plus(e, c2, g)); }, schedule);
}

namespace {

struct Window {
  Regime regime;
  double lo, hi;
};

std::vector<Window> windows_for(double ka, double rho) {
  RegimeBounds b = regime_bounds(ka, rho);
  constexpr double inf = std::numeric_limits<double>::infinity();
  return {{Regime::intermediate, b.near_gap_hi, b.intermediate_hi},
          {Regime::near_gap, b.sub_gap_hi, b.near_gap_hi},
          {Regime::sub_gap, 0.0, b.sub_gap_hi},
          {Regime::negative, -inf, 0.0}};
}

std::vector<double> probe_points(const Window& w, double ka, const std::vector<double>& grid) {
  std::vector<double> out;
  for (double x : grid)
    if (x >= w.lo && x < w.hi) out.push_back(x);
  if (!out.empty()) return out;
  double gap = 2 * std::fabs(ka);
  switch (w.regime) {
    case Regime::intermediate:
      if (w.hi > w.lo) out = {w.lo, std::sqrt(w.lo * w.hi), w.lo + 0.95 * (w.hi - w.lo)};
      break;
    case Regime::near_gap: out = {w.lo, std::clamp(gap, w.lo, w.hi), w.hi}; break;
    case Regime::sub_gap: out = {0.0, 0.5 * w.hi}; break;
    case Regime::negative: out = {-gap}; break;
  }
  return out;
}

// One term of the mode sum: an amplitude family indexed by omega.
struct ModeTerm {
  ChannelKind kind;
  double ka, kpa;
  double ka_gap;  // pair half-gap used for the regime windows
  double prefactor;
};

double quadrature_modulus(const ModeTerm& m, double omega, const Schedule& s, int n_spins,
                          int& nonconverged) {
  ResponseOptions opt;
  opt.rel_tol = 1e-5;
  switch (m.kind) {
    case ChannelKind::uniform_x: {
      AmplitudeResult r = amplitude_direct_uniform(m.ka, omega, s, opt);
      if (!r.converged) ++nonconverged;
      return r.modulus();
    }
    case ChannelKind::nonuniform_x: {
      AmplitudeResult r = amplitude_direct_nonuniform(m.ka, m.kpa, omega, n_spins, s, opt);
      if (!r.converged) ++nonconverged;
      return r.modulus() * n_spins;  // prefactor carried by the term
    }
    case ChannelKind::single_site_z: {
      BitflipAmplitudes b = amplitude_bitflip(m.ka, omega, s, opt);
      if (!b.first.converged || !b.second.converged) ++nonconverged;
      return b.first.modulus() + b.second.modulus();
    }
  }
  return 0;
}

double phase_free(const ModeTerm& m, const Schedule& s) {
  switch (m.kind) {
    case ChannelKind::uniform_x: return amplitude_bound_near_gap(m.ka, s);
    case ChannelKind::nonuniform_x:
      return sweep_integral(
          [&](double g) {
            double Ep = dispersion(m.kpa, g);
            double alpha = 2 - 4 * g * std::cos(m.kpa / 2) * std::cos(m.kpa / 2);
            return std::fabs(nonuniform_coefficient(m.ka, m.kpa, g)) /
                   std::sqrt(2 * Ep * Ep + 2 * alpha * Ep);
          },
          s);
    case ChannelKind::single_site_z: return bitflip_bound(m.ka, s);
  }
  return 0;
}

double asymptotic_modulus(const ModeTerm& m, const Window& w, double omega, const Schedule& s,
                          int n_spins, int& nonconverged, double& bound_cache) {
  const double T_eff = effective_time(s);
  const double k2 = m.ka_gap * m.ka_gap;
  switch (w.regime) {
    case Regime::intermediate:
      if (m.kind == ChannelKind::uniform_x && s.is_monotone()) {
        try {
          AmplitudeResult r = amplitude_saddle_uniform(omega, m.ka, s);
          if (r.usable()) return r.modulus();
        } catch (const Error& e) {
          if (e.code() != ErrorCode::saddle_collision && e.code() != ErrorCode::complex_saddle &&
              e.code() != ErrorCode::domain)
            throw;
        }
        return quadrature_modulus(m, omega, s, n_spins, nonconverged);
      }
      [[fallthrough]];
    case Regime::near_gap:
      if (bound_cache < 0) bound_cache = phase_free(m, s);
      return bound_cache;
    case Regime::sub_gap: return std::exp(-T_eff * k2 / 2);
    case Regime::negative: return std::exp(-kPi * T_eff * k2 / 16);
  }
  return 0;
}

}  // namespace

TotalError total_error(const Channel& channel, const Schedule& schedule,
                       const SpectralFunction& f, const std::vector<double>& modes,
                       const std::vector<double>& omega_grid, AmplitudeSource source,
                       double rho) {
  require(channel.lambda >= 0, ErrorCode::invalid_argument, "total_error: lambda < 0");
  TotalError out;
  out.regimes = {{Regime::intermediate}, {Regime::near_gap}, {Regime::sub_gap},
                 {Regime::negative}};
  if (f.is_zero() || channel.lambda == 0 || modes.empty()) return out;
  const int n_spins = schedule.n_spins() > 0 ? schedule.n_spins() : int(2 * modes.size());
  out.excluded_weight = f.window_weight(2.0, std::numeric_limits<double>::infinity());

  std::vector<ModeTerm> terms;
  for (double ka : modes) {
    check_ka(ka);
    switch (channel.kind) {
      case ChannelKind::uniform_x:
        terms.push_back({channel.kind, ka, ka, std::fabs(ka), 1.0});
        break;
      case ChannelKind::single_site_z:
        terms.push_back({channel.kind, ka, ka, std::fabs(ka), 1.0 / std::sqrt(double(n_spins))});
        break;
      case ChannelKind::nonuniform_x:
        for (double kpa : modes)
          terms.push_back({channel.kind, ka, kpa, 0.5 * (std::fabs(ka) + std::fabs(kpa)),
                           1.0 / n_spins});
        break;
    }
  }

  for (const ModeTerm& m : terms) {
    double mode_sum = 0;
    double bound_cache = -1;
    for (const Window& w : windows_for(m.ka_gap, rho)) {
      if (!(w.hi > w.lo)) continue;
      double weight = f.window_weight(w.lo, w.hi);
      if (weight == 0) continue;
      double amp = 0;
      for (double omega : probe_points(w, m.ka_gap, omega_grid)) {
        double a = source == AmplitudeSource::quadrature
                       ? quadrature_modulus(m, omega, schedule, n_spins, out.nonconverged)
                       : asymptotic_modulus(m, w, omega, schedule, n_spins, out.nonconverged,
                                            bound_cache);
        amp = std::max(amp, a);
      }
      amp *= m.prefactor;
      RegimeContribution& rc = out.regimes[std::size_t(w.regime)];
      rc.amplitude += amp;
      rc.weight += weight;
      rc.contribution += channel.lambda * amp * weight;
      mode_sum += amp * weight;
    }
    out.value += channel.lambda * mode_sum;
    out.probability += std::pow(channel.lambda * mode_sum, 2);
  }
  out.modes = int(terms.size());
  return out;
}

double decay_rate(const std::vector<double>& T, const std::vector<double>& modulus) {
  require(T.size() == modulus.size() && T.size() >= 2, ErrorCode::invalid_argument,
          "decay_rate: need matching samples");
  double n = double(T.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < T.size(); ++i) {
    require(modulus[i] > 0, ErrorCode::invalid_argument, "decay_rate: nonpositive modulus");
    double y = std::log(modulus[i]);
    sx += T[i];
    sy += y;
    sxx += T[i] * T[i];
    sxy += T[i] * y;
  }
  double den = n * sxx - sx * sx;
  require(den > 0, ErrorCode::invalid_argument, "decay_rate: degenerate T values");
  return -(n * sxy - sx * sy) / den;
}

}  // namespace qpd

#include "qpd/grover.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qpd/error.hpp"
#include "qpd/gauss.hpp"
#include "qpd/oscillatory.hpp"

namespace qpd {

namespace {

void check_dim(double dim) {
  require(dim >= 2 && std::isfinite(dim), ErrorCode::domain, "grover: D must be >= 2");
}

double gap_phase(const Schedule& s, const SqrtQuadratic& gap, double t) {
  switch (s.kind()) {
    case ScheduleKind::frozen: return gap.value(s.frozen_value()) * t;
    case ScheduleKind::linear: return s.total_time() * gap.integral(t / s.total_time());
    default: return s.phase_table(gap)(s.evaluate(t).g);
  }
}

}  // namespace

double GroverParams::dim() const { return std::ldexp(1.0, n_qubits); }

Schedule GroverParams::adapted_schedule(int n_qubits, int power, double T) {
  require(n_qubits >= 1 && n_qubits <= 60, ErrorCode::invalid_argument,
          "grover: N outside [1,60]");
  return Schedule::adapted_to_gap(SqrtQuadratic::grover_gap(std::ldexp(1.0, n_qubits)), power,
                                  T);
}

double grover_gap(double g, double dim) {
  check_dim(dim);
  require(g >= 0 && g <= 1, ErrorCode::domain, "grover: g outside [0,1]");
  return std::sqrt(1 - 4 * g * (1 - g) * (1 - 1 / dim));
}

std::complex<double> matrix_element_x(double g, double t, double dim, const Schedule& schedule) {
  double gap = grover_gap(g, dim);
  double phase = gap_phase(schedule, SqrtQuadratic::grover_gap(dim), t);
  return std::polar(-(1 - g) / (std::sqrt(dim) * gap), -phase);
}

std::complex<double> matrix_element_z(double g, double t, double dim, const Schedule& schedule,
                                      std::uint64_t marked, int site) {
  require(site >= 0 && site < 64, ErrorCode::invalid_argument, "grover: bad site");
  int bit = int((marked >> site) & 1);
  return (bit ? 1.0 : -1.0) * matrix_element_x(g, t, dim, schedule);
}

double channel_factor(const GroverParams& p) {
  require(p.n_qubits >= 1, ErrorCode::invalid_argument, "grover: N < 1");
  double mean = 0;
  for (int j = 0; j < p.n_qubits; ++j) mean += ((p.marked >> j) & 1) ? 1.0 : -1.0;
  mean /= p.n_qubits;
  const ChannelWeights& w = p.weights;
  return w.xx + (w.xz + w.zx) * mean + w.zz * mean * mean;
}

GroverIntegrand grover_time_integral(double omega, const GroverParams& p) {
  const double D = p.dim();
  check_dim(D);
  const Schedule& s = p.schedule;
  const SqrtQuadratic gap = SqrtQuadratic::grover_gap(D);
  const double norm = 1 / std::sqrt(D);
  const double T = s.total_time();
  OscResult<double> r1, r2;
  auto run = [&](const auto& amp, const auto& theta, double lo, double hi) {
    const auto& rule = gauss_legendre<double>(16);
    double scale = 0;
    for (int i = 0; i < 64; ++i)
      scale += integrate_fixed(rule, [&](double x) { return amp(x).abs(); },
                               lo + (hi - lo) * i / 64, lo + (hi - lo) * (i + 1) / 64);
    OscOptions<double> oo;
    double th_max = std::max({1.0, std::fabs(theta(lo)), std::fabs(theta(hi))});
    oo.abs_tol = std::max(1e-7 * scale, 4e-16 * scale * th_max);
    r1 = filon_integrate(amp, theta, lo, hi, oo);
    oo.abs_tol /= 16;
    oo.initial_panels *= 2;
    r2 = filon_integrate(amp, theta, lo, hi, oo);
  };
  if (s.kind() == ScheduleKind::frozen) {
    const double g0 = s.frozen_value();
    const double m = (1 - g0) * norm / gap.value(g0);
    const double rate = omega + gap.value(g0);
    run([&](double) { return Cx<double>{m, 0.0}; }, [&](double t) { return rate * t; }, 0.0, T);
  } else if (s.kind() == ScheduleKind::linear) {
    run([&](double g) { return Cx<double>{T * (1 - g) * norm / gap.value(g), 0.0}; },
        [&](double g) { return omega * T * g + T * gap.integral(g); }, 0.0, 1.0);
  } else {
    PhaseTable phase = s.phase_table(gap);
    run([&](double g) { return Cx<double>{(1 - g) * norm / (gap.value(g) * s.rate_at(g)), 0.0}; },
        [&](double g) { return omega * s.invert(std::clamp(g, 0.0, 1.0)) + phase(g); }, 0.0, 1.0);
  }
  GroverIntegrand out;
  double v2 = r2.value.norm(), v1 = r1.value.norm();
  out.value = v2;
  double err = (r2.value - r1.value).abs() + r2.tail;
  out.quad_error = 2 * std::sqrt(v2) * err + err * err;
  out.converged = !r2.capped && (v2 == 0 ? err == 0 : std::fabs(v2 - v1) <= 1e-4 * v2 + 1e-300);
  return out;
}

GroverError error_probability(const GroverParams& p, double omega_cap) {
  GroverError out;
  if (p.f.is_zero() || p.lambda == 0) return out;
  const double factor = channel_factor(p);
  CompensatedSum<double> atoms;
  for (const DiracAtom& a : p.f.atoms()) {
    GroverIntegrand gi = grover_time_integral(a.omega, p);
    if (!gi.converged) out.converged = false;
    atoms.add(a.weight * gi.value);
  }
  double continuous = 0;
  if (p.f.has_density()) {
    auto [lo, hi] = p.f.support_hint(omega_cap);
    if (hi > lo) {
      const auto& rule = gauss_legendre<double>(8);
      const double T = p.schedule.total_time();
      long panels = std::max<long>(16, long(std::ceil((hi - lo) * T / (4 * std::numbers::pi))));
      int bad = 0;
      auto composite = [&](long P) {
        CompensatedSum<double> acc;
        bad = 0;
        for (long i = 0; i < P; ++i) {
          double a = lo + (hi - lo) * double(i) / double(P);
          double b = lo + (hi - lo) * double(i + 1) / double(P);
          acc.add(integrate_fixed(rule,
                                  [&](double w) {
                                    double fw = p.f.evaluate(w);
                                    if (fw == 0) return 0.0;
                                    GroverIntegrand gi = grover_time_integral(w, p);
                                    if (!gi.converged) ++bad;
                                    return fw * gi.value;
                                  },
                                  a, b));
        }
        return acc.value();
      };
      double prev = composite(panels);
      out.converged = out.converged && true;
      for (int level = 0; level < 8; ++level) {
        panels *= 2;
        double next = composite(panels);
        out.rel_change = std::fabs(next - prev) / std::max(std::fabs(next), 1e-300);
        prev = next;
        if (out.rel_change < 1e-4) break;
      }
      continuous = prev;
      out.panels = int(panels);
      if (out.rel_change >= 1e-4 || bad > 0) out.converged = false;
    }
  }
  out.value = p.lambda * p.lambda * factor * (atoms.value() + continuous);
  return out;
}

double error_estimate(const GroverParams& p, double multiplier, bool mirror) {
  require(multiplier >= 0.5 && multiplier <= 2, ErrorCode::invalid_argument,
          "grover: multiplier outside [1/2, 2]");
  const double gmin = 1 / std::sqrt(p.dim());
  const double w = (mirror ? -1 : 1) * multiplier * gmin;
  return p.lambda * p.lambda * p.f.evaluate(w) / gmin;
}

}  // namespace qpd

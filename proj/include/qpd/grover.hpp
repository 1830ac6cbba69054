#pragma once

// Two-level treatment of the adiabatic Grover search. Frequencies use the
// bath convention of the thermal form: omega < 0 excites the system.

#include <complex>
#include <cstdint>
#include <vector>

#include "qpd/bath.hpp"
#include "qpd/schedule.hpp"

namespace qpd {

struct ChannelWeights {
  double xx = 1;
  double xz = 0;
  double zx = 0;
  double zz = 0;
};

struct GroverParams {
  int n_qubits = 8;
  std::uint64_t marked = 0;
  double lambda = 0.01;
  Schedule schedule = Schedule::linear(1.0);
  SpectralFunction f;
  ChannelWeights weights;

  double dim() const;
  // Schedule adapted to the Grover gap itself.
  static Schedule adapted_schedule(int n_qubits, int power, double T);
};

double grover_gap(double g, double dim);

// <w_perp| sx_j(t) |w> ~ -(1-g)/(sqrt(D) DeltaE) exp(-i int DeltaE).
std::complex<double> matrix_element_x(double g, double t, double dim, const Schedule& schedule);
// z channel: extra sign (-1)^(w_j + 1).
std::complex<double> matrix_element_z(double g, double t, double dim, const Schedule& schedule,
                                      std::uint64_t marked, int site);

// Effective spectral weight of the cross channels relative to f^xx.
double channel_factor(const GroverParams& p);

// |int_0^T M(t) exp(i omega t + i int DeltaE)|^2 for one frequency.
struct GroverIntegrand {
  double value = 0;
  double quad_error = 0;
  bool converged = true;
};
GroverIntegrand grover_time_integral(double omega, const GroverParams& p);

struct GroverError {
  double value = 0;
  double rel_change = 0;  // last omega-grid doubling
  int panels = 0;
  bool converged = true;
};

// lambda^2 int d omega f(omega) |time integral|^2 (atoms summed exactly).
// The omega integral is refined by doubling until the relative change is
// below 1e-4.
GroverError error_probability(const GroverParams& p, double omega_cap = 4.0);

// lambda^2 f(m DeltaE_min) / DeltaE_min with m in [1/2, 2]. With
// mirror = true the argument is -m DeltaE_min (the exciting side).
double error_estimate(const GroverParams& p, double multiplier = 1.0, bool mirror = false);

}  // namespace qpd

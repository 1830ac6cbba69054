#pragma once

// Transverse Ising ring H = -sum[(1-g) sx_j + g sz_j sz_{j+1}], periodic,
// in the even-parity sector (half-integer momenta).

#include <complex>
#include <vector>

#include "qpd/numeric.hpp"

namespace qpd {

class Schedule;

struct ChainParams {
  int n_spins = 0;

  // Throws invalid_argument unless n >= 2 and even.
  static ChainParams make(int n);
};

struct ModeCoefficients {
  double alpha = 0;
  double beta = 0;
};

struct BogoliubovPair {
  std::complex<double> u;
  std::complex<double> v;
};

struct ChainSpectrum {
  ChainParams params;
  double g = 0;
  std::vector<double> momenta;
  std::vector<double> energies;
  std::vector<BogoliubovPair> bogoliubov;  // phase-free, instantaneous
};

std::vector<double> momentum_grid(const ChainParams& params);

// Positive half of the grid: pi/N, 3pi/N, ... Each (k,-k) pair state once.
std::vector<double> positive_modes(const ChainParams& params);

double dispersion(double ka, double g);

template <class Real>
Real dispersion_t(Real ka, Real g) {
  Real c = num::cos(ka / 2);
  return 2 * num::sqrt(1 - 4 * g * (1 - g) * c * c);
}

ModeCoefficients mode_coefficients(double ka, double g);

// Phase-free coefficients ((alpha+E)/Nk, beta/Nk).
BogoliubovPair instantaneous_bogoliubov(double ka, double g);

// Instantaneous coefficients times exp(-i int_0^t E_k dt').
BogoliubovPair adiabatic_bogoliubov(double ka, const Schedule& schedule, double t);

ChainSpectrum chain_spectrum(const ChainParams& params, double g);

struct BogoliubovTrajectory {
  std::vector<double> t;
  std::vector<BogoliubovPair> uv;
  BogoliubovPair end;
  double step_error = 0;      // |endpoint(h) - endpoint(h/2)|
  double max_norm_error = 0;  // max_t ||u|^2+|v|^2-1|
  long steps = 0;
  bool converged = false;     // step_error < 1e-8
};

// RK4 on i u' = a u + b v, i v' = -a v + b u from the instantaneous ground
// state at g(0), which is (1,0) for every sweep starting at g=0.
// steps == 0 picks h close to 0.002. samples bounds the stored trajectory.
BogoliubovTrajectory integrate_bogoliubov(double ka, const Schedule& schedule,
                                          long steps = 0, int samples = 257);

// Distance between two normalized mode states up to a global phase,
// sqrt(2 - 2|<a|b>|). The adiabatic formula omits the O(gdot) phase
// correction, so the raw complex difference is not a useful mismatch.
double state_mismatch(const BogoliubovPair& a, const BogoliubovPair& b);

double ground_energy_analytic(const ChainParams& params, double g);

// Fundamental gap 2 E_{pi/N}(g).
double min_gap(const ChainParams& params, double g);
double global_min_gap(const ChainParams& params);

struct ExcitationResult {
  double probability = 0;
  double step_error = 0;
  bool converged = false;
};

ExcitationResult excitation_probability_mode(double ka, const Schedule& schedule,
                                             long steps = 0);

// Sudden quench g: 0 -> 1, overlap of (1,0) with the final excited mode.
double sudden_excitation_probability(double ka);

}  // namespace qpd

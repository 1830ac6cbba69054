#pragma once

// First-order response amplitudes of the Ising ring coupled to a bath.
// Amplitudes are reported per unit lambda. Frequencies follow the
// single-operator convention: omega > 0 is energy delivered to the system.

#include <complex>
#include <limits>
#include <string>
#include <vector>

namespace qpd {

class Schedule;
class SpectralFunction;

enum class ChannelKind { uniform_x, nonuniform_x, single_site_z };
enum class Regime { intermediate, near_gap, sub_gap, negative };
enum class Method { quadrature, saddle_point, phase_free_bound, contour_estimate };

const char* to_string(ChannelKind kind);
const char* to_string(Regime regime);
const char* to_string(Method method);
ChannelKind channel_kind_from_string(const std::string& name);

struct Channel {
  ChannelKind kind = ChannelKind::uniform_x;
  double lambda = 0;
  int site = 0;  // single_site_z only; amplitudes are site independent up to a phase
};

struct AmplitudeResult {
  std::complex<double> value;
  Method method = Method::quadrature;
  Regime regime = Regime::intermediate;
  double quad_error = 0;
  double tail = 0;            // separately reported pre-sweep window (bitflip term 1)
  bool converged = true;
  double validity = 0;        // saddle_point: correction / leading, > 1 means unusable
  double ka = 0;
  double kpa = 0;
  double omega = 0;

  double modulus() const { return std::abs(value); }
  bool usable() const { return converged && validity <= 1; }
};

struct RegimeBounds {
  double sub_gap_hi = 0;       // [0, sub_gap_hi) sub gap
  double near_gap_hi = 0;      // [sub_gap_hi, near_gap_hi] near gap
  double intermediate_hi = 2;  // (near_gap_hi, 2) intermediate
};

RegimeBounds regime_bounds(double ka, double rho = 3);
Regime classify_regime(double omega, double ka, double rho = 3);

struct ResponseOptions {
  double rel_tol = 1e-6;
  // __float128 arithmetic; available for linear and frozen paths only.
  bool extended = false;
  // Smooth turn-on/off s(g) = [erf((g-on)/w) - erf((g-off)/w)]/2. Removes the
  // endpoint contributions so that exponentially small bulk terms show.
  bool switching = false;
  double switch_on = 0.12;
  double switch_off = 0.88;
  double switch_width = 0.015;
  // Integrate only up to this time (NaN: whole sweep).
  double t_end = std::numeric_limits<double>::quiet_NaN();
  double rho = 3;
};

std::complex<double> matrix_element_uniform(double ka, double g);

// -i int dt [2ig sin(ka)/E_k] exp(i(-omega t + 2 int E_k)).
AmplitudeResult amplitude_direct_uniform(double ka, double omega, const Schedule& schedule,
                                         const ResponseOptions& opt = {});

struct SaddlePoints {
  double g_minus = 0;
  double g_plus = 0;
};

// Real roots of omega = 2 E_k(g). Throws complex_saddle below the gap,
// saddle_collision at the degenerate point and domain above omega = 4.
SaddlePoints saddle_points_uniform(double omega, double ka);

AmplitudeResult amplitude_saddle_uniform(double omega, double ka, const Schedule& schedule);

// Phase-free bound 2|sin(ka)| int_0^T g/E_k dt.
double amplitude_bound_near_gap(double ka, const Schedule& schedule, double omega = 0);

// (i/N) int dt [C_{k,k'}/N_{k'}] exp(i(-omega t + phase)). The printed phase
// is 2 int E_k; pair_phase uses int (E_k + E_k') instead.
AmplitudeResult amplitude_direct_nonuniform(double ka, double kpa, double omega, int n_spins,
                                            const Schedule& schedule,
                                            const ResponseOptions& opt = {},
                                            bool pair_phase = false);

double nonuniform_coefficient(double ka, double kpa, double g);

struct BitflipAmplitudes {
  AmplitudeResult first;   // i e^{-ika} sin(ka) int Xi e^{-i omega t}, tail in .tail
  AmplitudeResult second;  // e^{ika} int sqrt(1/2 + (1-2g cos^2)/E) e^{i(-omega t + 2 int E)}
};

// Per unit lambda / sqrt(N).
BitflipAmplitudes amplitude_bitflip(double ka, double omega, const Schedule& schedule,
                                    const ResponseOptions& opt = {});

// int_0^T sqrt(1/2 + (1-2g cos^2)/E_k) dt.
double bitflip_bound(double ka, const Schedule& schedule);

enum class AmplitudeSource {
  quadrature,  // direct quadrature in every regime
  asymptotic,  // saddle / phase-free bound / exponential forms
};

const char* to_string(AmplitudeSource source);

struct RegimeContribution {
  Regime regime = Regime::intermediate;
  double amplitude = 0;  // summed over modes, max over omega inside the window
  double weight = 0;     // summed over modes, int_window |f|
  double contribution = 0;
};

struct TotalError {
  double value = 0;        // lambda sum_modes sum_regimes amp * weight
  double probability = 0;  // sum_modes (lambda sum_regimes amp * weight)^2
  double excluded_weight = 0;  // int_{omega >= 2} |f|, outside the regime partition
  std::vector<RegimeContribution> regimes;  // intermediate, near_gap, sub_gap, negative
  int modes = 0;
  int nonconverged = 0;
};

// f uses the single-operator convention (mirror a thermal function first).
// modes: ka values (positive half grid for the pair channels). omega_grid:
// sample points for the max over each regime window; empty picks a default.
TotalError total_error(const Channel& channel, const Schedule& schedule,
                       const SpectralFunction& f, const std::vector<double>& modes,
                       const std::vector<double>& omega_grid = {},
                       AmplitudeSource source = AmplitudeSource::asymptotic,
                       double rho = 3);

// Slope of ln|A| against T from a least-squares line; used by the sub-gap and
// negative-frequency checks.
double decay_rate(const std::vector<double>& T, const std::vector<double>& modulus);

}  // namespace qpd

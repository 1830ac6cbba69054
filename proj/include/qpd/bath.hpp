#pragma once

// Bath spectral functions f(omega). Sign convention of the thermal form:
// omega > 0 is energy absorbed by the bath, f(-w) = exp(-beta w) f(w).

#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace qpd {

enum class BathKind { thermal_bosonic, tabulated, dirac_comb, composite };

const char* to_string(BathKind kind);

struct ThermalParams {
  double theta = 0.5;
  double omega_ph = 1.0;
  double epsilon = 1.0;
  double omega_c = std::numeric_limits<double>::infinity();
  double beta = std::numeric_limits<double>::infinity();

  bool operator==(const ThermalParams&) const = default;
};

// J(w) = 2 theta w_ph^(1-eps) w^eps exp(-w/w_c), w >= 0.
double spectral_density(const ThermalParams& p, double omega);

struct DiracAtom {
  double omega = 0;
  double weight = 0;
};

class SpectralFunction {
 public:
  SpectralFunction() = default;  // f == 0

  static SpectralFunction thermal_bosonic(const ThermalParams& p);
  // Strictly ascending omegas, nonnegative values. Monotone cubic, zero
  // outside the sampled range.
  static SpectralFunction tabulated(std::vector<std::pair<double, double>> samples);
  static SpectralFunction from_csv(std::istream& in);
  static SpectralFunction dirac_probe(double omega0, double weight);

  BathKind kind() const;
  bool is_zero() const { return parts_.empty() && atoms_.empty(); }

  // Continuous density at omega (atoms excluded).
  double evaluate(double omega) const;
  const std::vector<DiracAtom>& atoms() const { return atoms_; }
  bool has_density() const;

  // f(-omega): converts between the thermal convention and the
  // single-operator response convention where omega > 0 is delivered to
  // the system.
  SpectralFunction mirrored() const;
  SpectralFunction scaled(double factor) const;
  SpectralFunction operator+(const SpectralFunction& other) const;

  // int_lo^hi |f| including atoms in [lo, hi). Infinite limits allowed.
  double window_weight(double lo, double hi) const;

  // Interval outside which the density is below rel_tol of its scale.
  std::pair<double, double> support_hint(double cap, double rel_tol = 1e-16) const;

  const ThermalParams* thermal_params() const;

 private:
  struct Part {
    BathKind kind = BathKind::thermal_bosonic;
    ThermalParams thermal;
    std::vector<double> x, y, d;  // tabulated: knots, values, slopes
    double scale = 1;
    bool mirrored = false;
  };

  double part_value(const Part& part, double omega) const;

  std::vector<Part> parts_;
  std::vector<DiracAtom> atoms_;
};

}  // namespace qpd

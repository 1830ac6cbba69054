#pragma once

// Interpolation paths g(t) on [0,T].

#include <memory>
#include <string>
#include <vector>

#include "qpd/numeric.hpp"

namespace qpd {

enum class ScheduleKind { linear, gap_adapted, gap_squared_adapted, frozen };

const char* to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(const std::string& name);

enum class RuntimeModel { ising, grover };

// E(g) = A sqrt(s^2 + kappa^2 (1-2g)^2). Covers the Ising mode energy
// (A=2, s=|sin(ka/2)|, kappa=|cos(ka/2)|), the Ising gap (A=4 at ka=pi/N)
// and the Grover gap (A=1, s^2=1/D, kappa^2=1-1/D).
struct SqrtQuadratic {
  double A = 2;
  double s = 1;
  double kappa = 0;

  static SqrtQuadratic ising_mode(double ka);
  static SqrtQuadratic ising_gap(int n_spins);
  static SqrtQuadratic grover_gap(double dim);

  template <class Real>
  Real value(Real g) const {
    Real x = 1 - 2 * g;
    Real ss = Real(s), kk = Real(kappa);
    return Real(A) * num::sqrt(ss * ss + kk * kk * x * x);
  }

  // int_0^g E(g') dg'
  template <class Real>
  Real integral(Real g) const {
    return Real(A) / 2 * (antiderivative(Real(1)) - antiderivative(1 - 2 * g));
  }

  template <class Real>
  Real antiderivative(Real x) const {
    Real ss = Real(s), kk = Real(kappa);
    Real r = num::sqrt(ss * ss + kk * kk * x * x);
    if (kappa == 0) return x * r / 2;
    return x * r / 2 + ss * ss / (2 * kk) * num::asinh(kk * x / ss);
  }
};

struct SchedulePoint {
  double g = 0;
  double gdot = 0;
};

struct ScheduleSample {
  double t = 0;
  double g = 0;
  double gdot = 0;
};

class Schedule;

// int_0^{t(g)} E(g(t')) dt' as a function of g for one energy, read-only
// once built.
class PhaseTable {
 public:
  double operator()(double g) const;
  const SqrtQuadratic& energy() const { return energy_; }

 private:
  friend class Schedule;
  std::shared_ptr<const Schedule> schedule_;
  SqrtQuadratic energy_;
  std::vector<double> cumulative_;
};

class Schedule {
 public:
  static Schedule linear(double T);
  // gdot = c * DeltaE(g)^p with DeltaE the fundamental gap of an N ring.
  static Schedule gap_adapted(int n_spins, double T);
  static Schedule gap_squared_adapted(int n_spins, double T);
  // Diagnostic path holding g constant.
  static Schedule frozen(double g, double T);
  static Schedule make(ScheduleKind kind, int n_spins, double T);
  // gdot = c * gap(g)^p for any gap of the SqrtQuadratic form (p = 1, 2).
  static Schedule adapted_to_gap(const SqrtQuadratic& gap, int p, double T);

  ScheduleKind kind() const { return kind_; }
  double total_time() const { return T_; }
  int n_spins() const { return n_; }  // 0 unless built from an Ising ring
  const SqrtQuadratic& gap() const { return gap_; }
  int power() const { return p_; }
  double rate_constant() const { return c_; }
  double frozen_value() const { return frozen_g_; }
  bool is_monotone() const { return kind_ != ScheduleKind::frozen; }

  SchedulePoint evaluate(double t) const;
  double invert(double g) const;
  double rate_at(double g) const;           // gdot(g)
  double rate_derivative(double g) const;   // d gdot / dg

  double phase_integral(double ka, double t) const;    // int_0^t E_k dt'
  double phase_integral_g(double ka, double g) const;  // same, at t(g)

  PhaseTable phase_table(const SqrtQuadratic& energy) const;

  const std::vector<double>& knots() const;
  std::vector<ScheduleSample> tabulation(int count = 4097) const;

 private:
  friend class PhaseTable;

  struct Knots {
    std::vector<double> g;
    std::vector<double> t;
    std::vector<double> dtdg;
  };

  static Schedule adapted(int n_spins, double T, int p);
  double t_of_g(double g) const;
  double g_of_t(double t) const;

  ScheduleKind kind_ = ScheduleKind::linear;
  double T_ = 1;
  int n_ = 0;
  int p_ = 0;
  double c_ = 0;
  double frozen_g_ = 0;
  SqrtQuadratic gap_;
  std::shared_ptr<const Knots> knots_;
};

double ising_gap(int n_spins, double g);

// Order-of-magnitude run time 1/DeltaE_min^2 with the matrix element set to 1.
double runtime_estimate(RuntimeModel model, int n);

// Total time at which max_g gdot/DeltaE(g)^2 equals epsilon.
double adiabatic_runtime(ScheduleKind kind, int n_spins, double epsilon);
double adiabatic_runtime(const SqrtQuadratic& gap, ScheduleKind kind, double epsilon);

}  // namespace qpd

#include "qpd/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "qpd/error.hpp"
#include "qpd/gauss.hpp"

namespace qpd {

namespace {

constexpr int kBaseIntervals = 4096;
constexpr int kMaxDepth = 24;

// Cubic Hermite t(g) on [a,b] from end values and slopes.
double hermite(double a, double b, double ta, double tb, double da, double db,
               double g) {
  double h = b - a;
  double s = (g - a) / h;
  double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * ta + (s3 - 2 * s2 + s) * h * da +
         (-2 * s3 + 3 * s2) * tb + (s3 - s2) * h * db;
}

double hermite_slope(double a, double b, double ta, double tb, double da,
                     double db, double g) {
  double h = b - a;
  double s = (g - a) / h;
  double s2 = s * s;
  return ((6 * s2 - 6 * s) * ta + (3 * s2 - 4 * s + 1) * h * da +
          (-6 * s2 + 6 * s) * tb + (3 * s2 - 2 * s) * h * db) /
         h;
}

}  // namespace

const char* to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::linear: return "linear";
    case ScheduleKind::gap_adapted: return "gap_adapted";
    case ScheduleKind::gap_squared_adapted: return "gap_squared_adapted";
    case ScheduleKind::frozen: return "frozen";
  }
  return "?";
}

ScheduleKind schedule_kind_from_string(const std::string& name) {
  if (name == "linear") return ScheduleKind::linear;
  if (name == "gap_adapted") return ScheduleKind::gap_adapted;
  if (name == "gap_squared_adapted") return ScheduleKind::gap_squared_adapted;
  if (name == "frozen") return ScheduleKind::frozen;
  throw Error(ErrorCode::invalid_argument, "unknown schedule kind: " + name);
}

SqrtQuadratic SqrtQuadratic::ising_mode(double ka) {
  return {2.0, std::fabs(std::sin(ka / 2)), std::fabs(std::cos(ka / 2))};
}

SqrtQuadratic SqrtQuadratic::ising_gap(int n_spins) {
  double ka = std::numbers::pi / n_spins;
  return {4.0, std::sin(ka / 2), std::cos(ka / 2)};
}

SqrtQuadratic SqrtQuadratic::grover_gap(double dim) {
  return {1.0, std::sqrt(1.0 / dim), std::sqrt(1.0 - 1.0 / dim)};
}

Schedule Schedule::linear(double T) {
  require(T > 0 && std::isfinite(T), ErrorCode::invalid_argument,
          "schedule: T must be positive");
  Schedule s;
  s.kind_ = ScheduleKind::linear;
  s.T_ = T;
  s.c_ = 1.0 / T;
  return s;
}

Schedule Schedule::frozen(double g, double T) {
  require(T > 0 && std::isfinite(T), ErrorCode::invalid_argument,
          "schedule: T must be positive");
  require(g >= 0 && g <= 1, ErrorCode::domain, "schedule: g outside [0,1]");
  Schedule s;
  s.kind_ = ScheduleKind::frozen;
  s.T_ = T;
  s.frozen_g_ = g;
  return s;
}

Schedule Schedule::gap_adapted(int n_spins, double T) { return adapted(n_spins, T, 1); }

Schedule Schedule::gap_squared_adapted(int n_spins, double T) {
  return adapted(n_spins, T, 2);
}

Schedule Schedule::make(ScheduleKind kind, int n_spins, double T) {
  switch (kind) {
    case ScheduleKind::linear: return linear(T);
    case ScheduleKind::gap_adapted: return gap_adapted(n_spins, T);
    case ScheduleKind::gap_squared_adapted: return gap_squared_adapted(n_spins, T);
    case ScheduleKind::frozen: return frozen(0.0, T);
  }
  throw Error(ErrorCode::invalid_argument, "schedule: bad kind");
}

Schedule Schedule::adapted(int n_spins, double T, int p) {
  require(n_spins >= 2 && n_spins % 2 == 0, ErrorCode::invalid_argument,
          "schedule: adapted kinds need an even N >= 2");
  Schedule s = adapted_to_gap(SqrtQuadratic::ising_gap(n_spins), p, T);
  s.n_ = n_spins;
  return s;
}

Schedule Schedule::adapted_to_gap(const SqrtQuadratic& gap_function, int p, double T) {
  require(T > 0 && std::isfinite(T), ErrorCode::invalid_argument,
          "schedule: T must be positive");
  require(p == 1 || p == 2, ErrorCode::invalid_argument, "schedule: power must be 1 or 2");
  require(gap_function.A > 0 && gap_function.s > 0, ErrorCode::invalid_argument,
          "schedule: gap must stay positive");
  Schedule s;
  s.kind_ = p == 1 ? ScheduleKind::gap_adapted : ScheduleKind::gap_squared_adapted;
  s.T_ = T;
  s.p_ = p;
  s.gap_ = gap_function;

  const SqrtQuadratic gap = s.gap_;
  auto w = [&](double g) { return std::pow(gap.value(g), -p); };
  const auto& rule = gauss_legendre<double>(8);
  auto integral = [&](double a, double b) {
    return integrate_fixed(rule, w, a, b);
  };

  // Local tolerance in units of the integral; fixed up to scale after.
  double total_guess = 0;
  for (int i = 0; i < kBaseIntervals; ++i) {
    total_guess += integral(double(i) / kBaseIntervals, double(i + 1) / kBaseIntervals);
  }
  const double tol = 1e-13 * total_guess;

  std::vector<double> gs{0.0};
  std::vector<double> cum{0.0};
  std::function<void(double, double, double, int)> refine =
      [&](double a, double b, double I_ab, int depth) {
        double m = 0.5 * (a + b);
        double I_am = integral(a, m);
        double I_mb = integral(m, b);
        double herm = hermite(a, b, 0.0, I_ab, w(a), w(b), m);
        bool ok = std::fabs(herm - I_am) <= tol &&
                  std::fabs(I_am + I_mb - I_ab) <= tol;
        if (ok || depth >= kMaxDepth) {
          gs.push_back(b);
          cum.push_back(cum.back() + I_am + I_mb);
          return;
        }
        refine(a, m, I_am, depth + 1);
        refine(m, b, I_mb, depth + 1);
      };
  for (int i = 0; i < kBaseIntervals; ++i) {
    double a = double(i) / kBaseIntervals, b = double(i + 1) / kBaseIntervals;
    refine(a, b, integral(a, b), 0);
  }
  double total = cum.back();
  require(std::isfinite(total) && total > 0, ErrorCode::not_converged,
          "schedule: normalization integral failed");

  auto knots = std::make_shared<Knots>();
  knots->g = std::move(gs);
  knots->g.back() = 1.0;
  knots->t.resize(cum.size());
  knots->dtdg.resize(cum.size());
  for (std::size_t i = 0; i < cum.size(); ++i) {
    knots->t[i] = T * cum[i] / total;
    knots->dtdg[i] = T * w(knots->g[i]) / total;
  }
  knots->t.back() = T;
  s.c_ = total / T;
  s.knots_ = std::move(knots);
  return s;
}

const std::vector<double>& Schedule::knots() const {
  static const std::vector<double> empty;
  return knots_ ? knots_->g : empty;
}

double Schedule::rate_at(double g) const {
  switch (kind_) {
    case ScheduleKind::linear: return 1.0 / T_;
    case ScheduleKind::frozen: return 0.0;
    default: return c_ * std::pow(gap_.value(g), p_);
  }
}

double Schedule::rate_derivative(double g) const {
  if (kind_ == ScheduleKind::linear || kind_ == ScheduleKind::frozen) return 0.0;
  double x = 1 - 2 * g;
  double r = std::sqrt(gap_.s * gap_.s + gap_.kappa * gap_.kappa * x * x);
  double dE = -2 * gap_.A * gap_.kappa * gap_.kappa * x / r;
  return c_ * p_ * std::pow(gap_.value(g), p_ - 1) * dE;
}

double Schedule::t_of_g(double g) const {
  const auto& k = *knots_;
  auto it = std::upper_bound(k.g.begin(), k.g.end(), g);
  std::size_t i = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - k.g.begin(), 1),
                                        k.g.size() - 1);
  return hermite(k.g[i - 1], k.g[i], k.t[i - 1], k.t[i], k.dtdg[i - 1], k.dtdg[i], g);
}

double Schedule::g_of_t(double t) const {
  const auto& k = *knots_;
  auto it = std::upper_bound(k.t.begin(), k.t.end(), t);
  std::size_t i = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - k.t.begin(), 1),
                                        k.t.size() - 1);
  double a = k.g[i - 1], b = k.g[i];
  double ta = k.t[i - 1], tb = k.t[i], da = k.dtdg[i - 1], db = k.dtdg[i];
  // Safeguarded Newton on the monotone cubic.
  double lo = a, hi = b;
  double g = a + (b - a) * (t - ta) / (tb - ta);
  for (int it2 = 0; it2 < 100; ++it2) {
    double f = hermite(a, b, ta, tb, da, db, g) - t;
    if (f > 0) hi = g; else lo = g;
    double d = hermite_slope(a, b, ta, tb, da, db, g);
    double next = g - f / d;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - g) <= 1e-16 * std::max(1.0, std::fabs(g)) || hi - lo < 1e-17) {
      g = next;
      break;
    }
    g = next;
  }
  return std::clamp(g, 0.0, 1.0);
}

SchedulePoint Schedule::evaluate(double t) const {
  require(t >= 0 && t <= T_ * (1 + 1e-15), ErrorCode::domain,
          "schedule: t outside [0,T]");
  t = std::min(t, T_);
  switch (kind_) {
    case ScheduleKind::linear: return {t / T_, 1.0 / T_};
    case ScheduleKind::frozen: return {frozen_g_, 0.0};
    default: {
      if (t == 0) return {0.0, rate_at(0.0)};
      if (t == T_) return {1.0, rate_at(1.0)};
      double g = g_of_t(t);
      return {g, rate_at(g)};
    }
  }
}

double Schedule::invert(double g) const {
  require(g >= 0 && g <= 1, ErrorCode::domain, "schedule: g outside [0,1]");
  switch (kind_) {
    case ScheduleKind::linear: return g * T_;
    case ScheduleKind::frozen:
      throw Error(ErrorCode::domain, "schedule: frozen path has no inverse");
    default:
      if (g == 0) return 0.0;
      if (g == 1) return T_;
      return t_of_g(g);
  }
}

PhaseTable Schedule::phase_table(const SqrtQuadratic& energy) const {
  require(is_monotone(), ErrorCode::domain,
          "schedule: phase tables need a monotone path");
  PhaseTable table;
  table.schedule_ = std::make_shared<const Schedule>(*this);
  table.energy_ = energy;
  if (kind_ == ScheduleKind::linear) return table;
  const auto& k = *knots_;
  const auto& rule = gauss_legendre<double>(8);
  auto f = [&](double g) { return energy.value(g) / rate_at(g); };
  table.cumulative_.resize(k.g.size());
  CompensatedSum<double> acc;
  table.cumulative_[0] = 0.0;
  for (std::size_t i = 1; i < k.g.size(); ++i) {
    acc.add(integrate_fixed(rule, f, k.g[i - 1], k.g[i]));
    table.cumulative_[i] = acc.value();
  }
  return table;
}

double PhaseTable::operator()(double g) const {
  const Schedule& s = *schedule_;
  if (s.kind_ == ScheduleKind::linear) return s.T_ * energy_.integral(g);
  const auto& k = *s.knots_;
  auto it = std::upper_bound(k.g.begin(), k.g.end(), g);
  std::size_t i = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - k.g.begin(), 1),
                                        k.g.size() - 1);
  static const auto& rule = gauss_legendre<double>(8);
  auto f = [&](double x) { return energy_.value(x) / s.rate_at(x); };
  if (g == k.g[i - 1]) return cumulative_[i - 1];
  return cumulative_[i - 1] + integrate_fixed(rule, f, k.g[i - 1], g);
}

double Schedule::phase_integral_g(double ka, double g) const {
  require(g >= 0 && g <= 1, ErrorCode::domain, "schedule: g outside [0,1]");
  return phase_table(SqrtQuadratic::ising_mode(ka))(g);
}

double Schedule::phase_integral(double ka, double t) const {
  require(t >= 0 && t <= T_ * (1 + 1e-15), ErrorCode::domain,
          "schedule: t outside [0,T]");
  SqrtQuadratic e = SqrtQuadratic::ising_mode(ka);
  switch (kind_) {
    case ScheduleKind::frozen: return e.value(frozen_g_) * t;
    case ScheduleKind::linear: return T_ * e.integral(t / T_);
    default: return phase_table(e)(evaluate(t).g);
  }
}

std::vector<ScheduleSample> Schedule::tabulation(int count) const {
  require(count >= 2, ErrorCode::invalid_argument, "tabulation: count < 2");
  std::vector<ScheduleSample> out(count);
  for (int i = 0; i < count; ++i) {
    double t = T_ * i / (count - 1);
    auto p = evaluate(t);
    out[i] = {t, p.g, p.gdot};
  }
  return out;
}

double ising_gap(int n_spins, double g) {
  return SqrtQuadratic::ising_gap(n_spins).value(g);
}

double runtime_estimate(RuntimeModel model, int n) {
  require(n >= 2, ErrorCode::invalid_argument, "runtime_estimate: N < 2");
  if (model == RuntimeModel::ising) {
    double gap = 4 * std::sin(std::numbers::pi / (2.0 * n));
    return 1.0 / (gap * gap);
  }
  return std::ldexp(1.0, n);
}

double adiabatic_runtime(ScheduleKind kind, int n_spins, double epsilon) {
  require(epsilon > 0, ErrorCode::invalid_argument, "adiabatic_runtime: epsilon <= 0");
  require(n_spins >= 2 && n_spins % 2 == 0, ErrorCode::invalid_argument,
          "adiabatic_runtime: N must be even and >= 2");
  return adiabatic_runtime(SqrtQuadratic::ising_gap(n_spins), kind, epsilon);
}

double adiabatic_runtime(const SqrtQuadratic& gap, ScheduleKind kind, double epsilon) {
  require(epsilon > 0, ErrorCode::invalid_argument, "adiabatic_runtime: epsilon <= 0");
  require(gap.s > 0 && gap.kappa > 0, ErrorCode::invalid_argument,
          "adiabatic_runtime: degenerate gap function");
  double gmin = gap.A * gap.s;
  double r = gap.kappa / gap.s;
  switch (kind) {
    case ScheduleKind::linear: return 1.0 / (epsilon * gmin * gmin);
    case ScheduleKind::gap_adapted: {
      double I1 = std::asinh(r) / (gap.A * gap.kappa);
      return I1 / (epsilon * gmin);
    }
    case ScheduleKind::gap_squared_adapted: {
      double I2 = std::atan(r) / (gap.A * gap.A * gap.s * gap.kappa);
      return I2 / epsilon;
    }
    case ScheduleKind::frozen: break;
  }
  throw Error(ErrorCode::invalid_argument, "adiabatic_runtime: frozen path");
}

}  // namespace qpd

#include "qpd/bath.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "qpd/error.hpp"
#include "qpd/gauss.hpp"

namespace qpd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Shape-preserving slopes (Fritsch-Carlson / Fritsch-Butland with Brodlie
// weights, one-sided three-point ends).
std::vector<double> pchip_slopes(const std::vector<double>& x,
                                 const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> d(n, 0.0);
  if (n == 2) {
    d[0] = d[1] = (y[1] - y[0]) / (x[1] - x[0]);
    return d;
  }
  std::vector<double> h(n - 1), del(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = x[k + 1] - x[k];
    del[k] = (y[k + 1] - y[k]) / h[k];
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (del[k - 1] * del[k] <= 0) {
      d[k] = 0;
    } else {
      double w1 = 2 * h[k] + h[k - 1];
      double w2 = h[k] + 2 * h[k - 1];
      d[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
    }
  }
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double s = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (s * d0 <= 0) return 0.0;
    if (d0 * d1 < 0 && std::fabs(s) > 3 * std::fabs(d0)) return 3 * d0;
    return s;
  };
  d[0] = end_slope(h[0], h[1], del[0], del[1]);
  d[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
  return d;
}

double thermal_value(const ThermalParams& p, double omega) {
  if (omega == 0) {
    if (std::isinf(p.beta)) {
      // Theta(0) taken as 1/2; only the flat sub-ohmic eps=0 case is nonzero.
      return p.epsilon == 0 ? 0.5 * spectral_density(p, 0.0) : 0.0;
    }
    if (p.epsilon > 1) return 0.0;
    if (p.epsilon == 1) return 2 * p.theta / p.beta;
    throw Error(ErrorCode::divergent_at_zero,
                "bath: sub-ohmic spectral function diverges at omega=0 for finite beta");
  }
  double a = std::fabs(omega);
  double J = spectral_density(p, a);
  double n = std::isinf(p.beta) ? 0.0 : 1.0 / std::expm1(p.beta * a);
  return J * (n + (omega > 0 ? 1.0 : 0.0));
}

template <class F>
double integrate_piece(const F& f, double a, double b) {
  if (!(b > a)) return 0.0;
  if (std::isinf(a) && std::isinf(b)) {
    return integrate_piece(f, a, 0.0) + integrate_piece(f, 0.0, b);
  }
  if (std::isinf(b)) {
    boost::math::quadrature::exp_sinh<double> es;
    return es.integrate([&](double x) { return f(a + x); }, 1e-10);
  }
  if (std::isinf(a)) {
    boost::math::quadrature::exp_sinh<double> es;
    return es.integrate([&](double x) { return f(b - x); }, 1e-10);
  }
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate(f, a, b, 1e-10);
}

}  // namespace

const char* to_string(BathKind kind) {
  switch (kind) {
    case BathKind::thermal_bosonic: return "thermal_bosonic";
    case BathKind::tabulated: return "tabulated";
    case BathKind::dirac_comb: return "dirac_comb";
    case BathKind::composite: return "composite";
  }
  return "?";
}

double spectral_density(const ThermalParams& p, double omega) {
  require(omega >= 0, ErrorCode::domain, "spectral_density: negative omega");
  double cutoff = std::isinf(p.omega_c) ? 1.0 : std::exp(-omega / p.omega_c);
  double power = p.epsilon == 0 ? 1.0 : std::pow(omega, p.epsilon);
  return 2 * p.theta * std::pow(p.omega_ph, 1 - p.epsilon) * power * cutoff;
}

SpectralFunction SpectralFunction::thermal_bosonic(const ThermalParams& p) {
  require(p.theta >= 0 && p.omega_ph > 0 && p.epsilon >= 0 && p.omega_c > 0 &&
              p.beta > 0,
          ErrorCode::invalid_argument, "bath: invalid thermal parameters");
  SpectralFunction f;
  Part part;
  part.kind = BathKind::thermal_bosonic;
  part.thermal = p;
  f.parts_.push_back(part);
  return f;
}

SpectralFunction SpectralFunction::tabulated(
    std::vector<std::pair<double, double>> samples) {
  require(samples.size() >= 2, ErrorCode::invalid_argument,
          "bath: tabulated function needs at least two samples");
  Part part;
  part.kind = BathKind::tabulated;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    require(std::isfinite(samples[i].first) && std::isfinite(samples[i].second),
            ErrorCode::invalid_argument, "bath: non-finite sample");
    require(samples[i].second >= 0, ErrorCode::invalid_argument,
            "bath: negative sample value");
    if (i > 0)
      require(samples[i].first > samples[i - 1].first, ErrorCode::invalid_argument,
              "bath: sample omegas not strictly ascending");
    part.x.push_back(samples[i].first);
    part.y.push_back(samples[i].second);
  }
  part.d = pchip_slopes(part.x, part.y);
  SpectralFunction f;
  f.parts_.push_back(std::move(part));
  return f;
}

SpectralFunction SpectralFunction::from_csv(std::istream& in) {
  std::vector<std::pair<double, double>> samples;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double w, v;
    if (!(ss >> w >> v)) {
      require(first, ErrorCode::io, "bath: malformed CSV row: " + line);
      first = false;
      continue;  // header
    }
    first = false;
    samples.emplace_back(w, v);
  }
  return tabulated(std::move(samples));
}

SpectralFunction SpectralFunction::dirac_probe(double omega0, double weight) {
  require(std::isfinite(omega0), ErrorCode::invalid_argument, "bath: bad probe omega");
  require(weight > 0, ErrorCode::invalid_argument, "bath: probe weight must be positive");
  SpectralFunction f;
  f.atoms_.push_back({omega0, weight});
  return f;
}

BathKind SpectralFunction::kind() const {
  if (parts_.empty()) return BathKind::dirac_comb;
  if (parts_.size() == 1 && atoms_.empty()) return parts_[0].kind;
  return BathKind::composite;
}

bool SpectralFunction::has_density() const { return !parts_.empty(); }

double SpectralFunction::part_value(const Part& part, double omega) const {
  double w = part.mirrored ? -omega : omega;
  double v = 0;
  if (part.kind == BathKind::thermal_bosonic) {
    v = thermal_value(part.thermal, w);
  } else {
    const auto& x = part.x;
    if (w < x.front() || w > x.back()) return 0.0;
    auto it = std::upper_bound(x.begin(), x.end(), w);
    std::size_t i = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - x.begin(), 1),
                                          x.size() - 1);
    double h = x[i] - x[i - 1];
    double s = (w - x[i - 1]) / h;
    double s2 = s * s, s3 = s2 * s;
    v = (2 * s3 - 3 * s2 + 1) * part.y[i - 1] + (s3 - 2 * s2 + s) * h * part.d[i - 1] +
        (-2 * s3 + 3 * s2) * part.y[i] + (s3 - s2) * h * part.d[i];
    v = std::max(v, 0.0);
  }
  return part.scale * v;
}

double SpectralFunction::evaluate(double omega) const {
  double s = 0;
  for (const auto& p : parts_) s += part_value(p, omega);
  return s;
}

SpectralFunction SpectralFunction::mirrored() const {
  SpectralFunction f = *this;
  for (auto& p : f.parts_) p.mirrored = !p.mirrored;
  for (auto& a : f.atoms_) a.omega = -a.omega;
  return f;
}

SpectralFunction SpectralFunction::scaled(double factor) const {
  require(factor >= 0, ErrorCode::invalid_argument, "bath: negative scale");
  SpectralFunction f = *this;
  for (auto& p : f.parts_) p.scale *= factor;
  for (auto& a : f.atoms_) a.weight *= factor;
  return f;
}

SpectralFunction SpectralFunction::operator+(const SpectralFunction& other) const {
  SpectralFunction f = *this;
  f.parts_.insert(f.parts_.end(), other.parts_.begin(), other.parts_.end());
  f.atoms_.insert(f.atoms_.end(), other.atoms_.begin(), other.atoms_.end());
  return f;
}

const ThermalParams* SpectralFunction::thermal_params() const {
  if (parts_.size() == 1 && parts_[0].kind == BathKind::thermal_bosonic)
    return &parts_[0].thermal;
  return nullptr;
}

double SpectralFunction::window_weight(double lo, double hi) const {
  if (!(hi > lo)) return 0.0;
  double total = 0;
  for (const auto& a : atoms_)
    if (a.omega >= lo && a.omega < hi) total += a.weight;
  for (const auto& p : parts_) {
    auto f = [&](double w) { return w == 0 ? 0.0 : part_value(p, w); };
    if (p.kind == BathKind::tabulated) {
      // Exact for the cubic pieces.
      const auto& rule = gauss_legendre<double>(4);
      double a0 = p.mirrored ? -p.x.back() : p.x.front();
      double b0 = p.mirrored ? -p.x.front() : p.x.back();
      double a = std::max(lo, a0), b = std::min(hi, b0);
      if (!(b > a)) continue;
      std::vector<double> cuts{a};
      for (double x : p.x) {
        double xx = p.mirrored ? -x : x;
        if (xx > a && xx < b) cuts.push_back(xx);
      }
      cuts.push_back(b);
      std::sort(cuts.begin(), cuts.end());
      for (std::size_t i = 1; i < cuts.size(); ++i)
        total += integrate_fixed(rule, f, cuts[i - 1], cuts[i]);
    } else {
      if (lo < 0) total += integrate_piece(f, lo, std::min(hi, 0.0));
      if (hi > 0) total += integrate_piece(f, std::max(lo, 0.0), hi);
    }
  }
  return total;
}

std::pair<double, double> SpectralFunction::support_hint(double cap, double rel_tol) const {
  double lo = kInf, hi = -kInf;
  auto include = [&](double a, double b) {
    lo = std::min(lo, a);
    hi = std::max(hi, b);
  };
  for (const auto& a : atoms_) include(a.omega, a.omega);
  double decades = -std::log(rel_tol) + 5;
  for (const auto& p : parts_) {
    double a, b;
    if (p.kind == BathKind::tabulated) {
      a = p.x.front();
      b = p.x.back();
    } else {
      const auto& t = p.thermal;
      b = std::isinf(t.omega_c) ? cap : std::min(cap, decades * t.omega_c * (1 + t.epsilon));
      a = std::isinf(t.beta) ? 0.0 : -std::min(b, decades / t.beta);
    }
    if (p.mirrored) std::swap(a, b), a = -a, b = -b;
    include(std::max(a, -cap), std::min(b, cap));
  }
  if (lo > hi) return {0.0, 0.0};
  return {lo, hi};
}

}  // namespace qpd

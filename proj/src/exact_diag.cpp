#include "qpd/exact_diag.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <boost/math/tools/minima.hpp>

#include "qpd/error.hpp"
#include "qpd/lanczos.hpp"

namespace qpd {

namespace {

constexpr int kDenseMax = 10;

std::uint64_t mask_of(int n) { return (std::uint64_t(1) << n) - 1; }

// Sector embedding: column j of P is (|x_j> +- |~x_j>)/sqrt2 with x_j < ~x_j.
struct SectorMap {
  std::vector<std::uint64_t> reps;
  double sign = 1;
};

SectorMap sector_map(int n, Sector sector) {
  SectorMap m;
  m.sign = sector == Sector::odd ? -1.0 : 1.0;
  const std::uint64_t full = mask_of(n);
  for (std::uint64_t x = 0; x <= full; ++x)
    if (x < (x ^ full)) m.reps.push_back(x);
  return m;
}

class Operator {
 public:
  Operator(const SpinHamiltonian& h, Sector sector) : h_(h), sector_(sector) {
    if (sector != Sector::full) map_ = sector_map(h.n_qubits(), sector);
    buf_in_.resize(h.dim());
    buf_out_.resize(h.dim());
  }

  std::size_t dim() const { return sector_ == Sector::full ? h_.dim() : map_.reps.size(); }

  void apply(const double* x, double* y) {
    if (sector_ == Sector::full) return h_.apply(x, y);
    embed(x, buf_in_.data());
    h_.apply(buf_in_.data(), buf_out_.data());
    project(buf_out_.data(), y);
  }

  void embed(const double* x, double* full) const {
    const std::uint64_t m = mask_of(h_.n_qubits());
    std::fill(full, full + h_.dim(), 0.0);
    for (std::size_t j = 0; j < map_.reps.size(); ++j) {
      full[map_.reps[j]] = x[j] * M_SQRT1_2;
      full[map_.reps[j] ^ m] = map_.sign * x[j] * M_SQRT1_2;
    }
  }

  void project(const double* full, double* x) const {
    const std::uint64_t m = mask_of(h_.n_qubits());
    for (std::size_t j = 0; j < map_.reps.size(); ++j)
      x[j] = (full[map_.reps[j]] + map_.sign * full[map_.reps[j] ^ m]) * M_SQRT1_2;
  }

  Eigen::MatrixXd dense() {
    const std::size_t d = dim();
    Eigen::MatrixXd out(d, d);
    std::vector<double> e(d, 0.0), col(d);
    for (std::size_t j = 0; j < d; ++j) {
      e[j] = 1;
      apply(e.data(), col.data());
      e[j] = 0;
      for (std::size_t i = 0; i < d; ++i) out(i, j) = col[i];
    }
    return out;
  }

  Eigen::VectorXd to_full(const Eigen::VectorXd& v) const {
    if (sector_ == Sector::full) return v;
    Eigen::VectorXd out(h_.dim());
    embed(v.data(), out.data());
    return out;
  }

 private:
  const SpinHamiltonian& h_;
  Sector sector_;
  SectorMap map_;
  std::vector<double> buf_in_, buf_out_;
};

double residual(const SpinHamiltonian& h, const Eigen::VectorXd& v, double lambda) {
  Eigen::VectorXd hv(v.size());
  h.apply(v.data(), hv.data());
  return (hv - lambda * v).norm();
}

}  // namespace

const char* to_string(SpinModel model) {
  switch (model) {
    case SpinModel::ising_ring: return "ising_ring";
    case SpinModel::grover: return "grover";
    case SpinModel::mixed_grover_ising: return "mixed_grover_ising";
  }
  return "?";
}

SpinModel spin_model_from_string(const std::string& name) {
  for (SpinModel m : {SpinModel::ising_ring, SpinModel::grover, SpinModel::mixed_grover_ising})
    if (name == to_string(m)) return m;
  if (name == "ising") return SpinModel::ising_ring;
  if (name == "mixed") return SpinModel::mixed_grover_ising;
  throw Error(ErrorCode::config, "unknown model: " + name);
}

const char* to_string(Sector sector) {
  switch (sector) {
    case Sector::full: return "full";
    case Sector::even: return "even";
    case Sector::odd: return "odd";
  }
  return "?";
}

SpinHamiltonian build_hamiltonian(SpinModel model, int n, double g,
                                  std::optional<std::uint64_t> w) {
  require(n >= 2 && n <= 14, ErrorCode::invalid_argument,
          "exact_diag: N must lie in [2,14], got " + std::to_string(n));
  require(g >= 0 && g <= 1, ErrorCode::domain, "exact_diag: g outside [0,1]");
  require(!w || *w <= mask_of(n), ErrorCode::invalid_argument,
          "exact_diag: marked state does not fit in N bits");
  SpinHamiltonian h;
  h.model_ = model;
  h.n_ = n;
  h.g_ = g;
  h.w_ = w.value_or(0);
  return h;
}

double SpinHamiltonian::diagonal(std::uint64_t s) const {
  // Number of antiparallel bonds on the ring.
  const std::uint64_t rot = ((s >> 1) | ((s & 1) << (n_ - 1))) & mask_of(n_);
  const int anti = std::popcount(s ^ rot);
  switch (model_) {
    case SpinModel::ising_ring: return -g_ * (n_ - 2 * anti);
    case SpinModel::grover: return (1 - g_) + g_ * (s == w_ ? 0.0 : 1.0);
    case SpinModel::mixed_grover_ising: return (1 - g_) + g_ * anti;
  }
  return 0;
}

void SpinHamiltonian::apply(const double* x, double* y) const {
  const std::size_t d = dim();
  if (model_ == SpinModel::ising_ring) {
    const double field = -(1 - g_);
    for (std::uint64_t s = 0; s < d; ++s) {
      double acc = diagonal(s) * x[s];
      if (field != 0)
        for (int j = 0; j < n_; ++j) acc += field * x[s ^ (std::uint64_t(1) << j)];
      y[s] = acc;
    }
    return;
  }
  // 1 - |in><in| has <in|x> = sum x / sqrt(D).
  double sum = 0;
  for (std::size_t s = 0; s < d; ++s) sum += x[s];
  const double proj = (1 - g_) * sum / double(d);
  for (std::uint64_t s = 0; s < d; ++s) y[s] = diagonal(s) * x[s] - proj;
}

Eigen::MatrixXd SpinHamiltonian::dense() const {
  const std::size_t d = dim();
  Eigen::MatrixXd out(d, d);
  std::vector<double> e(d, 0.0), col(d);
  for (std::size_t j = 0; j < d; ++j) {
    e[j] = 1;
    apply(e.data(), col.data());
    e[j] = 0;
    for (std::size_t i = 0; i < d; ++i) out(i, j) = col[i];
  }
  return out;
}

LowSpectrum low_spectrum(const SpinHamiltonian& h, int m, bool vectors, Sector sector) {
  require(sector == Sector::full || h.parity_symmetric(), ErrorCode::no_symmetry,
          "exact_diag: parity sectors need a bitflip-symmetric model");
  Operator op(h, sector);
  const std::size_t d = op.dim();
  require(m >= 1 && std::size_t(m) <= d, ErrorCode::invalid_argument,
          "exact_diag: m outside [1, dim]");
  LowSpectrum out;
  Eigen::MatrixXd vecs(h.dim(), m);
  if (h.n_qubits() <= kDenseMax) {
    Eigen::MatrixXd H = op.dense();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    require(es.info() == Eigen::Success, ErrorCode::not_converged,
            "exact_diag: dense eigensolver failed");
    for (int i = 0; i < m; ++i) {
      out.eigenvalues.push_back(es.eigenvalues()(i));
      vecs.col(i) = op.to_full(es.eigenvectors().col(i));
    }
  } else {
    out.iterative = true;
    LanczosResult lr = lanczos_lowest(
        [&](const double* x, double* y) { op.apply(x, y); }, d, m);
    for (int i = 0; i < m; ++i) {
      out.eigenvalues.push_back(lr.values[i]);
      vecs.col(i) = op.to_full(lr.vectors.col(i));
    }
  }
  for (int i = 0; i < m; ++i) {
    double r = residual(h, vecs.col(i), out.eigenvalues[i]);
    out.residuals.push_back(r);
    if (!(r < 1e-8)) out.converged = false;
  }
  require(out.converged, ErrorCode::not_converged,
          "exact_diag: residual above 1e-8 after the iteration cap");
  if (sector != Sector::full) out.parity.assign(m, sector == Sector::even ? 1 : -1);
  if (vectors) out.eigenvectors = std::move(vecs);
  return out;
}

std::vector<int> parity_resolve(const SpinHamiltonian& h, LowSpectrum& spectrum) {
  require(h.parity_symmetric(), ErrorCode::no_symmetry,
          "parity: model does not commute with the global bitflip");
  Eigen::MatrixXd& V = spectrum.eigenvectors;
  const int m = int(spectrum.eigenvalues.size());
  require(V.cols() == m && std::size_t(V.rows()) == h.dim(), ErrorCode::invalid_argument,
          "parity: eigenvectors required");
  const std::uint64_t mask = mask_of(h.n_qubits());
  auto flip = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd out(v.size());
    for (std::uint64_t s = 0; s < std::uint64_t(v.size()); ++s) out[s] = v[s ^ mask];
    return out;
  };
  std::vector<int> labels(m, 0);
  int i = 0;
  while (i < m) {
    int j = i + 1;
    const double tol = 1e-8 * std::max(1.0, std::fabs(spectrum.eigenvalues[i]));
    while (j < m && spectrum.eigenvalues[j] - spectrum.eigenvalues[j - 1] < tol) ++j;
    const int k = j - i;
    Eigen::MatrixXd block = V.middleCols(i, k);
    Eigen::MatrixXd X(k, k);
    for (int b = 0; b < k; ++b) X.col(b) = block.transpose() * flip(block.col(b));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (X + X.transpose()));
    V.middleCols(i, k) = block * es.eigenvectors();
    for (int b = 0; b < k; ++b) {
      double p = es.eigenvalues()(b);
      require(std::fabs(std::fabs(p) - 1) < 1e-8, ErrorCode::no_symmetry,
              "parity: cluster is not closed under the bitflip");
      labels[i + b] = p > 0 ? 1 : -1;
    }
    i = j;
  }
  spectrum.parity = labels;
  return labels;
}

Sector physical_sector(SpinModel model) {
  return model == SpinModel::grover ? Sector::full : Sector::even;
}

double ground_energy(SpinModel model, int n, double g, Sector sector) {
  return low_spectrum(build_hamiltonian(model, n, g), 1, false, sector).eigenvalues[0];
}

double spectral_gap(SpinModel model, int n, double g, Sector sector) {
  LowSpectrum s = low_spectrum(build_hamiltonian(model, n, g), 2, false, sector);
  return s.eigenvalues[1] - s.eigenvalues[0];
}

GapMinimum minimum_gap(SpinModel model, int n, Sector sector, int coarse) {
  require(coarse >= 3, ErrorCode::invalid_argument, "minimum_gap: coarse grid too small");
  std::vector<double> gaps(coarse);
  for (int i = 0; i < coarse; ++i) gaps[i] = spectral_gap(model, n, double(i) / (coarse - 1), sector);
  int best = int(std::min_element(gaps.begin(), gaps.end()) - gaps.begin());
  double lo = double(std::max(best - 1, 0)) / (coarse - 1);
  double hi = double(std::min(best + 1, coarse - 1)) / (coarse - 1);
  boost::uintmax_t iters = 200;
  auto r = boost::math::tools::brent_find_minima(
      [&](double g) { return spectral_gap(model, n, g, sector); }, lo, hi, 40, iters);
  GapMinimum out{r.first, r.second};
  if (gaps[best] < out.gap) out = {double(best) / (coarse - 1), gaps[best]};
  return out;
}

EnergyDerivatives energy_derivatives(SpinModel model, int n, const std::vector<double>& g_grid,
                                     double h, double tol) {
  require(!g_grid.empty(), ErrorCode::invalid_argument, "derivatives: empty grid");
  require(h > 0 && h <= 0.1, ErrorCode::invalid_argument, "derivatives: bad step");
  const Sector sector = physical_sector(model);
  EnergyDerivatives out;
  auto E = [&](double g) { return ground_energy(model, n, std::clamp(g, 0.0, 1.0), sector); };
  for (double g : g_grid) {
    require(g - h >= 0 && g + h <= 1, ErrorCode::domain,
            "derivatives: g +- h must stay inside [0,1]");
    double e0 = E(g);
    double ep = E(g + h), em = E(g - h), ep2 = E(g + h / 2), em2 = E(g - h / 2);
    double d1h = (ep - em) / (2 * h), d1h2 = (ep2 - em2) / h;
    double d2h = (ep - 2 * e0 + em) / (h * h), d2h2 = (ep2 - 2 * e0 + em2) / (h * h / 4);
    out.g.push_back(g);
    out.energy.push_back(e0);
    out.first.push_back((4 * d1h2 - d1h) / 3);
    out.second.push_back((4 * d2h2 - d2h) / 3);
    double r1 = std::fabs(d1h - d1h2) / std::max(1.0, std::fabs(d1h2));
    double r2 = std::fabs(d2h - d2h2) / std::max(1.0, std::fabs(d2h2));
    out.max_richardson = std::max({out.max_richardson, r1, r2});
  }
  out.converged = out.max_richardson <= tol;
  return out;
}

FitResult mixed_gap_scaling(const std::vector<int>& n_list, SpinModel model) {
  require(n_list.size() >= 2, ErrorCode::invalid_argument, "gap scaling: need >= 2 sizes");
  std::vector<double> xs, ys;
  for (int n : n_list) {
    require(n >= 2 && n <= 14 && n % 2 == 0, ErrorCode::invalid_argument,
            "gap scaling: N must be even in [2,14]");
    GapMinimum gm = minimum_gap(model, n, physical_sector(model));
    if (!ys.empty())
      require(gm.gap < std::exp(ys.back()), ErrorCode::fit_failure,
              "gap scaling: minimum gap not decreasing in N");
    xs.push_back(n);
    ys.push_back(std::log(gm.gap));
  }
  FitResult r = fit_linear(xs, ys);
  r.model = FitModel::exponential;
  r.prefactor = std::exp(r.intercept);
  return r;
}

}  // namespace qpd

#pragma once

// Brute-force spectra of the spin models on the full 2^N space.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qpd/fit.hpp"

namespace qpd {

enum class SpinModel { ising_ring, grover, mixed_grover_ising };

const char* to_string(SpinModel model);
SpinModel spin_model_from_string(const std::string& name);

// Ising:  -sum_j [(1-g) sx_j + g sz_j sz_{j+1}], periodic.
// Grover: (1-g)(1 - |in><in|) + g(1 - |w><w|).
// Mixed:  (1-g)(1 - |in><in|) + (g/2) sum_j (1 - sz_j sz_{j+1}), periodic.
class SpinHamiltonian {
 public:
  SpinModel model() const { return model_; }
  int n_qubits() const { return n_; }
  double g() const { return g_; }
  std::uint64_t marked_state() const { return w_; }
  std::size_t dim() const { return std::size_t(1) << n_; }
  bool parity_symmetric() const { return model_ != SpinModel::grover; }

  // y = H x
  void apply(const double* x, double* y) const;
  Eigen::MatrixXd dense() const;

 private:
  friend SpinHamiltonian build_hamiltonian(SpinModel, int, double, std::optional<std::uint64_t>);
  double diagonal(std::uint64_t s) const;

  SpinModel model_ = SpinModel::ising_ring;
  int n_ = 2;
  double g_ = 0;
  std::uint64_t w_ = 0;
};

// 2 <= N <= 14, g in [0,1]. w defaults to 0...0 and must fit in N bits.
SpinHamiltonian build_hamiltonian(SpinModel model, int n, double g,
                                  std::optional<std::uint64_t> w = std::nullopt);

// Bitflip-parity sectors spanned by (|x> +- |~x>)/sqrt2.
enum class Sector { full, even, odd };

const char* to_string(Sector sector);

struct LowSpectrum {
  std::vector<double> eigenvalues;  // ascending
  Eigen::MatrixXd eigenvectors;     // columns in the full basis, when requested
  std::vector<int> parity;          // +-1 per state, empty when undefined
  std::vector<double> residuals;    // ||Hx - lambda x||
  bool iterative = false;
  bool converged = true;
};

// m lowest eigenpairs. Dense solve for N <= 10, deflated Lanczos with full
// reorthogonalization above. Throws not_converged if a residual stays above
// 1e-8 after the iteration cap.
LowSpectrum low_spectrum(const SpinHamiltonian& h, int m, bool vectors = false,
                         Sector sector = Sector::full);

// <X^N> per eigenvector after rotating degenerate clusters so that X^N is
// diagonal inside each. Needs eigenvectors; throws no_symmetry for models
// without the bitflip symmetry.
std::vector<int> parity_resolve(const SpinHamiltonian& h, LowSpectrum& spectrum);

// Sector in which the sweep starts; the whole path stays there.
Sector physical_sector(SpinModel model);

double ground_energy(SpinModel model, int n, double g, Sector sector);
double spectral_gap(SpinModel model, int n, double g, Sector sector);

struct GapMinimum {
  double g = 0;
  double gap = 0;
};

// Coarse grid followed by Brent refinement.
GapMinimum minimum_gap(SpinModel model, int n, Sector sector, int coarse = 41);

struct EnergyDerivatives {
  std::vector<double> g;
  std::vector<double> energy;
  std::vector<double> first;   // dE0/dg
  std::vector<double> second;  // d2E0/dg2
  double max_richardson = 0;   // max |D(h) - D(h/2)| over both orders, relative
  bool converged = true;
};

// Central differences with step h, Richardson-extrapolated against h/2.
EnergyDerivatives energy_derivatives(SpinModel model, int n, const std::vector<double>& g_grid,
                                     double h = 1e-3, double tol = 1e-3);

// ln DeltaE_min(N) = c0 - c1 N, returned as an exponential fit: exponent is
// -c1, prefactor exp(c0). Throws fit_failure when DeltaE_min is not strictly
// decreasing in N.
FitResult mixed_gap_scaling(const std::vector<int>& n_list,
                            SpinModel model = SpinModel::mixed_grover_ising);

}  // namespace qpd

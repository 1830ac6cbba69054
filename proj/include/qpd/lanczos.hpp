#pragma once

// Lowest eigenpairs of a symmetric operator given only its action.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace qpd {

using LinearOperator = std::function<void(const double*, double*)>;

struct LanczosOptions {
  int max_basis = 300;     // Krylov dimension per run
  int max_restarts = 20;   // per eigenpair
  double tol = 1e-10;      // residual target, relative to max(1, |lambda|)
  std::uint64_t seed = 0x5eed;
};

struct LanczosResult {
  std::vector<double> values;  // ascending
  Eigen::MatrixXd vectors;
  std::vector<double> residuals;
  bool converged = true;
};

// One Ritz pair per run, each run restricted to the orthogonal complement of
// the pairs already locked; the run restarts from its best Ritz vector until
// the residual target is met.
LanczosResult lanczos_lowest(const LinearOperator& op, std::size_t dim, int count,
                             const LanczosOptions& opt = {});

}  // namespace qpd

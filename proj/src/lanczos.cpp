#include "qpd/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "qpd/error.hpp"

namespace qpd {

namespace {

void deflate(Eigen::Ref<Eigen::VectorXd> v, const Eigen::MatrixXd& locked, int n_locked) {
  for (int pass = 0; pass < 2; ++pass)
    for (int i = 0; i < n_locked; ++i) v -= locked.col(i).dot(v) * locked.col(i);
}

struct Ritz {
  double value = 0;
  Eigen::VectorXd vector;
  double residual_estimate = 0;
};

// Ritz pair of the leading (m x m) block of the tridiagonal (alpha, beta).
Ritz lowest_ritz(const std::vector<double>& alpha, const std::vector<double>& beta, int m) {
  Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m);
  Eigen::VectorXd e(std::max(m - 1, 0));
  for (int i = 0; i + 1 < m; ++i) e[i] = beta[i];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
  Ritz r;
  r.value = es.eigenvalues()(0);
  r.vector = es.eigenvectors().col(0);
  r.residual_estimate = std::fabs(beta[m - 1] * r.vector[m - 1]);
  return r;
}

}  // namespace

LanczosResult lanczos_lowest(const LinearOperator& op, std::size_t dim, int count,
                             const LanczosOptions& opt) {
  require(count >= 1 && std::size_t(count) <= dim, ErrorCode::invalid_argument,
          "lanczos: count outside [1, dim]");
  const Eigen::Index n = Eigen::Index(dim);
  LanczosResult out;
  out.vectors.resize(n, count);
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd w(n);

  for (int k = 0; k < count; ++k) {
    const int basis = int(std::min<std::size_t>(std::size_t(opt.max_basis), dim - k));
    Eigen::MatrixXd Q(n, basis + 1);
    Eigen::VectorXd start(n);
    for (Eigen::Index i = 0; i < n; ++i) start[i] = normal(rng);
    Ritz best;
    double best_residual = std::numeric_limits<double>::infinity();
    bool done = false;
    for (int restart = 0; restart <= opt.max_restarts && !done; ++restart) {
      deflate(start, out.vectors, k);
      double nrm = start.norm();
      require(nrm > 0, ErrorCode::not_converged, "lanczos: start vector vanished");
      Q.col(0) = start / nrm;
      std::vector<double> alpha, beta;
      int m = 0;
      for (int j = 0; j < basis; ++j) {
        op(Q.col(j).data(), w.data());
        deflate(w, out.vectors, k);
        double a = Q.col(j).dot(w);
        alpha.push_back(a);
        w -= a * Q.col(j);
        if (j > 0) w -= beta[j - 1] * Q.col(j - 1);
        for (int pass = 0; pass < 2; ++pass)
          w -= Q.leftCols(j + 1) * (Q.leftCols(j + 1).transpose() * w);
        deflate(w, out.vectors, k);
        double b = w.norm();
        beta.push_back(b);
        m = j + 1;
        bool invariant = b < 1e-13 * std::max(1.0, std::fabs(a));
        if (invariant || m % 10 == 0 || m == basis) {
          Ritz r = lowest_ritz(alpha, beta, m);
          if (invariant || r.residual_estimate < 0.1 * opt.tol * std::max(1.0, std::fabs(r.value)))
            break;
        }
        Q.col(j + 1) = w / b;
      }
      best = lowest_ritz(alpha, beta, m);
      Eigen::VectorXd x = Q.leftCols(m) * best.vector;
      deflate(x, out.vectors, k);
      x.normalize();
      op(x.data(), w.data());
      double theta = x.dot(w);
      double res = (w - theta * x).norm();
      best.value = theta;
      best.vector = x;
      best_residual = res;
      done = res < opt.tol * std::max(1.0, std::fabs(theta));
      start = x;
    }
    out.vectors.col(k) = best.vector;
    out.values.push_back(best.value);
    out.residuals.push_back(best_residual);
    if (!done) out.converged = false;
  }
  // Deflation order is ascending up to rounding; sort to be safe.
  std::vector<int> idx(count);
  for (int i = 0; i < count; ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return out.values[a] < out.values[b]; });
  LanczosResult sorted;
  sorted.converged = out.converged;
  sorted.vectors.resize(n, count);
  for (int i = 0; i < count; ++i) {
    sorted.values.push_back(out.values[idx[i]]);
    sorted.residuals.push_back(out.residuals[idx[i]]);
    sorted.vectors.col(i) = out.vectors.col(idx[i]);
  }
  return sorted;
}

}  // namespace qpd

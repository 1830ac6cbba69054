#pragma once

// Ordinary least squares on transformed coordinates.

#include <string>
#include <vector>

namespace qpd {

enum class FitModel { power_law, exponential, linear };

const char* to_string(FitModel model);

struct FitResult {
  FitModel model = FitModel::linear;
  double exponent = 0;   // slope; power-law exponent; exponential rate
  double prefactor = 0;  // intercept (linear) or exp(intercept)
  double intercept = 0;  // in the transformed coordinates
  double r2 = 0;
  std::vector<double> residuals;  // transformed coordinates
  double x_lo = 0;
  double x_hi = 0;
};

// y = a + b x
FitResult fit_linear(const std::vector<double>& xs, const std::vector<double>& ys);
// y = A x^b, log-log. Power-law and exponential fits need >= 4 points.
FitResult fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys);
// y = A exp(b x), semilog
FitResult fit_exponential(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace qpd

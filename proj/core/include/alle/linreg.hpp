#pragma once

#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "alle/matrix.hpp"

namespace alle {

/// Ordinary least squares fit Y = a0 + sum_k a_k X(k) + e with an overall F-test.
struct LinearModel {
  double intercept = 0.0;
  std::vector<double> coefficients;
  std::vector<double> residuals;  ///< training residuals (empty after reload)
  std::size_t n = 0;
  double sse = 0.0;
  double ssr = 0.0;
  double sst = 0.0;
  double r_squared = 0.0;
  double f_statistic = 0.0;  ///< +inf for an exact fit
  double p_value = 1.0;
  double alpha_level = 0.05;
  bool reject_null = false;  ///< true when not all slopes are zero at alpha_level

  double predict(std::span<const double> x) const;
};

/// Least squares through a column-pivoted Householder QR of [1 X], with one
/// step of iterative refinement. Requires n > M + 1. Throws SingularityError
/// naming the dependent columns when the design is rank deficient.
LinearModel fit_linreg(const FeatureMatrix& x, std::span<const double> y, double alpha_level = 0.05);

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double regularized_incomplete_beta(double a, double b, double x);

/// P(F > f) for an F(d1, d2) variate.
double f_survival(double f, double d1, double d2);

void to_json(nlohmann::json& j, const LinearModel& model);
void from_json(const nlohmann::json& j, LinearModel& model);

}  // namespace alle

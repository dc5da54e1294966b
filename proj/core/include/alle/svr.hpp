#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "alle/error.hpp"
#include "alle/matrix.hpp"
#include "alle/standardizer.hpp"

namespace alle {

struct SvrParams {
  double c_box = 1.0;
  double eps_tube = 0.1;
  double gamma = 0.0;  ///< 0 selects 1 / (M * mean standardized feature variance)
  double tol = 1e-3;   ///< stop when the maximal KKT violation falls below this
  std::size_t max_iterations = 10'000'000;
  std::size_t cache_bytes = std::size_t{256} << 20;
};

/// Fitted epsilon-SVR with RBF kernel: f(x) = sum_i (alpha_i - alpha*_i) K(x_i, x) + bias.
struct SvrModel {
  Standardizer input;
  double gamma = 1.0;
  double c_box = 1.0;
  double eps_tube = 0.1;
  double bias = 0.0;
  /// Dual variables for every training point (empty after reload).
  std::vector<double> alpha;
  std::vector<double> alpha_star;
  /// Standardized support vectors and their coefficients alpha - alpha*.
  FeatureMatrix support;
  std::vector<double> support_coef;
  std::vector<std::size_t> support_indices;
  std::size_t iterations = 0;

  double predict(std::span<const double> x) const;
  /// Kernel expansion for an already standardized input.
  double decision_standardized(std::span<const double> z) const;
};

/// exp(-gamma * ||u - v||^2)
double rbf_kernel(std::span<const double> u, std::span<const double> v, double gamma) noexcept;

/// Raised when the iteration cap is hit; carries the last iterate.
class SvrConvergenceError : public ConvergenceError {
 public:
  SvrConvergenceError(const std::string& what, SvrModel best)
      : ConvergenceError(what), best_(std::move(best)) {}
  const SvrModel& best_iterate() const noexcept { return best_; }

 private:
  SvrModel best_;
};

/// Solves the epsilon-SVR dual by sequential minimal optimization with
/// second-order working-set selection.
SvrModel fit_svr(const FeatureMatrix& x, std::span<const double> y, const SvrParams& params);

void to_json(nlohmann::json& j, const SvrModel& model);
void from_json(const nlohmann::json& j, SvrModel& model);

}  // namespace alle

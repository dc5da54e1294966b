#include "alle/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <string>

#include <nlohmann/json.hpp>

namespace alle {
using nlohmann::json;

double rbf_kernel(std::span<const double> u, std::span<const double> v, double gamma) noexcept {
  double d2 = 0.0;
  for (std::size_t c = 0; c < u.size(); ++c) {
    const double d = u[c] - v[c];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

double SvrModel::decision_standardized(std::span<const double> z) const {
  double f = bias;
  for (std::size_t s = 0; s < support_coef.size(); ++s)
    f += support_coef[s] * rbf_kernel(support.row(s), z, gamma);
  return f;
}

double SvrModel::predict(std::span<const double> x) const {
  if (x.size() != input.width())
    throw ArgumentError("SVR expects " + std::to_string(input.width()) + " features, got " +
                        std::to_string(x.size()));
  std::vector<double> z(x.size());
  input.apply(x, z);
  return decision_standardized(z);
}

namespace {

/// Least-recently-used cache of kernel rows K(i, .).
class KernelRows {
 public:
  KernelRows(const FeatureMatrix& z, double gamma, std::size_t budget_bytes)
      : z_(z), gamma_(gamma), rows_(z.rows), where_(z.rows) {
    const std::size_t per_row = std::max<std::size_t>(1, z.rows * sizeof(double));
    capacity_ = std::max<std::size_t>(2, budget_bytes / per_row);
  }

  const double* row(std::size_t i) {
    if (!rows_[i].empty()) {
      lru_.splice(lru_.begin(), lru_, where_[i]);
      return rows_[i].data();
    }
    if (lru_.size() >= capacity_) {
      std::size_t victim = lru_.back();
      lru_.pop_back();
      std::vector<double>().swap(rows_[victim]);
    }
    auto& r = rows_[i];
    r.resize(z_.rows);
    const auto zi = z_.row(i);
    for (std::size_t j = 0; j < z_.rows; ++j) r[j] = rbf_kernel(zi, z_.row(j), gamma_);
    lru_.push_front(i);
    where_[i] = lru_.begin();
    return r.data();
  }

 private:
  const FeatureMatrix& z_;
  double gamma_;
  std::size_t capacity_ = 2;
  std::vector<std::vector<double>> rows_;
  std::list<std::size_t> lru_;
  std::vector<std::list<std::size_t>::iterator> where_;
};

constexpr double kTau = 1e-12;

/// Dual over 2n variables beta = [alpha; alpha*] with signs s = [+1; -1]:
///   min 1/2 beta' Q beta + p' beta,  s' beta = 0,  0 <= beta <= C,
/// Q_ij = s_i s_j K(i mod n, j mod n), p = [eps - y; eps + y].
class DualSolver {
 public:
  DualSolver(const FeatureMatrix& z, std::span<const double> y, const SvrParams& params,
             double gamma)
      : n_(z.rows), l_(2 * z.rows), c_(params.c_box), kernel_(z, gamma, params.cache_bytes),
        beta_(l_, 0.0), grad_(l_), sign_(l_) {
    for (std::size_t i = 0; i < n_; ++i) {
      sign_[i] = 1.0;
      sign_[i + n_] = -1.0;
      grad_[i] = params.eps_tube - y[i];
      grad_[i + n_] = params.eps_tube + y[i];
    }
  }

  /// Returns true on convergence, false when the iteration cap is reached.
  bool solve(double tol, std::size_t max_iterations) {
    for (iterations_ = 0; iterations_ < max_iterations; ++iterations_) {
      std::size_t i = 0, j = 0;
      if (!select_working_set(tol, i, j)) return true;
      update(i, j);
    }
    std::size_t i = 0, j = 0;
    return !select_working_set(tol, i, j);
  }

  /// Offset rho of the decision function f = sum coef K - rho.
  double rho() const {
    double ub = std::numeric_limits<double>::infinity();
    double lb = -ub, sum_free = 0.0;
    std::size_t free = 0;
    for (std::size_t t = 0; t < l_; ++t) {
      const double yg = sign_[t] * grad_[t];
      if (at_upper(t)) {
        if (sign_[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else if (at_lower(t)) {
        if (sign_[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else {
        ++free;
        sum_free += yg;
      }
    }
    return free > 0 ? sum_free / static_cast<double>(free) : 0.5 * (ub + lb);
  }

  const std::vector<double>& beta() const noexcept { return beta_; }
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  bool at_upper(std::size_t t) const noexcept { return beta_[t] >= c_; }
  bool at_lower(std::size_t t) const noexcept { return beta_[t] <= 0.0; }
  double q(std::size_t t, const double* krow, std::size_t u) const noexcept {
    return sign_[t] * sign_[u] * krow[u % n_];
  }

  bool select_working_set(double tol, std::size_t& out_i, std::size_t& out_j) {
    double gmax = -std::numeric_limits<double>::infinity();
    double gmax2 = gmax;
    std::ptrdiff_t best_i = -1, best_j = -1;
    double best_obj = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < l_; ++t) {
      if (sign_[t] > 0) {
        if (!at_upper(t) && -grad_[t] >= gmax) { gmax = -grad_[t]; best_i = static_cast<std::ptrdiff_t>(t); }
      } else {
        if (!at_lower(t) && grad_[t] >= gmax) { gmax = grad_[t]; best_i = static_cast<std::ptrdiff_t>(t); }
      }
    }
    if (best_i < 0) return false;
    const auto i = static_cast<std::size_t>(best_i);
    const double* ki = kernel_.row(i % n_);
    for (std::size_t t = 0; t < l_; ++t) {
      if (sign_[t] > 0) {
        if (at_lower(t)) continue;
        const double diff = gmax + grad_[t];
        gmax2 = std::max(gmax2, grad_[t]);
        if (diff > 0) {
          double quad = 2.0 - 2.0 * sign_[i] * q(i, ki, t);
          const double obj = -(diff * diff) / (quad > 0 ? quad : kTau);
          if (obj <= best_obj) { best_obj = obj; best_j = static_cast<std::ptrdiff_t>(t); }
        }
      } else {
        if (at_upper(t)) continue;
        const double diff = gmax - grad_[t];
        gmax2 = std::max(gmax2, -grad_[t]);
        if (diff > 0) {
          double quad = 2.0 + 2.0 * sign_[i] * q(i, ki, t);
          const double obj = -(diff * diff) / (quad > 0 ? quad : kTau);
          if (obj <= best_obj) { best_obj = obj; best_j = static_cast<std::ptrdiff_t>(t); }
        }
      }
    }
    if (gmax + gmax2 < tol || best_j < 0) return false;
    out_i = i;
    out_j = static_cast<std::size_t>(best_j);
    return true;
  }

  void update(std::size_t i, std::size_t j) {
    // Capacity is at least two rows, so fetching kj never evicts ki.
    const double* ki = kernel_.row(i % n_);
    const double* kj = kernel_.row(j % n_);
    const double qij = q(i, ki, j);
    const double old_i = beta_[i], old_j = beta_[j];
    double& ai = beta_[i];
    double& aj = beta_[j];
    if (sign_[i] != sign_[j]) {
      double quad = 2.0 + 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (-grad_[i] - grad_[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0) {
        if (aj < 0) { aj = 0; ai = diff; }
      } else {
        if (ai < 0) { ai = 0; aj = -diff; }
      }
      if (diff > 0) {
        if (ai > c_) { ai = c_; aj = c_ - diff; }
      } else {
        if (aj > c_) { aj = c_; ai = c_ + diff; }
      }
    } else {
      double quad = 2.0 - 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (grad_[i] - grad_[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > c_) {
        if (ai > c_) { ai = c_; aj = sum - c_; }
      } else {
        if (aj < 0) { aj = 0; ai = sum; }
      }
      if (sum > c_) {
        if (aj > c_) { aj = c_; ai = sum - c_; }
      } else {
        if (ai < 0) { ai = 0; aj = sum; }
      }
    }
    const double di = ai - old_i, dj = aj - old_j;
    for (std::size_t t = 0; t < l_; ++t) grad_[t] += q(i, ki, t) * di + q(j, kj, t) * dj;
  }

  std::size_t n_, l_;
  double c_;
  KernelRows kernel_;
  std::vector<double> beta_, grad_, sign_;
  std::size_t iterations_ = 0;
};

SvrModel build_model(const DualSolver& solver, const FeatureMatrix& z, Standardizer input,
                     double gamma, const SvrParams& params) {
  SvrModel m;
  const std::size_t n = z.rows;
  m.input = std::move(input);
  m.gamma = gamma;
  m.c_box = params.c_box;
  m.eps_tube = params.eps_tube;
  m.bias = -solver.rho();
  m.iterations = solver.iterations();
  const auto& beta = solver.beta();
  m.alpha.assign(beta.begin(), beta.begin() + static_cast<std::ptrdiff_t>(n));
  m.alpha_star.assign(beta.begin() + static_cast<std::ptrdiff_t>(n), beta.end());
  for (std::size_t i = 0; i < n; ++i) {
    const double coef = m.alpha[i] - m.alpha_star[i];
    if (coef != 0.0) {
      m.support_indices.push_back(i);
      m.support_coef.push_back(coef);
    }
  }
  m.support = FeatureMatrix(m.support_indices.size(), z.cols);
  for (std::size_t s = 0; s < m.support_indices.size(); ++s) {
    auto src = z.row(m.support_indices[s]);
    std::copy(src.begin(), src.end(), m.support.row(s).begin());
  }
  return m;
}

}  // namespace

SvrModel fit_svr(const FeatureMatrix& x, std::span<const double> y, const SvrParams& params) {
  if (!(params.c_box > 0.0)) throw ArgumentError("C must be positive");
  if (!(params.eps_tube >= 0.0)) throw ArgumentError("epsilon must be non-negative");
  if (!(params.gamma >= 0.0)) throw ArgumentError("gamma must be positive (or 0 for default)");
  if (!(params.tol > 0.0)) throw ArgumentError("tolerance must be positive");
  if (x.rows == 0 || x.cols == 0) throw ArgumentError("empty training matrix");
  if (y.size() != x.rows) throw ArgumentError("label count does not match feature rows");

  Standardizer input = Standardizer::fit(x);
  FeatureMatrix z = input.apply(x);

  double gamma = params.gamma;
  if (gamma == 0.0) {
    double var_sum = 0.0;
    for (std::size_t c = 0; c < z.cols; ++c) {
      double mean = 0.0, ss = 0.0;
      for (std::size_t r = 0; r < z.rows; ++r) mean += z(r, c);
      mean /= static_cast<double>(z.rows);
      for (std::size_t r = 0; r < z.rows; ++r) ss += (z(r, c) - mean) * (z(r, c) - mean);
      var_sum += ss / static_cast<double>(z.rows);
    }
    const double mean_var = var_sum / static_cast<double>(z.cols);
    gamma = 1.0 / (static_cast<double>(z.cols) * mean_var);
  }

  DualSolver solver(z, y, params, gamma);
  const bool converged = solver.solve(params.tol, params.max_iterations);
  SvrModel model = build_model(solver, z, std::move(input), gamma, params);
  if (!converged)
    throw SvrConvergenceError("SVR did not reach tolerance " + std::to_string(params.tol) +
                                  " within " + std::to_string(params.max_iterations) +
                                  " iterations",
                              std::move(model));
  return model;
}

void to_json(json& j, const SvrModel& m) {
  json support = json::array();
  for (std::size_t s = 0; s < m.support.rows; ++s) {
    auto row = m.support.row(s);
    support.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j = json{{"gamma", m.gamma},
           {"c_box", m.c_box},
           {"eps_tube", m.eps_tube},
           {"bias", m.bias},
           {"standardizer", m.input},
           {"support", std::move(support)},
           {"coef", m.support_coef},
           {"support_indices", m.support_indices},
           {"iterations", m.iterations}};
}

void from_json(const json& j, SvrModel& m) {
  m = SvrModel{};
  m.gamma = j.at("gamma").get<double>();
  m.c_box = j.at("c_box").get<double>();
  m.eps_tube = j.at("eps_tube").get<double>();
  m.bias = j.at("bias").get<double>();
  m.input = j.at("standardizer").get<Standardizer>();
  m.support_coef = j.at("coef").get<std::vector<double>>();
  m.support_indices = j.at("support_indices").get<std::vector<std::size_t>>();
  m.iterations = j.value("iterations", std::size_t{0});
  const auto& support = j.at("support");
  m.support = FeatureMatrix(support.size(), m.input.width());
  if (m.support.rows != m.support_coef.size()) throw DataError("SVR dump size mismatch");
  for (std::size_t s = 0; s < support.size(); ++s) {
    auto row = support.at(s).get<std::vector<double>>();
    if (row.size() != m.input.width()) throw DataError("SVR support vector width mismatch");
    std::copy(row.begin(), row.end(), m.support.row(s).begin());
  }
}

}  // namespace alle

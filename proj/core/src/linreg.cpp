#include "alle/linreg.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "alle/error.hpp"

namespace alle {
using nlohmann::json;

namespace {

// Lentz's method for the continued fraction of I_x(a, b).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw ConvergenceError("incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw ArgumentError("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw ArgumentError("incomplete beta needs 0 <= x <= 1");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double f_survival(double f, double d1, double d2) {
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw ArgumentError("F distribution needs positive degrees of freedom");
  if (std::isinf(f) && f > 0) return 0.0;
  if (!(f > 0.0)) return 1.0;
  return regularized_incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
}

double LinearModel::predict(std::span<const double> x) const {
  if (x.size() != coefficients.size())
    throw ArgumentError("linear model expects " + std::to_string(coefficients.size()) +
                        " features, got " + std::to_string(x.size()));
  double v = intercept;
  for (std::size_t k = 0; k < x.size(); ++k) v += coefficients[k] * x[k];
  return v;
}

LinearModel fit_linreg(const FeatureMatrix& x, std::span<const double> y, double alpha_level) {
  const std::size_t n = x.rows, m = x.cols;
  if (y.size() != n) throw ArgumentError("label count does not match feature rows");
  if (m == 0) throw ArgumentError("linear regression needs at least one feature");
  if (n <= m + 1)
    throw ArgumentError("linear regression needs n > M + 1 (n = " + std::to_string(n) +
                        ", M = " + std::to_string(m) + ")");

  Eigen::MatrixXd design(n, m + 1);
  Eigen::VectorXd target(n);
  for (std::size_t r = 0; r < n; ++r) {
    design(r, 0) = 1.0;
    for (std::size_t c = 0; c < m; ++c) design(r, c + 1) = x(r, c);
    target(r) = y[r];
  }
  // Scale columns to unit norm so the rank threshold is not fooled by units.
  Eigen::VectorXd scale = design.colwise().norm().transpose();
  for (Eigen::Index c = 0; c < scale.size(); ++c)
    if (scale(c) == 0.0) scale(c) = 1.0;
  Eigen::MatrixXd scaled = design * scale.cwiseInverse().asDiagonal();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  qr.setThreshold(1e-10);
  if (qr.rank() < static_cast<Eigen::Index>(m + 1)) {
    std::string names;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < perm.size(); ++k) {
      const auto c = static_cast<std::size_t>(perm(k));
      if (!names.empty()) names += ", ";
      names += c == 0 ? std::string("intercept") : x.column_name(c - 1);
    }
    throw SingularityError("rank-deficient design: " + names +
                           " linearly dependent on the other columns");
  }

  Eigen::VectorXd beta = qr.solve(target);
  Eigen::VectorXd resid = target - scaled * beta;
  beta += qr.solve(resid);
  resid = target - scaled * beta;
  beta = beta.cwiseQuotient(scale);

  LinearModel model;
  model.n = n;
  model.alpha_level = alpha_level;
  model.intercept = beta(0);
  model.coefficients.resize(m);
  for (std::size_t k = 0; k < m; ++k) model.coefficients[k] = beta(static_cast<Eigen::Index>(k + 1));
  model.residuals.assign(resid.data(), resid.data() + n);

  const double mean = target.mean();
  model.sse = resid.squaredNorm();
  model.sst = (target.array() - mean).square().sum();
  model.ssr = ((target - resid).array() - mean).square().sum();
  model.r_squared =
      model.sst > 0.0 ? 1.0 - model.sse / model.sst : std::numeric_limits<double>::quiet_NaN();

  const double d1 = static_cast<double>(m), d2 = static_cast<double>(n - m - 1);
  if (model.sst == 0.0) {
    model.f_statistic = std::numeric_limits<double>::quiet_NaN();
    model.p_value = 1.0;
  } else if (model.sse <= 1e-26 * model.sst) {
    model.f_statistic = std::numeric_limits<double>::infinity();
    model.p_value = 0.0;
  } else {
    model.f_statistic = (model.ssr / d1) / (model.sse / d2);
    model.p_value = f_survival(model.f_statistic, d1, d2);
  }
  model.reject_null = model.p_value < alpha_level;
  return model;
}

void to_json(json& j, const LinearModel& m) {
  auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  j = json{{"intercept", m.intercept},
           {"coefficients", m.coefficients},
           {"n", m.n},
           {"sse", m.sse},
           {"ssr", m.ssr},
           {"sst", m.sst},
           {"r_squared", finite_or_null(m.r_squared)},
           {"f_statistic", std::isinf(m.f_statistic) ? json("inf") : finite_or_null(m.f_statistic)},
           {"p_value", m.p_value},
           {"alpha_level", m.alpha_level},
           {"reject_null", m.reject_null}};
}

void from_json(const json& j, LinearModel& m) {
  m = LinearModel{};
  m.intercept = j.at("intercept").get<double>();
  m.coefficients = j.at("coefficients").get<std::vector<double>>();
  m.n = j.value("n", std::size_t{0});
  m.sse = j.value("sse", 0.0);
  m.ssr = j.value("ssr", 0.0);
  m.sst = j.value("sst", 0.0);
  m.p_value = j.value("p_value", 1.0);
  m.alpha_level = j.value("alpha_level", 0.05);
  m.reject_null = j.value("reject_null", false);
  const auto& r2 = j.at("r_squared");
  m.r_squared = r2.is_number() ? r2.get<double>() : std::numeric_limits<double>::quiet_NaN();
  const auto& f = j.at("f_statistic");
  m.f_statistic = f.is_number() ? f.get<double>()
                  : f.is_string() ? std::numeric_limits<double>::infinity()
                                  : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace alle

#include "doctest.h"

#include <cmath>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <nlohmann/json.hpp>

#include "alle/error.hpp"
#include "alle/linreg.hpp"
#include "support.hpp"

using namespace alle;

TEST_CASE("incomplete beta against an independent implementation") {
  for (double a : {0.5, 1.0, 2.5, 7.0, 40.0})
    for (double b : {0.5, 1.0, 3.0, 12.0, 250.0})
      for (double x : {0.0, 0.01, 0.2, 0.5, 0.77, 0.99, 1.0}) {
        CAPTURE(a);
        CAPTURE(b);
        CAPTURE(x);
        CHECK(regularized_incomplete_beta(a, b, x) ==
              doctest::Approx(boost::math::ibeta(a, b, x)).epsilon(1e-10));
      }
  CHECK_THROWS_AS(regularized_incomplete_beta(0.0, 1.0, 0.5), ArgumentError);
  CHECK_THROWS_AS(regularized_incomplete_beta(1.0, 1.0, 1.5), ArgumentError);
}

TEST_CASE("F survival function") {
  for (double d1 : {1.0, 3.0, 9.0})
    for (double d2 : {5.0, 40.0, 1000.0})
      for (double f : {0.1, 1.0, 2.7, 10.0}) {
        const boost::math::fisher_f dist(d1, d2);
        CHECK(f_survival(f, d1, d2) == doctest::Approx(boost::math::cdf(boost::math::complement(dist, f))).epsilon(1e-10));
      }
  CHECK(f_survival(0.0, 2.0, 10.0) == 1.0);
  CHECK(f_survival(INFINITY, 2.0, 10.0) == 0.0);
}

TEST_CASE("exact recovery of planted coefficients") {
  std::mt19937_64 rng(21);
  const FeatureMatrix x = test::random_matrix(50, 4, rng);
  const std::vector<double> beta = {1.5, -2.0, 0.25, 3.0};
  std::vector<double> y;
  for (std::size_t r = 0; r < x.rows; ++r) {
    double v = 0.7;
    for (std::size_t k = 0; k < 4; ++k) v += beta[k] * x(r, k);
    y.push_back(v);
  }
  const LinearModel m = fit_linreg(x, y);
  CHECK(std::abs(m.intercept - 0.7) < 1e-8);
  for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(m.coefficients[k] - beta[k]) < 1e-8);
  CHECK(std::isinf(m.f_statistic));
  CHECK(m.p_value == 0.0);
  CHECK(m.reject_null);
  CHECK(m.r_squared == doctest::Approx(1.0));
}

TEST_CASE("OLS residuals are orthogonal to the design") {
  std::mt19937_64 rng(22);
  const FeatureMatrix x = test::random_matrix(80, 3, rng);
  std::normal_distribution<double> e(0.0, 1.0);
  std::vector<double> y;
  for (std::size_t r = 0; r < x.rows; ++r) y.push_back(x(r, 0) - x(r, 2) + e(rng));
  const LinearModel m = fit_linreg(x, y);
  REQUIRE(m.residuals.size() == x.rows);
  double scale = 0.0;
  for (double v : m.residuals) scale += std::abs(v);
  double dot0 = 0.0;
  for (double v : m.residuals) dot0 += v;
  CHECK(std::abs(dot0) < 1e-8 * scale);
  for (std::size_t k = 0; k < 3; ++k) {
    double dot = 0.0;
    for (std::size_t r = 0; r < x.rows; ++r) dot += x(r, k) * m.residuals[r];
    CHECK(std::abs(dot) < 1e-8 * scale);
  }
  double sse = 0.0;
  double sst = 0.0;
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  for (std::size_t r = 0; r < x.rows; ++r) {
    sse += m.residuals[r] * m.residuals[r];
    sst += (y[r] - mean) * (y[r] - mean);
  }
  CHECK(m.r_squared == doctest::Approx(1.0 - sse / sst).epsilon(1e-12));
  const double f = ((sst - sse) / 3.0) / (sse / (80.0 - 4.0));
  CHECK(m.f_statistic == doctest::Approx(f).epsilon(1e-10));
  for (std::size_t r = 0; r < x.rows; ++r)
    CHECK(m.predict(x.row(r)) == doctest::Approx(y[r] - m.residuals[r]).epsilon(1e-12));
}

TEST_CASE("rank-deficient design names the dependent column") {
  std::mt19937_64 rng(23);
  FeatureMatrix x = test::random_matrix(30, 3, rng);
  x.names = {"P0", "PL1", "PL2"};
  for (std::size_t r = 0; r < x.rows; ++r) x(r, 2) = 2.0 * x(r, 0) - x(r, 1);
  std::vector<double> y(30);
  for (std::size_t r = 0; r < x.rows; ++r) y[r] = x(r, 0);
  try {
    (void)fit_linreg(x, y);
    FAIL("expected SingularityError");
  } catch (const SingularityError& e) {
    const std::string msg = e.what();
    CHECK((msg.find("P0") != std::string::npos || msg.find("PL1") != std::string::npos ||
           msg.find("PL2") != std::string::npos));
  }
  FeatureMatrix constant = test::random_matrix(30, 2, rng);
  for (std::size_t r = 0; r < constant.rows; ++r) constant(r, 1) = 4.0;
  CHECK_THROWS_AS(fit_linreg(constant, y), SingularityError);

  const FeatureMatrix tiny = test::random_matrix(3, 2, rng);
  CHECK_THROWS_AS(fit_linreg(tiny, std::vector<double>(3, 1.0)), ArgumentError);
}

TEST_CASE("linear model JSON") {
  std::mt19937_64 rng(24);
  const FeatureMatrix x = test::random_matrix(20, 2, rng);
  std::vector<double> y;
  for (std::size_t r = 0; r < x.rows; ++r) y.push_back(x(r, 0) + 1.0);
  const LinearModel m = fit_linreg(x, y);
  const nlohmann::json j = m;
  CHECK(j["f_statistic"] == "inf");
  const LinearModel back = nlohmann::json::parse(j.dump()).get<LinearModel>();
  CHECK(std::isinf(back.f_statistic));
  for (std::size_t r = 0; r < x.rows; ++r) CHECK(back.predict(x.row(r)) == m.predict(x.row(r)));
}

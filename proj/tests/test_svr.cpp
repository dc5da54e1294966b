#include "doctest.h"

#include <cmath>

#include <nlohmann/json.hpp>

#include "alle/error.hpp"
#include "alle/metrics.hpp"
#include "alle/svr.hpp"
#include "support.hpp"

using namespace alle;

namespace {

struct Problem {
  FeatureMatrix x;
  std::vector<double> y;
};

Problem smooth_problem(std::size_t n, std::size_t m, std::uint64_t seed, double noise) {
  std::mt19937_64 rng(seed);
  Problem p{test::random_matrix(n, m, rng), {}};
  std::normal_distribution<double> e(0.0, noise);
  for (std::size_t r = 0; r < n; ++r) p.y.push_back(std::sin(p.x(r, 0)) + 0.3 * p.x(r, m - 1) + e(rng));
  return p;
}

// Largest violation of the epsilon-SVR optimality conditions, in label units.
double kkt_violation(const SvrModel& model, const Problem& p) {
  double worst = 0.0;
  const double c = model.c_box;
  const double eps = model.eps_tube;
  std::vector<double> z(p.x.cols);
  for (std::size_t i = 0; i < p.x.rows; ++i) {
    model.input.apply(p.x.row(i), z);
    const double r = p.y[i] - model.decision_standardized(z);  // residual
    const double a = model.alpha[i];
    const double as = model.alpha_star[i];
    const double bound = 1e-12 * c;
    if (a > bound && a < c - bound) worst = std::max(worst, std::abs(r - eps));
    if (a >= c - bound) worst = std::max(worst, eps - r);
    if (as > bound && as < c - bound) worst = std::max(worst, std::abs(r + eps));
    if (as >= c - bound) worst = std::max(worst, r + eps);
    if (a <= bound && as <= bound) worst = std::max(worst, std::abs(r) - eps);
  }
  return worst;
}

}  // namespace

TEST_CASE("rbf kernel") {
  const std::vector<double> u = {1.0, 2.0};
  const std::vector<double> v = {2.0, 0.0};
  CHECK(rbf_kernel(u, v, 0.5) == doctest::Approx(std::exp(-0.5 * 5.0)));
  CHECK(rbf_kernel(u, u, 3.0) == 1.0);
}

TEST_CASE("dual feasibility and KKT conditions") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Problem p = smooth_problem(40 + 5 * seed, 3, seed, 0.1);
    SvrParams params;
    const SvrModel model = fit_svr(p.x, p.y, params);
    CHECK(model.gamma == doctest::Approx(1.0 / 3.0));
    double balance = 0.0;
    for (std::size_t i = 0; i < p.x.rows; ++i) {
      CHECK(model.alpha[i] >= 0.0);
      CHECK(model.alpha[i] <= params.c_box);
      CHECK(model.alpha_star[i] >= 0.0);
      CHECK(model.alpha_star[i] <= params.c_box);
      CHECK(model.alpha[i] * model.alpha_star[i] == 0.0);
      balance += model.alpha[i] - model.alpha_star[i];
    }
    CHECK(std::abs(balance) < 1e-10);
    CHECK(kkt_violation(model, p) < 1e-3);
  }
}

TEST_CASE("support vectors reproduce the decision function") {
  const Problem p = smooth_problem(60, 2, 7, 0.05);
  const SvrModel model = fit_svr(p.x, p.y, {});
  CHECK(model.support.rows == model.support_coef.size());
  for (std::size_t s = 0; s < model.support_indices.size(); ++s) {
    const auto i = model.support_indices[s];
    CHECK(model.support_coef[s] == model.alpha[i] - model.alpha_star[i]);
  }
  std::vector<double> pred;
  for (std::size_t r = 0; r < p.x.rows; ++r) pred.push_back(model.predict(p.x.row(r)));
  CHECK(r_squared(pred, p.y) > 0.9);

  const SvrModel back = nlohmann::json::parse(nlohmann::json(model).dump()).get<SvrModel>();
  for (std::size_t r = 0; r < p.x.rows; ++r) CHECK(back.predict(p.x.row(r)) == model.predict(p.x.row(r)));
}

TEST_CASE("a tiny kernel cache gives the same solution") {
  const Problem p = smooth_problem(50, 2, 8, 0.1);
  SvrParams big;
  SvrParams small;
  small.cache_bytes = 1;
  const SvrModel a = fit_svr(p.x, p.y, big);
  const SvrModel b = fit_svr(p.x, p.y, small);
  CHECK(a.alpha == b.alpha);
  CHECK(a.alpha_star == b.alpha_star);
  CHECK(a.bias == b.bias);
}

TEST_CASE("svr errors") {
  const Problem p = smooth_problem(30, 2, 9, 0.1);
  SvrParams bad;
  bad.c_box = 0.0;
  CHECK_THROWS_AS(fit_svr(p.x, p.y, bad), ArgumentError);

  SvrParams capped;
  capped.max_iterations = 2;
  try {
    (void)fit_svr(p.x, p.y, capped);
    FAIL("expected a convergence error");
  } catch (const SvrConvergenceError& e) {
    CHECK(e.best_iterate().alpha.size() == p.x.rows);
  }
  const SvrModel model = fit_svr(p.x, p.y, {});
  std::vector<double> narrow = {1.0};
  CHECK_THROWS_AS((void)model.predict(narrow), ArgumentError);
}

#include <catch_amalgamated.hpp>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "netdiff/dgp.hpp"
#include "netdiff/error.hpp"
#include "netdiff/meanfit.hpp"
#include "netdiff/normal.hpp"
#include "netdiff/rng.hpp"
#include "support/oracles.hpp"

using namespace netdiff;
using Catch::Approx;

namespace {

// [1, X]
Matrix with_intercept(const Matrix& x) {
  Matrix d(x.rows(), x.cols() + 1);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    d(r, 0) = 1.0;
    for (std::size_t c = 0; c < x.cols(); ++c) d(r, c + 1) = x(r, c);
  }
  return d;
}

BinaryVector probit_draw(const Matrix& design, const std::vector<double>& theta, Rng& rng) {
  BinaryVector y(design.rows());
  for (std::size_t r = 0; r < design.rows(); ++r) {
    double idx = 0.0;
    for (std::size_t c = 0; c < theta.size(); ++c) idx += design(r, c) * theta[c];
    y[r] = rng.uniform() < oracle::phi(idx) ? 1 : 0;
  }
  return y;
}

double l1_penalized(const std::vector<double>& coef, std::size_t n_unpen) {
  double s = 0.0;
  for (std::size_t k = n_unpen; k < coef.size(); ++k) s += std::abs(coef[k]);
  return s;
}

}  // namespace

TEST_CASE("pseudo_loglik value and gradient") {
  SECTION("theta = 0") {
    const Matrix d(10, 3, 1.0);
    BinaryVector y{1, 0, 1, 0, 1, 0, 1, 0, 1, 0};
    const std::vector<double> theta(3, 0.0);
    CHECK(pseudo_loglik(theta, y, d).value == Approx(10.0 * std::log(0.5)).epsilon(1e-14));
  }
  SECTION("gradient vs central differences on random instances") {
    Rng rng(31);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      const std::size_t m = 20 + rng.below(80), p = 1 + rng.below(6);
      Matrix d(m, p);
      for (double& v : d.data()) v = rng.normal();
      std::vector<double> theta(p);
      for (double& v : theta) v = 0.5 * rng.normal();
      const auto y = probit_draw(d, theta, rng);
      const auto ll = pseudo_loglik(theta, y, d);
      for (std::size_t k = 0; k < p; ++k) {
        auto tp = theta, tm = theta;
        const double h = 1e-5;
        tp[k] += h;
        tm[k] -= h;
        const double fd = (pseudo_loglik(tp, y, d).value - pseudo_loglik(tm, y, d).value) / (2 * h);
        worst = std::max(worst, std::abs(fd - ll.gradient[k]) / std::max(1.0, std::abs(fd)));
      }
    }
    CHECK(worst < 1e-6);
  }
  SECTION("perfect separation stays finite") {
    Matrix d(6, 1);
    BinaryVector y(6);
    for (std::size_t r = 0; r < 6; ++r) {
      d(r, 0) = r < 3 ? -1.0 : 1.0;
      y[r] = r < 3 ? 0 : 1;
    }
    const std::vector<double> huge{-1e6};
    const auto ll = pseudo_loglik(huge, y, d);
    CHECK(std::isfinite(ll.value));
    CHECK(ll.value == Approx(6.0 * std::log(kProbClamp)));
    CHECK(ll.gradient[0] == 0.0);
  }
  SECTION("non-finite design") {
    Matrix d(2, 1, 1.0);
    d(1, 0) = std::nan("");
    const BinaryVector y{0, 1};
    const std::vector<double> theta{0.1};
    CHECK_THROWS_AS(pseudo_loglik(theta, y, d), Error);
  }
}

TEST_CASE("fit_probit") {
  SECTION("consistency at large n") {
    const auto x = gen_covariates(20000, 5, 1);
    const auto d = with_intercept(x);
    const std::vector<double> truth{0.0, 0.1, -0.5, -0.7, 0.3, 0.1};
    Rng rng(2);
    const auto y = probit_draw(d, truth, rng);
    const auto fit = fit_probit(y, d);
    CHECK(fit.diag.converged);
    // Covariates have mean one, so the intercept SE is roughly 0.04 here.
    for (std::size_t k = 0; k < truth.size(); ++k) CHECK(std::abs(fit.coef[k] - truth[k]) < 0.15);
    CHECK(fit.diag.grad_norm < 1e-8);
  }
  SECTION("objective is nondecreasing across accepted iterates") {
    Rng rng(3);
    for (int t = 0; t < 30; ++t) {
      const auto x = gen_covariates(200, 5, 100 + t);
      const auto d = with_intercept(x);
      const std::vector<double> truth{0.2, 0.5, -0.5, -0.7, 0.3, 0.1};
      const auto y = probit_draw(d, truth, rng);
      const auto fit = fit_probit(y, d);
      REQUIRE(fit.diag.trace.size() >= 2);
      for (std::size_t k = 1; k < fit.diag.trace.size(); ++k) {
        const double prev = fit.diag.trace[k - 1];
        // Near the optimum, accepted steps may tie within rounding.
        CHECK(fit.diag.trace[k] >= prev - 1e-12 * std::max(1.0, std::abs(prev)));
      }
      CHECK(fit.loglik == fit.diag.trace.back());
    }
  }
  SECTION("intercept-only closed form") {
    Matrix d(1000, 1, 1.0);
    BinaryVector y(1000, 0);
    std::fill(y.begin(), y.begin() + 300, 1);
    const auto fit = fit_probit(y, d);
    CHECK(fit.coef[0] == Approx(normal_quantile(0.3)).margin(1e-8));
  }
  SECTION("subset restricts the rows") {
    const auto x = gen_covariates(400, 5, 4);
    const auto d = with_intercept(x);
    Rng rng(5);
    const auto y = probit_draw(d, {0.1, 0.5, -0.5, 0.2, 0.0, 0.1}, rng);
    BinaryVector mask(400, 0);
    std::vector<std::size_t> idx;
    for (std::size_t r = 0; r < 400; r += 2) {
      mask[r] = 1;
      idx.push_back(r);
    }
    BinaryVector ys(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) ys[k] = y[idx[k]];
    const auto a = fit_probit(y, d, mask);
    const auto b = fit_probit(ys, d.take_rows(idx));
    for (std::size_t k = 0; k < a.coef.size(); ++k) CHECK(a.coef[k] == Approx(b.coef[k]).margin(1e-9));
    const BinaryVector none(400, 0);
    CHECK_THROWS_AS(fit_probit(y, d, none), Error);
  }
  SECTION("degenerate outcome has no interior maximizer") {
    const auto x = gen_covariates(100, 5, 6);
    const BinaryVector zeros(100, 0);
    try {
      (void)fit_probit(zeros, with_intercept(x));
      FAIL("constant outcome fitted");
    } catch (const Error& e) {
      CHECK((e.code() == ErrorCode::NotConverged || e.code() == ErrorCode::Singular));
    }
  }
}

TEST_CASE("solve_lasso limits and optimality") {
  const auto x = gen_covariates(300, 5, 7);
  const auto d = with_intercept(x);
  Rng rng(8);
  const auto y = probit_draw(d, {0.0, 1.0, -1.0, -0.1, 0.1, 0.1}, rng);

  SECTION("lambda = 0 reproduces the MLE") {
    LassoOptions o;
    o.tol = 1e-12;
    o.max_iter = 20000;
    const auto l = solve_lasso(y, d, 1, 0.0, {}, o);
    const auto m = fit_probit(y, d);
    for (std::size_t k = 0; k < m.coef.size(); ++k) CHECK(std::abs(l.coef[k] - m.coef[k]) < 1e-4);
  }
  SECTION("lambda >= lambda_max shrinks everything") {
    const auto null = lasso_null_fit(y, d, 1);
    for (double f : {1.001, 1.5, 10.0}) {
      const auto l = solve_lasso(y, d, 1, f * null.lambda_max);
      for (std::size_t k = 1; k < l.coef.size(); ++k) CHECK(l.coef[k] == 0.0);
    }
    const auto below = solve_lasso(y, d, 1, 0.9 * null.lambda_max);
    CHECK(l1_penalized(below.coef, 1) > 0.0);
  }
  SECTION("subgradient conditions") {
    const auto null = lasso_null_fit(y, d, 1);
    LassoOptions o;
    o.tol = 1e-12;
    o.max_iter = 20000;
    for (double f : {0.5, 0.2, 0.05, 0.01}) {
      const double lam = f * null.lambda_max;
      const auto l = solve_lasso(y, d, 1, lam, {}, o);
      const auto g = pseudo_loglik(l.coef, y, d).gradient;
      const double m = double(y.size());
      CHECK(std::abs(g[0] / m) < 1e-5);
      for (std::size_t k = 1; k < l.coef.size(); ++k) {
        const double score = g[k] / m;
        if (l.coef[k] == 0.0) {
          CHECK(std::abs(score) <= lam + 1e-5);
        } else {
          CHECK(std::abs(score - lam * (l.coef[k] > 0 ? 1.0 : -1.0)) < 1e-5);
        }
      }
    }
  }
}

TEST_CASE("fit_lasso_cv path and support recovery") {
  const std::size_t n = 500, p = 500;
  int recovered = 0;
  const int seeds = 10;
  for (int s = 0; s < seeds; ++s) {
    const auto x = gen_covariates(n, p, 50 + s);
    const auto d = with_intercept(x);
    std::vector<double> theta(p + 1, 0.0);
    const double head[] = {1.0, -1.0, -1.0, 1.0, 1.0};
    std::copy(std::begin(head), std::end(head), theta.begin() + 1);
    theta[0] = -1.0;  // X has mean one: keep the index centred
    Rng rng(60 + s);
    const auto y = probit_draw(d, theta, rng);
    LassoOptions o;
    o.folds = 10;
    const auto fit = fit_lasso_cv(y, d, 1, o, 70 + s);
    REQUIRE(fit.diag.lambda_grid.size() == o.grid_size);
    REQUIRE(fit.diag.cv_loglik.size() == o.grid_size);
    CHECK(fit.lambda <= fit.lambda_max);

    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + 5, order.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(fit.coef[1 + a]) > std::abs(fit.coef[1 + b]);
    });
    std::sort(order.begin(), order.begin() + 5);
    if (order[4] == 4) ++recovered;

    if (s == 0) {
      // Warm-started path: the penalized l1 norm does not grow with lambda.
      std::vector<double> start;
      double prev = -1.0;
      for (double lam : fit.diag.lambda_grid) {
        const auto l = solve_lasso(y, d, 1, lam, start);
        const double norm = l1_penalized(l.coef, 1);
        CHECK(norm >= prev - 1e-6);
        prev = norm;
        start = l.coef;
      }
    }
  }
  CHECK(recovered >= 9);
}

TEST_CASE("predict_mu0") {
  const auto x = gen_covariates(50, 5, 9);
  MeanModel m;
  m.gamma_hat.assign(6, 0.0);
  for (double v : predict_mu0(x, m)) CHECK(v == 0.5);

  MeanModel c;
  const BinaryVector y0{1, 0, 0, 1, 0, 0, 0, 0, 0, 0};
  const Matrix x10 = gen_covariates(10, 5, 1);
  fit_period0(c, y0, x10, Y0Model::Constant);
  CHECK(c.y0_intercept_only);
  for (double v : predict_mu0(x10, c)) CHECK(v == Approx(0.2).epsilon(1e-12));
  const BinaryVector zeros(10, 0);
  fit_period0(c, zeros, x10, Y0Model::Constant);
  for (double v : predict_mu0(x10, c)) CHECK(v == Approx(kProbClamp).epsilon(1e-9));

  MeanModel mono;
  mono.gamma_hat = {0.1, 0.5, -0.3, 0.2, 0.0, 0.7};
  Rng rng(10);
  for (int t = 0; t < 200; ++t) {
    Matrix row(1, 5);
    for (double& v : row.data()) v = rng.normal();
    const double base = predict_mu0(row, mono)[0];
    for (std::size_t k : {0u, 2u, 4u}) {
      Matrix up = row;
      up(0, k) += rng.uniform();
      CHECK(predict_mu0(up, mono)[0] >= base);
    }
  }
}

TEST_CASE("simulate_mu1") {
  const std::vector<Edge> e{{0, 1}, {0, 2}, {1, 2}, {3, 0}};
  const auto g = DirectedGraph::from_edge_list(e, 4);
  const auto x = gen_covariates(4, 5, 11);
  MeanModel m;
  m.intercept1 = 0.2;
  m.delta_hat = 1.3;
  m.beta_hat = {0.5, -0.5, 0.1, 0.0, 0.2};
  const std::vector<double> mu0{0.3, 0.6, 0.45, 0.2};

  SECTION("no spillover and no irreversibility gives the index mean") {
    MeanModel flat = m;
    flat.delta_hat = 0.0;
    flat.irreversible = false;
    for (std::size_t r : {1u, 7u, 1000u}) {
      const auto res = simulate_mu1(g, x, flat, mu0, r, 3);
      for (std::size_t i = 0; i < 4; ++i) {
        double idx = flat.intercept1;
        for (std::size_t k = 0; k < 5; ++k) idx += x(i, k) * flat.beta_hat[k];
        CHECK(res.mu1_hat[i] == Approx(normal_cdf(idx)).epsilon(1e-13));
      }
    }
  }
  SECTION("large R matches enumeration over a node with two in-neighbors") {
    const std::size_t r = 100000;
    const auto res = simulate_mu1(g, x, m, mu0, r, 4);
    double idx0 = m.intercept1;
    for (std::size_t k = 0; k < 5; ++k) idx0 += x(0, k) * m.beta_hat[k];
    double exact = 0.0;
    for (unsigned c = 0; c < 8; ++c) {
      const unsigned own = c & 1u, y1 = (c >> 1) & 1u, y2 = (c >> 2) & 1u;
      const double p = (own ? mu0[0] : 1 - mu0[0]) * (y1 ? mu0[1] : 1 - mu0[1]) *
                       (y2 ? mu0[2] : 1 - mu0[2]);
      if (own) continue;
      exact += p * oracle::phi(idx0 + m.delta_hat * (y1 + y2) / 2.0);
    }
    CHECK(std::abs(res.mu1_hat[0] - exact) < 3.0 * 0.5 / std::sqrt(double(r)));
  }
  SECTION("certain period-0 outcomes are deterministic draws") {
    const std::vector<double> ones(4, 1.0);
    MeanModel rev = m;
    rev.irreversible = false;
    const auto res = simulate_mu1(g, x, rev, ones, 50, 5);
    for (std::size_t i = 0; i < 4; ++i) CHECK(res.draws.mean_a[i] == 0.0);
    double idx0 = m.intercept1 + m.delta_hat;
    for (std::size_t k = 0; k < 5; ++k) idx0 += x(0, k) * m.beta_hat[k];
    CHECK(res.mu1_hat[0] == Approx(normal_cdf(idx0)).epsilon(1e-14));
  }
  SECTION("single draw has zero covariance term") {
    const auto res = simulate_mu1(g, x, m, mu0, 1, 6);
    for (double c : res.draws.c_hat) CHECK(c == 0.0);
  }
  SECTION("deterministic and relabel-invariant") {
    const auto a = simulate_mu1(g, x, m, mu0, 500, 7);
    const auto b = simulate_mu1(g, x, m, mu0, 500, 7);
    CHECK(a.mu1_hat == b.mu1_hat);
    CHECK(a.draws.c_hat == b.draws.c_hat);
    const std::vector<NodeId> perm{2, 0, 3, 1};
    Matrix xp(4, 5);
    std::vector<double> mp(4);
    std::vector<std::uint64_t> ids(4);
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t k = 0; k < 5; ++k) xp(perm[i], k) = x(i, k);
      mp[perm[i]] = mu0[i];
      ids[perm[i]] = i;
    }
    const auto c = simulate_mu1(g.permuted(perm), xp, m, mp, 500, 7, {}, ids);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(c.mu1_hat[perm[i]] == Approx(a.mu1_hat[i]).epsilon(1e-14));
      CHECK(c.draws.c_hat[perm[i]] == Approx(a.draws.c_hat[i]).epsilon(1e-12).margin(1e-15));
    }
  }
}

TEST_CASE("fit_mean_model recovers the DGP") {
  const auto g = erdos_renyi(3000, 3.0, 12);
  const auto x = gen_covariates(3000, 5, 12);
  const auto spec = DgpSpec::low_dimensional(1.5);
  const auto panel = gen_panel(g, x, spec, 13);
  const auto m = fit_mean_model(panel, g, MeanFitOptions{}, 1);
  CHECK(m.irreversible);
  CHECK(m.gamma_hat.size() == 6);
  CHECK(std::abs(m.delta_hat - 1.5) < 0.5);
  CHECK(std::abs(m.intercept1) < 0.3);
  for (std::size_t k = 0; k < 5; ++k) CHECK(std::abs(m.beta_hat[k] - spec.beta0[k]) < 0.2);
  CHECK(m.period1_diag.converged);

  const auto d = period1_design(std::vector<double>(3, 0.5), BinaryVector{0, 1, 0},
                                gen_covariates(3, 2, 1), false);
  CHECK(d.design.cols() == 5);
  CHECK(d.n_unpenalized == 3);
  CHECK(d.design(1, 2) == 1.0);
}

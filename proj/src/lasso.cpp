#include <algorithm>
#include <cmath>
#include <numeric>

#include "netdiff/kernels.hpp"
#include "netdiff/meanfit.hpp"
#include "netdiff/rng.hpp"
#include "probit_terms.hpp"

namespace netdiff {

namespace {

// f(theta) = -(1/m) sum_i Q_i(theta), the smooth part of the LASSO objective,
// evaluated from the linear index eta = design * theta.
class SmoothLoss {
 public:
  SmoothLoss(std::span<const std::uint8_t> y, const Matrix& design)
      : y_(y), d_(design), dq_(design.rows()) {}

  std::size_t dim() const noexcept { return d_.cols(); }
  std::size_t rows() const noexcept { return d_.rows(); }

  void index(std::span<const double> theta, std::span<double> eta) const {
    kernels::gemv(d_, theta, eta);
  }

  double value(std::span<const double> eta) const {
    double s = 0.0;
    for (std::size_t i = 0; i < eta.size(); ++i) s += detail::probit_q(eta[i], y_[i]);
    return -s / static_cast<double>(eta.size());
  }

  double value_grad(std::span<const double> eta, std::span<double> grad) {
    double s = 0.0;
    const double scale = -1.0 / static_cast<double>(eta.size());
    for (std::size_t i = 0; i < eta.size(); ++i) {
      const auto t = detail::probit_terms(eta[i], y_[i]);
      s += t.q;
      dq_[i] = scale * t.dq;
    }
    kernels::gemv_t(d_, dq_, grad);
    return scale * s;
  }

  double value_grad_at(std::span<const double> theta, std::span<double> grad) {
    std::vector<double> eta(rows());
    index(theta, eta);
    return value_grad(eta, grad);
  }

 private:
  std::span<const std::uint8_t> y_;
  const Matrix& d_;
  std::vector<double> dq_;
};

double l1_tail(std::span<const double> v, std::size_t from) {
  double s = 0.0;
  for (std::size_t k = from; k < v.size(); ++k) s += std::fabs(v[k]);
  return s;
}

double kkt_violation(std::span<const double> theta, std::span<const double> grad,
                     std::size_t n_unpen, double lambda) {
  double worst = 0.0;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    double v;
    if (k < n_unpen) {
      v = std::fabs(grad[k]);
    } else if (theta[k] != 0.0) {
      v = std::fabs(grad[k] + std::copysign(lambda, theta[k]));
    } else {
      v = std::max(0.0, std::fabs(grad[k]) - lambda);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

struct SolveState {
  std::vector<double> theta;
  double lipschitz = 1.0;
};

// FISTA with backtracking and function-value restart. Updates `st` in place
// and returns diagnostics; never throws on non-convergence.
FitDiagnostics fista(SmoothLoss& loss, std::size_t n_unpen, double lambda, SolveState& st,
                     const LassoOptions& opts) {
  const std::size_t k = loss.dim();
  const std::size_t m = loss.rows();
  std::vector<double> x = st.theta, y = x, z(k), gy(k);
  // eta_y is kept as the same affine combination as y, so only z needs a gemv.
  std::vector<double> eta_x(m), eta_y(m), eta_z(m);
  loss.index(x, eta_x);
  eta_y = eta_x;
  double obj = loss.value(eta_x) + lambda * l1_tail(x, n_unpen);
  double t = 1.0;
  // Let the step grow back between calls; backtracking only ever doubles it.
  double lip = std::max(0.5 * st.lipschitz, 1e-8);

  FitDiagnostics diag;
  diag.trace.push_back(obj);
  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    const double fy = loss.value_grad(eta_y, gy);
    lip = std::max(0.9 * lip, 1e-8);
    double fz = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t c = 0; c < k; ++c) z[c] = y[c] - gy[c] / lip;
      kernels::soft_threshold(std::span<double>(z).subspan(n_unpen), lambda / lip);
      double lin = 0.0, quad = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        const double d = z[c] - y[c];
        lin += gy[c] * d;
        quad += d * d;
      }
      loss.index(z, eta_z);
      fz = loss.value(eta_z);
      if (fz <= fy + lin + 0.5 * lip * quad + 1e-15 * std::fabs(fy)) break;
      lip *= 1.5;
    }
    const double obj_z = fz + lambda * l1_tail(z, n_unpen);
    if (obj_z > obj) {
      // Momentum overshot: restart from the last accepted point.
      if (t == 1.0) {
        // Even the plain proximal step failed to descend.
        break;
      }
      t = 1.0;
      y = x;
      eta_y = eta_x;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double mom = (t - 1.0) / t_next;
    for (std::size_t c = 0; c < k; ++c) y[c] = z[c] + mom * (z[c] - x[c]);
    for (std::size_t i = 0; i < m; ++i) eta_y[i] = eta_z[i] + mom * (eta_z[i] - eta_x[i]);
    x.swap(z);
    eta_x.swap(eta_z);
    t = t_next;
    const double prev = obj;
    obj = obj_z;
    diag.trace.push_back(obj);
    if (std::fabs(prev - obj) <= opts.tol * std::max(1.0, std::fabs(obj))) {
      diag.converged = true;
      ++iter;
      break;
    }
  }
  if (!diag.converged && iter < opts.max_iter) diag.converged = true;

  loss.value_grad(eta_x, gy);
  diag.grad_norm = kkt_violation(x, gy, n_unpen, lambda);
  diag.iterations = iter;
  st.theta = std::move(x);
  st.lipschitz = lip;
  return diag;
}

// Strong-rule screening with a KKT check: FISTA runs on the columns that can
// be active at `lambda`, and full-design violators are added before re-solving.
FitDiagnostics solve_screened(std::span<const std::uint8_t> y, const Matrix& design,
                              std::size_t n_unpen, double lambda, double lambda_prev,
                              SolveState& st, const LassoOptions& opts) {
  const std::size_t m = design.rows();
  const std::size_t k = design.cols();
  SmoothLoss full(y, design);
  std::vector<double> g(k);
  full.value_grad_at(st.theta, g);
  std::vector<std::uint8_t> in(k, 0);
  for (std::size_t c = 0; c < k; ++c) {
    in[c] = c < n_unpen || st.theta[c] != 0.0 || std::fabs(g[c]) >= 2.0 * lambda - lambda_prev;
  }

  FitDiagnostics diag;
  int total = 0;
  std::vector<std::size_t> cols;
  for (;;) {
    cols.clear();
    for (std::size_t c = 0; c < k; ++c) {
      if (in[c]) cols.push_back(c);
    }
    Matrix sub(m, cols.size());
    for (std::size_t r = 0; r < m; ++r) {
      auto src = design.row(r);
      auto dst = sub.row(r);
      for (std::size_t c = 0; c < cols.size(); ++c) dst[c] = src[cols[c]];
    }
    SolveState sub_st;
    sub_st.theta.resize(cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) sub_st.theta[c] = st.theta[cols[c]];
    sub_st.lipschitz = st.lipschitz;
    SmoothLoss loss(y, sub);
    diag = fista(loss, n_unpen, lambda, sub_st, opts);
    total += diag.iterations;
    std::fill(st.theta.begin(), st.theta.end(), 0.0);
    for (std::size_t c = 0; c < cols.size(); ++c) st.theta[cols[c]] = sub_st.theta[c];
    st.lipschitz = sub_st.lipschitz;

    full.value_grad_at(st.theta, g);
    bool added = false;
    for (std::size_t c = n_unpen; c < k; ++c) {
      if (!in[c] && std::fabs(g[c]) > lambda) {
        in[c] = 1;
        added = true;
      }
    }
    if (!added) break;
  }
  diag.iterations = total;
  diag.grad_norm = kkt_violation(st.theta, g, n_unpen, lambda);
  return diag;
}

void check_lasso_inputs(std::span<const std::uint8_t> y, const Matrix& design,
                        std::size_t n_unpen) {
  if (y.size() != design.rows()) {
    throw Error(ErrorCode::LengthMismatch, "outcome length != design rows");
  }
  if (design.rows() == 0) throw Error(ErrorCode::EmptySubset, "LASSO fit on zero rows");
  if (n_unpen < 1 || n_unpen > design.cols()) {
    throw Error(ErrorCode::InvalidArgument, "unpenalized column count out of range");
  }
  for (double v : design.data()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "design contains NaN or Inf");
  }
}

Matrix leading_columns(const Matrix& design, std::size_t cols) {
  Matrix out(design.rows(), cols);
  for (std::size_t r = 0; r < design.rows(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = design(r, c);
  }
  return out;
}

LassoFit null_fit_unchecked(std::span<const std::uint8_t> y, const Matrix& design,
                            std::size_t n_unpen) {
  const auto head = fit_probit(y, leading_columns(design, n_unpen));
  LassoFit out;
  out.n_unpenalized = n_unpen;
  out.coef.assign(design.cols(), 0.0);
  std::copy(head.coef.begin(), head.coef.end(), out.coef.begin());
  SmoothLoss loss(y, design);
  std::vector<double> g(design.cols());
  loss.value_grad_at(out.coef, g);
  double lmax = 0.0;
  for (std::size_t c = n_unpen; c < g.size(); ++c) lmax = std::max(lmax, std::fabs(g[c]));
  out.lambda_max = lmax;
  out.lambda = lmax;
  out.diag = head.diag;
  return out;
}

}  // namespace

LassoFit solve_lasso(std::span<const std::uint8_t> y, const Matrix& design,
                     std::size_t n_unpenalized, double lambda, std::span<const double> start,
                     const LassoOptions& opts) {
  check_lasso_inputs(y, design, n_unpenalized);
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::InvalidArgument, "penalty must be finite and non-negative");
  }
  if (!start.empty() && start.size() != design.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "warm start length != design columns");
  }
  SolveState st;
  st.theta.assign(design.cols(), 0.0);
  if (!start.empty()) std::copy(start.begin(), start.end(), st.theta.begin());
  auto diag = solve_screened(y, design, n_unpenalized, lambda, lambda, st, opts);
  if (!diag.converged) throw NotConverged("LASSO iterations exhausted", st.theta, diag);
  LassoFit out;
  out.coef = std::move(st.theta);
  out.n_unpenalized = n_unpenalized;
  out.lambda = lambda;
  out.diag = std::move(diag);
  return out;
}

LassoFit lasso_null_fit(std::span<const std::uint8_t> y, const Matrix& design,
                        std::size_t n_unpenalized) {
  check_lasso_inputs(y, design, n_unpenalized);
  return null_fit_unchecked(y, design, n_unpenalized);
}

LassoFit fit_lasso_cv(std::span<const std::uint8_t> y, const Matrix& design,
                      std::size_t n_unpenalized, const LassoOptions& opts, std::uint64_t seed,
                      std::span<const std::uint64_t> row_keys) {
  check_lasso_inputs(y, design, n_unpenalized);
  if (!row_keys.empty() && row_keys.size() != y.size()) {
    throw Error(ErrorCode::LengthMismatch, "row key length != outcome length");
  }
  const std::size_t m = design.rows();
  const auto null = null_fit_unchecked(y, design, n_unpenalized);

  if (opts.fixed_lambda) {
    auto fit = solve_lasso(y, design, n_unpenalized, *opts.fixed_lambda, null.coef, opts);
    fit.lambda_max = null.lambda_max;
    return fit;
  }
  if (opts.folds < 2) throw Error(ErrorCode::InvalidArgument, "cross-validation needs folds >= 2");
  if (opts.grid_size < 1) throw Error(ErrorCode::InvalidArgument, "empty penalty grid");
  const std::size_t folds = std::min(opts.folds, m);
  if (folds < 2) throw Error(ErrorCode::InvalidSize, "too few rows for cross-validation");

  std::vector<double> grid(opts.grid_size);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double frac = grid.size() > 1 ? double(g) / double(grid.size() - 1) : 0.0;
    grid[g] = null.lambda_max * std::pow(opts.min_ratio, frac);
  }

  // Balanced folds: rank rows by a keyed hash, then deal them round-robin.
  const std::uint64_t fold_base = derive_seed(seed, {stream::kFolds});
  std::vector<std::uint64_t> rank_key(m);
  for (std::size_t i = 0; i < m; ++i) rank_key[i] = mix64(fold_base ^ mix64(node_key(row_keys, i)));
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return rank_key[a] != rank_key[b] ? rank_key[a] < rank_key[b] : node_key(row_keys, a) < node_key(row_keys, b);
  });
  std::vector<std::size_t> fold_of(m);
  for (std::size_t r = 0; r < m; ++r) fold_of[order[r]] = r % folds;

  std::vector<double> held_out(grid.size(), 0.0);
  std::vector<double> eta;
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < m; ++i) (fold_of[i] == f ? test : train).push_back(i);
    const Matrix d_train = design.take_rows(train);
    const Matrix d_test = design.take_rows(test);
    std::vector<std::uint8_t> y_train, y_test;
    for (std::size_t i : train) y_train.push_back(y[i]);
    for (std::size_t i : test) y_test.push_back(y[i]);

    SolveState st;
    st.theta = null.coef;
    eta.resize(test.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
      solve_screened(y_train, d_train, n_unpenalized, grid[g], grid[g == 0 ? 0 : g - 1], st,
                     opts);
      kernels::gemv(d_test, st.theta, eta);
      double q = 0.0;
      for (std::size_t i = 0; i < test.size(); ++i) q += detail::probit_q(eta[i], y_test[i]);
      held_out[g] += q;
    }
  }
  for (double& h : held_out) h /= static_cast<double>(m);
  const std::size_t best =
      static_cast<std::size_t>(std::max_element(held_out.begin(), held_out.end()) - held_out.begin());

  SolveState st;
  st.theta = null.coef;
  FitDiagnostics diag;
  for (std::size_t g = 0; g <= best; ++g) {
    diag = solve_screened(y, design, n_unpenalized, grid[g], grid[g == 0 ? 0 : g - 1], st, opts);
  }
  if (!diag.converged) throw NotConverged("LASSO iterations exhausted", st.theta, diag);

  LassoFit out;
  out.coef = std::move(st.theta);
  out.n_unpenalized = n_unpenalized;
  out.lambda = grid[best];
  out.lambda_max = null.lambda_max;
  out.diag = std::move(diag);
  out.diag.lambda_grid = std::move(grid);
  out.diag.cv_loglik = std::move(held_out);
  return out;
}

}  // namespace netdiff

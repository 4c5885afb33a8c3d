#include "netdiff/meanfit.hpp"

#include <algorithm>
#include <cmath>

#include "netdiff/kernels.hpp"
#include "netdiff/normal.hpp"
#include "netdiff/rng.hpp"

namespace netdiff {

Period1Design period1_design(std::span<const double> ybar, std::span<const std::uint8_t> y0,
                             const Matrix& x, bool irreversible, std::span<const double> extra) {
  const std::size_t n = x.rows();
  if (ybar.size() != n || y0.size() != n) {
    throw Error(ErrorCode::LengthMismatch, "spillover or y0 length != covariate rows");
  }
  if (!extra.empty() && extra.size() != n) {
    throw Error(ErrorCode::LengthMismatch, "extra regressor length != covariate rows");
  }
  const std::size_t lead = 2 + (irreversible ? 0 : 1) + (extra.empty() ? 0 : 1);
  Period1Design out{Matrix(n, lead + x.cols()), lead};
  for (std::size_t i = 0; i < n; ++i) {
    auto row = out.design.row(i);
    std::size_t c = 0;
    row[c++] = 1.0;
    row[c++] = ybar[i];
    if (!irreversible) row[c++] = y0[i];
    if (!extra.empty()) row[c++] = extra[i];
    auto xi = x.row(i);
    std::copy(xi.begin(), xi.end(), row.begin() + std::ptrdiff_t(c));
  }
  return out;
}

namespace {

void unpack_period1(MeanModel& m, std::span<const double> coef, bool irreversible,
                    bool has_extra) {
  std::size_t c = 0;
  m.intercept1 = coef[c++];
  m.delta_hat = coef[c++];
  m.own_hat = irreversible ? 0.0 : coef[c++];
  m.alpha_hat = has_extra ? coef[c++] : 0.0;
  m.beta_hat.assign(coef.begin() + std::ptrdiff_t(c), coef.end());
  m.irreversible = irreversible;
  m.has_extra = has_extra;
}

BinaryVector untreated_mask(std::span<const std::uint8_t> y0, bool irreversible) {
  BinaryVector mask(y0.size(), 1);
  if (irreversible) {
    for (std::size_t i = 0; i < y0.size(); ++i) mask[i] = y0[i] == 0 ? 1 : 0;
  }
  return mask;
}

}  // namespace

void fit_period0(MeanModel& model, std::span<const std::uint8_t> y0, const Matrix& x,
                 Y0Model y0_model, const ProbitOptions& opts) {
  if (y0.size() != x.rows()) throw Error(ErrorCode::LengthMismatch, "y0 length != covariate rows");
  if (y0.empty()) throw Error(ErrorCode::EmptySubset, "period-0 fit on zero rows");
  if (y0_model == Y0Model::Constant) {
    double mean = 0.0;
    for (auto v : y0) mean += v;
    mean /= static_cast<double>(y0.size());
    model.gamma_hat = {normal_quantile(clamp_prob(mean))};
    model.y0_intercept_only = true;
    model.period0_diag = {};
    model.period0_diag.converged = true;
    return;
  }
  Matrix design(x.rows(), x.cols() + 1);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    design(i, 0) = 1.0;
    for (std::size_t c = 0; c < x.cols(); ++c) design(i, c + 1) = x(i, c);
  }
  auto fit = fit_probit(y0, design, {}, opts);
  model.gamma_hat = std::move(fit.coef);
  model.y0_intercept_only = false;
  model.period0_diag = std::move(fit.diag);
}

MeanModel fit_lasso(std::span<const std::uint8_t> y1, std::span<const double> ybar,
                    std::span<const std::uint8_t> y0, const Matrix& x, std::size_t folds,
                    std::uint64_t seed, const LassoOptions& opts, bool irreversible,
                    std::span<const double> extra, std::span<const std::uint64_t> row_keys) {
  if (y1.size() != x.rows()) throw Error(ErrorCode::LengthMismatch, "y1 length != covariate rows");
  if (!row_keys.empty() && row_keys.size() != x.rows()) {
    throw Error(ErrorCode::LengthMismatch, "row key length != covariate rows");
  }
  const auto full = period1_design(ybar, y0, x, irreversible, extra);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < y0.size(); ++i) {
    if (!irreversible || y0[i] == 0) rows.push_back(i);
  }
  if (rows.empty()) throw Error(ErrorCode::EmptySubset, "no node has y0 = 0");
  const Matrix design = full.design.take_rows(rows);
  BinaryVector y(rows.size());
  std::vector<std::uint64_t> keys(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    y[k] = y1[rows[k]];
    keys[k] = node_key(row_keys, rows[k]);
  }
  LassoOptions o = opts;
  o.folds = folds;
  auto fit = fit_lasso_cv(y, design, full.n_unpenalized, o, seed, keys);

  MeanModel m;
  unpack_period1(m, fit.coef, irreversible, !extra.empty());
  m.lasso_lambda = fit.lambda;
  m.period1_diag = std::move(fit.diag);
  return m;
}

MeanModel fit_mean_model(const Panel& panel, const DirectedGraph& g, const MeanFitOptions& opts,
                         std::uint64_t seed, std::span<const double> extra) {
  const std::size_t n = panel.size();
  if (g.size() != n || panel.y1.size() != n || panel.x.rows() != n) {
    throw Error(ErrorCode::DimensionMismatch, "graph and panel disagree on n");
  }
  const auto ybar = neighborhood_average(g, panel.y0);
  MeanModel m;
  if (opts.fit == FitMode::Lasso) {
    m = fit_lasso(panel.y1, ybar, panel.y0, panel.x, opts.lasso.folds, seed, opts.lasso,
                  opts.irreversible, extra, panel.ids);
  } else {
    const auto p1 = period1_design(ybar, panel.y0, panel.x, opts.irreversible, extra);
    const auto mask = untreated_mask(panel.y0, opts.irreversible);
    if (std::find(mask.begin(), mask.end(), 1) == mask.end()) {
      throw Error(ErrorCode::EmptySubset, "no node has y0 = 0");
    }
    auto fit = fit_probit(panel.y1, p1.design, mask, opts.probit);
    unpack_period1(m, fit.coef, opts.irreversible, !extra.empty());
    m.period1_diag = std::move(fit.diag);
  }
  fit_period0(m, panel.y0, panel.x, opts.y0_model, opts.probit);
  return m;
}

std::vector<double> predict_mu0(const Matrix& x, const MeanModel& model) {
  std::vector<double> mu(x.rows());
  if (model.y0_intercept_only) {
    if (model.gamma_hat.empty()) {
      throw Error(ErrorCode::DimensionMismatch, "intercept-only model without intercept");
    }
    std::fill(mu.begin(), mu.end(), clamp_prob(normal_cdf(model.gamma_hat[0])));
    return mu;
  }
  if (model.gamma_hat.size() != x.cols() + 1) {
    throw Error(ErrorCode::DimensionMismatch, "gamma_hat length != covariate columns + 1");
  }
  kernels::gemv(x, std::span<const double>(model.gamma_hat).subspan(1), mu);
  for (double& v : mu) v = clamp_prob(normal_cdf(v + model.gamma_hat[0]));
  return mu;
}

std::size_t default_draws(std::size_t n) noexcept { return std::max<std::size_t>(1000, n); }

Mu1Result simulate_mu1(const DirectedGraph& g, const Matrix& x, const MeanModel& model,
                       std::span<const double> mu0_hat, std::size_t draws, std::uint64_t seed,
                       std::span<const double> extra, std::span<const std::uint64_t> ids) {
  const std::size_t n = g.size();
  if (draws < 1) throw Error(ErrorCode::InvalidSize, "simulate_mu1 needs R >= 1");
  if (x.rows() != n || mu0_hat.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "graph, covariates and mu0 disagree on n");
  }
  if (model.beta_hat.size() != x.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "beta_hat length != covariate columns");
  }
  if (model.has_extra && extra.size() != n) {
    throw Error(ErrorCode::LengthMismatch, "extra regressor length != node count");
  }
  if (!ids.empty() && ids.size() != n) throw Error(ErrorCode::LengthMismatch, "ids length != n");

  std::vector<double> xb(n);
  kernels::gemv(x, model.beta_hat, xb);
  for (std::size_t i = 0; i < n; ++i) {
    xb[i] += model.intercept1 + (model.has_extra ? model.alpha_hat * extra[i] : 0.0);
  }

  // g1[off[i] + 2 s + own] = fitted period-1 mean with s treated in-neighbors.
  std::vector<std::size_t> off(n + 1, 0);
  for (NodeId i = 0; i < n; ++i) off[i + 1] = off[i] + 2 * (g.in_degree(i) + 1);
  std::vector<double> g1(off[n]);
  for (NodeId i = 0; i < n; ++i) {
    const std::size_t d = g.in_degree(i);
    for (std::size_t s = 0; s <= d; ++s) {
      const double idx = xb[i] + (d == 0 ? 0.0 : model.delta_hat * double(s) / double(d));
      g1[off[i] + 2 * s] = clamp_prob(normal_cdf(idx));
      g1[off[i] + 2 * s + 1] =
          model.irreversible ? 0.0 : clamp_prob(normal_cdf(idx + model.own_hat));
    }
  }

  const KeyedUniform draw(seed, {stream::kDraws});
  std::vector<std::uint64_t> state(n);
  for (std::size_t j = 0; j < n; ++j) state[j] = draw.node_state(node_key(ids, j));

  std::vector<double> sum_g(n, 0.0), sum_a(n, 0.0), sum_ga(n, 0.0);
  BinaryVector y0(n);
  for (std::size_t r = 0; r < draws; ++r) {
    for (std::size_t j = 0; j < n; ++j) y0[j] = mu0_hat[j] >= KeyedUniform::at(state[j], r) ? 1 : 0;
    for (NodeId i = 0; i < n; ++i) {
      std::size_t s = 0;
      double a = 0.0;
      for (NodeId j : g.in_neighbors(i)) {
        s += y0[j];
        a += static_cast<double>(y0[j]) - mu0_hat[j];
      }
      const double gi = g1[off[i] + 2 * s + y0[i]];
      sum_g[i] += gi;
      sum_a[i] += a;
      sum_ga[i] += gi * a;
    }
  }

  const double inv_r = 1.0 / static_cast<double>(draws);
  Mu1Result out;
  out.mu1_hat.resize(n);
  out.draws.draws = draws;
  out.draws.mean_a.resize(n);
  out.draws.c_hat.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double mu1 = sum_g[i] * inv_r;
    out.mu1_hat[i] = mu1;
    out.draws.mean_a[i] = sum_a[i] * inv_r;
    out.draws.c_hat[i] = sum_ga[i] * inv_r - mu1 * out.draws.mean_a[i];
  }
  return out;
}

}  // namespace netdiff

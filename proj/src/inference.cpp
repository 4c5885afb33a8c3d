#include "netdiff/inference.hpp"

#include <algorithm>
#include <cmath>

#include "netdiff/normal.hpp"

namespace netdiff {

std::string_view to_string(Variant v) noexcept {
  return v == Variant::Plain ? "plain" : "irreversible";
}

FittedMeans residuals_and_v2(std::span<const std::uint8_t> y0, std::span<const std::uint8_t> y1,
                             std::span<const double> mu0_hat, std::span<const double> mu1_hat) {
  const std::size_t n = y0.size();
  if (y1.size() != n || mu0_hat.size() != n || mu1_hat.size() != n) {
    throw Error(ErrorCode::LengthMismatch, "outcomes and fitted means differ in length");
  }
  if (n == 0) throw Error(ErrorCode::InvalidSize, "empty panel");
  FittedMeans fm;
  fm.mu0_hat.assign(mu0_hat.begin(), mu0_hat.end());
  fm.mu1_hat.assign(mu1_hat.begin(), mu1_hat.end());
  fm.eps0.resize(n);
  fm.eps1.resize(n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    fm.eps0[i] = static_cast<double>(y0[i]) - mu0_hat[i];
    fm.eps1[i] = static_cast<double>(y1[i]) - mu1_hat[i];
    s += fm.eps0[i] * fm.eps0[i];
  }
  fm.v2 = s / static_cast<double>(n);
  if (!(fm.v2 >= 1e-10)) throw Error(ErrorCode::DegenerateV2, "v2 below 1e-10");
  return fm;
}

std::vector<double> neighbor_residual_sums(const FittedMeans& fm, const DirectedGraph& g) {
  const std::size_t n = fm.size();
  if (g.size() != n) throw Error(ErrorCode::DimensionMismatch, "graph size != residual length");
  std::vector<double> a(n, 0.0);
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j : g.in_neighbors(i)) a[i] += fm.eps0[j];
  }
  return a;
}

namespace {

double one_minus_mu0(const FittedMeans& fm, std::size_t i) {
  return std::max(1.0 - fm.mu0_hat[i], kProbClamp);
}

double outcome_residual(const FittedMeans& fm, std::size_t i, Variant v) {
  return v == Variant::Plain ? fm.eps1[i] : fm.eps1[i] / one_minus_mu0(fm, i);
}

}  // namespace

double estimate_cg(const FittedMeans& fm, const DirectedGraph& g, Variant variant) {
  if (!(fm.v2 >= 1e-10)) throw Error(ErrorCode::DegenerateV2, "v2 below 1e-10");
  const auto a = neighbor_residual_sums(fm, g);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += outcome_residual(fm, i, variant) * a[i];
  return s / (static_cast<double>(a.size()) * fm.v2);
}

QPsi compute_q_psi(const FittedMeans& fm, const DirectedGraph& g, double estimate,
                   Variant variant) {
  const std::size_t n = fm.size();
  if (fm.draws.empty()) throw Error(ErrorCode::MissingDraws, "simulated draws are required");
  if (fm.draws.c_hat.size() != n) {
    throw Error(ErrorCode::LengthMismatch, "draw statistics length != node count");
  }
  const auto a = neighbor_residual_sums(fm, g);
  QPsi out;
  out.q.resize(n);
  out.psi.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double e0sq = fm.eps0[i] * fm.eps0[i];
    const double var0 = fm.mu0_hat[i] * (1.0 - fm.mu0_hat[i]);
    out.q[i] = outcome_residual(fm, i, variant) * a[i] - e0sq * estimate;
    const double ci = variant == Variant::Plain ? fm.draws.c_hat[i]
                                                : fm.draws.c_hat[i] / one_minus_mu0(fm, i);
    out.psi[i] = ci - var0 * estimate;
  }
  return out;
}

VarianceEstimate variance(const QPsi& qp, const FittedMeans& fm, const DirectedGraph& g,
                          const std::vector<NodePair>* pairs) {
  const std::size_t n = fm.size();
  if (qp.q.size() != n || qp.psi.size() != n) {
    throw Error(ErrorCode::LengthMismatch, "q/psi length != node count");
  }
  std::vector<NodePair> own;
  if (pairs == nullptr) {
    own = overlap_pairs(g);
    pairs = &own;
  }
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = qp.q[i] - qp.psi[i];

  double diag = 0.0;
  for (double v : r) diag += v * v;
  double off = 0.0;
  for (const auto& p : *pairs) {
    if (p.a != p.b) off += r[p.a] * r[p.b];
  }
  const double scale = 1.0 / (static_cast<double>(n) * fm.v2 * fm.v2);
  VarianceEstimate out;
  out.sigma2_1g = diag * scale;
  out.sigma2_g = (diag + 2.0 * off) * scale;
  if (out.sigma2_g > 0.0) {
    out.sigma2_plus = out.sigma2_g;
  } else {
    out.fallback_used = true;
    out.sigma2_plus = out.sigma2_1g;
  }
  if (!(out.sigma2_plus > 0.0)) {
    throw Error(ErrorCode::DegenerateVariance, "variance estimate is zero");
  }
  return out;
}

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidAlpha, "alpha must be in (0, 1)");
}

}  // namespace

Interval confidence_interval(double estimate, double sigma_plus, std::size_t n, double alpha) {
  check_alpha(alpha);
  const double half = normal_quantile(1.0 - alpha / 2.0) * sigma_plus / std::sqrt(double(n));
  return {estimate - half, estimate + half};
}

double confidence_lower_bound(double estimate, double sigma_plus, std::size_t n, double alpha) {
  check_alpha(alpha);
  const double z = normal_quantile(1.0 - alpha);
  // z_{1-alpha} < 0 for alpha > 1/2 would place the bound above the estimate.
  return estimate - std::max(z, 0.0) * sigma_plus / std::sqrt(double(n));
}

double InferenceCore::sigma_plus() const noexcept { return std::sqrt(var.sigma2_plus); }

InferenceCore infer(const FittedMeans& fm, const DirectedGraph& g, Variant variant,
                    const std::vector<NodePair>* pairs) {
  InferenceCore core;
  core.variant = variant;
  core.estimate = estimate_cg(fm, g, variant);
  core.var = variance(compute_q_psi(fm, g, core.estimate, variant), fm, g, pairs);
  return core;
}

FittedMeans fit_means(const Panel& panel, const DirectedGraph& g, const EstimateOptions& opts,
                      MeanModel* model_out, std::span<const double> extra) {
  const std::size_t n = panel.size();
  auto model = fit_mean_model(panel, g, opts.fit, opts.seed, extra);
  const auto mu0 = predict_mu0(panel.x, model);
  const std::size_t r = opts.draws == 0 ? default_draws(n) : opts.draws;
  auto sim = simulate_mu1(g, panel.x, model, mu0, r, opts.seed, extra, panel.ids);
  auto fm = residuals_and_v2(panel.y0, panel.y1, mu0, sim.mu1_hat);
  fm.draws = std::move(sim.draws);
  if (model_out != nullptr) *model_out = std::move(model);
  return fm;
}

DiffusionReport make_report(const InferenceCore& core, const FittedMeans& fm,
                            const DirectedGraph& g, double alpha) {
  DiffusionReport rep;
  rep.n = fm.size();
  rep.estimate = core.estimate;
  rep.sigma_plus = core.sigma_plus();
  rep.sigma2_g = core.var.sigma2_g;
  rep.sigma2_1g = core.var.sigma2_1g;
  rep.fallback_used = core.var.fallback_used;
  rep.ci = confidence_interval(rep.estimate, rep.sigma_plus, rep.n, alpha);
  rep.clb = confidence_lower_bound(rep.estimate, rep.sigma_plus, rep.n, alpha);
  rep.alpha = alpha;
  rep.variant = core.variant;
  rep.draws = fm.draws.draws;
  rep.degrees = degree_stats(g);
  rep.rate_diagnostic = std::pow(rep.degrees.d_mx, 5.0) *
                        std::sqrt(rep.degrees.d_mx * rep.degrees.d_av) /
                        std::sqrt(static_cast<double>(rep.n));
  rep.v2 = fm.v2;
  return rep;
}

DiffusionReport estimate_diffusion(const Panel& panel, const DirectedGraph& g,
                                   const EstimateOptions& opts,
                                   const std::vector<NodePair>* pairs,
                                   std::span<const double> extra) {
  if (g.size() != panel.size()) {
    throw Error(ErrorCode::DimensionMismatch, "graph size != panel size");
  }
  MeanModel model;
  const auto fm = fit_means(panel, g, opts, &model, extra);
  const auto core = infer(fm, g, opts.variant, pairs);
  auto rep = make_report(core, fm, g, opts.alpha);
  rep.model = std::move(model);
  return rep;
}

}  // namespace netdiff

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "netdiff/kernels.hpp"
#include "netdiff/meanfit.hpp"
#include "probit_terms.hpp"

namespace netdiff {

namespace {

void check_design(std::span<const std::uint8_t> y, const Matrix& design) {
  if (y.size() != design.rows()) {
    throw Error(ErrorCode::LengthMismatch, "outcome length != design rows");
  }
  for (double v : design.data()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "design contains NaN or Inf");
  }
}

struct Evaluation {
  double value = 0.0;
  std::vector<double> gradient;
  Eigen::MatrixXd neg_hessian;
};

Evaluation evaluate(std::span<const double> theta, std::span<const std::uint8_t> y,
                    const Matrix& design, bool with_hessian) {
  const std::size_t m = design.rows();
  const std::size_t k = design.cols();
  std::vector<double> eta(m), dq(m);
  kernels::gemv(design, theta, eta);
  Evaluation ev;
  ev.gradient.assign(k, 0.0);
  if (with_hessian) ev.neg_hessian = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t i = 0; i < m; ++i) {
    const auto t = detail::probit_terms(eta[i], y[i]);
    ev.value += t.q;
    dq[i] = t.dq;
    if (with_hessian && t.d2q != 0.0) {
      auto row = design.row(i);
      for (std::size_t a = 0; a < k; ++a) {
        const double wa = -t.d2q * row[a];
        for (std::size_t b = a; b < k; ++b) ev.neg_hessian(a, b) += wa * row[b];
      }
    }
  }
  kernels::gemv_t(design, dq, ev.gradient);
  if (with_hessian) {
    ev.neg_hessian.triangularView<Eigen::StrictlyLower>() = ev.neg_hessian.transpose();
  }
  return ev;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

}  // namespace

LogLik pseudo_loglik(std::span<const double> theta, std::span<const std::uint8_t> y,
                     const Matrix& design) {
  check_design(y, design);
  if (theta.size() != design.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "coefficient length != design columns");
  }
  auto ev = evaluate(theta, y, design, false);
  return {ev.value, std::move(ev.gradient)};
}

ProbitFit fit_probit(std::span<const std::uint8_t> y, const Matrix& design,
                     std::span<const std::uint8_t> subset, const ProbitOptions& opts) {
  check_design(y, design);
  if (!subset.empty() && subset.size() != y.size()) {
    throw Error(ErrorCode::LengthMismatch, "subset mask length != outcome length");
  }

  Matrix sub_design;
  std::vector<std::uint8_t> sub_y;
  const Matrix* d = &design;
  std::span<const std::uint8_t> yy = y;
  if (!subset.empty()) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < subset.size(); ++i) {
      if (subset[i]) rows.push_back(i);
    }
    sub_design = design.take_rows(rows);
    sub_y.reserve(rows.size());
    for (std::size_t r : rows) sub_y.push_back(y[r]);
    d = &sub_design;
    yy = sub_y;
  }
  if (d->rows() == 0) throw Error(ErrorCode::EmptySubset, "no rows selected for probit fit");

  const std::size_t k = d->cols();
  std::vector<double> theta(k, 0.0), trial(k);
  ProbitFit fit;
  auto ev = evaluate(theta, yy, *d, true);
  fit.diag.trace.push_back(ev.value);

  for (int iter = 0;; ++iter) {
    fit.diag.iterations = iter;
    fit.diag.grad_norm = max_abs(ev.gradient);
    const Eigen::LLT<Eigen::MatrixXd> llt(ev.neg_hessian);
    const bool pd = llt.info() == Eigen::Success &&
                    llt.matrixL().toDenseMatrix().diagonal().minCoeff() >
                        1e-10 * std::max(1.0, ev.neg_hessian.diagonal().maxCoeff());
    if (fit.diag.grad_norm < opts.grad_tol) {
      if (!pd) throw Error(ErrorCode::Singular, "Hessian singular at the probit solution");
      fit.diag.converged = true;
      break;
    }
    if (!pd) throw Error(ErrorCode::Singular, "probit Hessian is numerically singular");
    if (iter >= opts.max_iter) {
      throw NotConverged("probit Newton iterations exhausted", theta, fit.diag);
    }

    const Eigen::VectorXd step =
        llt.solve(Eigen::Map<const Eigen::VectorXd>(ev.gradient.data(), Eigen::Index(k)));
    double t = 1.0;
    bool accepted = false;
    Evaluation next;
    for (int h = 0; h < 50; ++h, t *= 0.5) {
      for (std::size_t c = 0; c < k; ++c) trial[c] = theta[c] + t * step(Eigen::Index(c));
      next = evaluate(trial, yy, *d, true);
      // Near the optimum the gain drops below the resolution of the sum, so a
      // tie within rounding is accepted when the gradient shrinks.
      const bool tie = next.value >= ev.value - 1e-12 * std::max(1.0, std::fabs(ev.value)) &&
                       max_abs(next.gradient) < fit.diag.grad_norm;
      if (next.value >= ev.value || tie) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No ascent direction left at working precision.
      if (fit.diag.grad_norm <= 1e-6 * std::max<double>(1.0, double(d->rows()))) {
        fit.diag.converged = true;
        break;
      }
      throw NotConverged("probit step-halving failed", theta, fit.diag);
    }
    theta = trial;
    ev = std::move(next);
    fit.diag.trace.push_back(ev.value);
  }

  fit.coef = std::move(theta);
  fit.loglik = ev.value;
  return fit;
}

}  // namespace netdiff

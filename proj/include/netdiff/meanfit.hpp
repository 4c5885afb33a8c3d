#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "netdiff/dgp.hpp"
#include "netdiff/error.hpp"
#include "netdiff/graph.hpp"
#include "netdiff/matrix.hpp"

namespace netdiff {

struct FitDiagnostics {
  int iterations = 0;
  double grad_norm = 0.0;  // max-norm of the (sub)gradient at exit
  bool converged = false;
  // LASSO only: penalty grid and mean held-out pseudo-log-likelihood per point.
  std::vector<double> lambda_grid;
  std::vector<double> cv_loglik;
  // Objective after each accepted iterate (pseudo-log-likelihood for probit
  // Newton, penalized loss for LASSO).
  std::vector<double> trace;
};

/// Thrown when an iterative fit exhausts its iteration budget. Carries the
/// last iterate so callers can inspect or reuse it.
class NotConverged : public Error {
 public:
  NotConverged(const std::string& what, std::vector<double> last, FitDiagnostics diag)
      : Error(ErrorCode::NotConverged, what), last_(std::move(last)), diag_(std::move(diag)) {}

  const std::vector<double>& last_iterate() const noexcept { return last_; }
  const FitDiagnostics& diagnostics() const noexcept { return diag_; }

 private:
  std::vector<double> last_;
  FitDiagnostics diag_;
};

// ---------------------------------------------------------------------------
// Probit pseudo-likelihood
// ---------------------------------------------------------------------------

struct LogLik {
  double value = 0.0;
  std::vector<double> gradient;
};

/// sum_i Y_i log Phi(x_i'theta) + (1 - Y_i) log(1 - Phi(x_i'theta)), with the
/// probability clamped to [1e-6, 1 - 1e-6]; clamped rows contribute zero
/// gradient. Throws NonFinite if the design holds NaN or Inf.
LogLik pseudo_loglik(std::span<const double> theta, std::span<const std::uint8_t> y,
                     const Matrix& design);

struct ProbitOptions {
  double grad_tol = 1e-8;  // on the max-norm of the gradient
  int max_iter = 100;
};

struct ProbitFit {
  std::vector<double> coef;
  double loglik = 0.0;
  FitDiagnostics diag;
};

/// Newton-Raphson with step-halving on the rows where subset[i] != 0 (all
/// rows when subset is empty). Throws Singular, NotConverged, EmptySubset.
ProbitFit fit_probit(std::span<const std::uint8_t> y, const Matrix& design,
                     std::span<const std::uint8_t> subset = {}, const ProbitOptions& opts = {});

// ---------------------------------------------------------------------------
// L1-penalized probit
// ---------------------------------------------------------------------------

struct LassoOptions {
  std::size_t grid_size = 50;
  double min_ratio = 1e-3;  // smallest grid value relative to lambda_max
  std::size_t folds = 10;
  double tol = 1e-7;        // relative change of the objective
  int max_iter = 5000;
  /// Skip cross-validation and solve at this penalty.
  std::optional<double> fixed_lambda;
};

struct LassoFit {
  std::vector<double> coef;  // unpenalized columns first, then penalized
  std::size_t n_unpenalized = 0;
  double lambda = 0.0;
  double lambda_max = 0.0;
  FitDiagnostics diag;
};

/// Minimizes -(1/m) sum_i Q_i(theta) + lambda * sum_{k >= n_unpenalized} |theta_k|
/// over the m rows of `design` by accelerated proximal gradient with
/// backtracking (FISTA with adaptive restart), warm-started from `start` when
/// given.
LassoFit solve_lasso(std::span<const std::uint8_t> y, const Matrix& design,
                     std::size_t n_unpenalized, double lambda,
                     std::span<const double> start = {}, const LassoOptions& opts = {});

/// Smallest penalty for which every penalized coefficient is zero, with the
/// matching unpenalized fit.
LassoFit lasso_null_fit(std::span<const std::uint8_t> y, const Matrix& design,
                        std::size_t n_unpenalized);

/// Penalty chosen on a log grid from lambda_max down to min_ratio * lambda_max
/// by K-fold cross-validation on held-out pseudo-log-likelihood. Folds are a
/// balanced random partition of the rows driven by `seed` and `row_keys`.
LassoFit fit_lasso_cv(std::span<const std::uint8_t> y, const Matrix& design,
                      std::size_t n_unpenalized, const LassoOptions& opts, std::uint64_t seed,
                      std::span<const std::uint64_t> row_keys = {});

// ---------------------------------------------------------------------------
// Conditional-mean models for both periods
// ---------------------------------------------------------------------------

enum class FitMode { Mle, Lasso };
enum class Y0Model { Probit, Constant };

/// mu_{j,0} = Phi(gamma_0 + X_j' gamma) (or Phi(gamma_0) when intercept-only);
/// g_1 = (1 - Y_{i,0}) Phi(c + delta Ybar_{i,0} + alpha lambda_i + X_i' beta)
/// under irreversibility, otherwise Phi(c + delta Ybar + own Y_{i,0} + alpha lambda_i + X_i' beta).
struct MeanModel {
  std::vector<double> gamma_hat;  // intercept first
  bool y0_intercept_only = false;
  double intercept1 = 0.0;
  double delta_hat = 0.0;
  double own_hat = 0.0;    // coefficient on Y_{i,0}; reversible designs only
  double alpha_hat = 0.0;  // coefficient on the optional extra regressor
  std::vector<double> beta_hat;
  bool irreversible = true;
  bool has_extra = false;
  double lasso_lambda = 0.0;  // 0 for MLE
  FitDiagnostics period0_diag;
  FitDiagnostics period1_diag;
};

/// Period-1 design: [1, Ybar, (Y0 if reversible), (extra), X]. The first
/// columns up to and including `extra` are never penalized.
struct Period1Design {
  Matrix design;
  std::size_t n_unpenalized = 0;
};

Period1Design period1_design(std::span<const double> ybar, std::span<const std::uint8_t> y0,
                             const Matrix& x, bool irreversible,
                             std::span<const double> extra = {});

struct MeanFitOptions {
  FitMode fit = FitMode::Mle;
  Y0Model y0_model = Y0Model::Probit;
  bool irreversible = true;
  LassoOptions lasso;
  ProbitOptions probit;
};

/// Period-0 probit (or intercept-only) fit of Y0 on X.
void fit_period0(MeanModel& model, std::span<const std::uint8_t> y0, const Matrix& x,
                 Y0Model y0_model, const ProbitOptions& opts = {});

/// Period-1 LASSO: (1/m)-scaled penalized pseudo-likelihood over
/// {i : Y_{i,0} = 0} (all nodes when reversible); intercept, delta and the
/// extra regressor unpenalized. Only the period-1 fields of the result are set.
MeanModel fit_lasso(std::span<const std::uint8_t> y1, std::span<const double> ybar,
                    std::span<const std::uint8_t> y0, const Matrix& x, std::size_t folds,
                    std::uint64_t seed, const LassoOptions& opts = {},
                    bool irreversible = true, std::span<const double> extra = {},
                    std::span<const std::uint64_t> row_keys = {});

/// Both periods, as selected by `opts`.
MeanModel fit_mean_model(const Panel& panel, const DirectedGraph& g, const MeanFitOptions& opts,
                         std::uint64_t seed, std::span<const double> extra = {});

/// Clamped Phi(X_j' gamma_hat).
std::vector<double> predict_mu0(const Matrix& x, const MeanModel& model);

/// Per-node sufficient statistics of the R simulated period-0 draws:
/// mean_a[i] = (1/R) sum_r a_{i,r} and c_hat[i] = (1/R) sum_r eps_{i,1,r} a_{i,r},
/// where a_{i,r} = sum_{j in N_G(i)} (Y_{j,0,r} - mu_{j,0}) and
/// eps_{i,1,r} = g_1(draw r) - mu_{i,1}.
struct SimDraws {
  std::size_t draws = 0;
  std::vector<double> mean_a;
  std::vector<double> c_hat;

  bool empty() const noexcept { return draws == 0; }
};

struct Mu1Result {
  std::vector<double> mu1_hat;
  SimDraws draws;
};

/// mu_{i,1} = (1/R) sum_r g_1(Ybar_{i,0,r}, Y_{i,0,r}, X_i) with
/// Y_{j,0,r} = 1{mu_{j,0} >= U_{j,r}}, U_{j,r} uniform and keyed by node id.
Mu1Result simulate_mu1(const DirectedGraph& g, const Matrix& x, const MeanModel& model,
                       std::span<const double> mu0_hat, std::size_t draws, std::uint64_t seed,
                       std::span<const double> extra = {},
                       std::span<const std::uint64_t> ids = {});

/// Default simulation count max(1000, n).
std::size_t default_draws(std::size_t n) noexcept;

}  // namespace netdiff

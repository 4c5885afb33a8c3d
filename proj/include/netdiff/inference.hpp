#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "netdiff/dgp.hpp"
#include "netdiff/graph.hpp"
#include "netdiff/meanfit.hpp"

namespace netdiff {

enum class Variant { Plain, Irreversible };

std::string_view to_string(Variant v) noexcept;

/// Residuals of both periods and v2 = (1/n) sum_j eps0_j^2.
struct FittedMeans {
  std::vector<double> mu0_hat;
  std::vector<double> mu1_hat;
  std::vector<double> eps0;
  std::vector<double> eps1;
  double v2 = 0.0;
  SimDraws draws;

  std::size_t size() const noexcept { return eps0.size(); }
};

/// Throws LengthMismatch, DegenerateV2 (v2 < 1e-10).
FittedMeans residuals_and_v2(std::span<const std::uint8_t> y0, std::span<const std::uint8_t> y1,
                             std::span<const double> mu0_hat, std::span<const double> mu1_hat);

/// a_i = sum_{j in N_G(i)} eps0_j.
std::vector<double> neighbor_residual_sums(const FittedMeans& fm, const DirectedGraph& g);

/// C_G = (1/(n v2)) sum_i eps1_i a_i; the irreversible variant replaces
/// eps1_i with e_i = eps1_i / (1 - mu0_i).
double estimate_cg(const FittedMeans& fm, const DirectedGraph& g, Variant variant);

struct QPsi {
  std::vector<double> q;
  std::vector<double> psi;
};

/// q_i = eps1_i a_i - eps0_i^2 C and psi_i = C_i - mu0_i (1 - mu0_i) C, with
/// eps1 -> e and C_i -> C_i / (1 - mu0_i) in the irreversible variant.
/// Throws MissingDraws when fm.draws is empty.
QPsi compute_q_psi(const FittedMeans& fm, const DirectedGraph& g, double estimate,
                   Variant variant);

struct VarianceEstimate {
  double sigma2_g = 0.0;   // sum over ordered overlapping pairs, diagonal included
  double sigma2_1g = 0.0;  // diagonal part only
  double sigma2_plus = 0.0;
  bool fallback_used = false;
};

/// `pairs` are the unordered overlap pairs of g (diagonal included); they are
/// recomputed from g when null. Throws DegenerateVariance.
VarianceEstimate variance(const QPsi& qp, const FittedMeans& fm, const DirectedGraph& g,
                          const std::vector<NodePair>* pairs = nullptr);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  double length() const noexcept { return upper - lower; }
  bool contains(double v) const noexcept { return lower <= v && v <= upper; }
};

/// estimate +/- z_{1-alpha/2} sigma_plus / sqrt(n). Throws InvalidAlpha.
Interval confidence_interval(double estimate, double sigma_plus, std::size_t n, double alpha);

/// estimate - z_{1-alpha} sigma_plus / sqrt(n). Throws InvalidAlpha.
double confidence_lower_bound(double estimate, double sigma_plus, std::size_t n, double alpha);

/// Point estimate and standard error for one variant.
struct InferenceCore {
  Variant variant = Variant::Irreversible;
  double estimate = 0.0;
  VarianceEstimate var;

  double sigma_plus() const noexcept;
};

InferenceCore infer(const FittedMeans& fm, const DirectedGraph& g, Variant variant,
                    const std::vector<NodePair>* pairs = nullptr);

struct EstimateOptions {
  MeanFitOptions fit;
  Variant variant = Variant::Irreversible;
  double alpha = 0.05;
  std::size_t draws = 0;  // 0 selects default_draws(n)
  std::uint64_t seed = 0;
};

/// Fits the mean models on `panel` and returns the residuals with the
/// simulated draws attached.
FittedMeans fit_means(const Panel& panel, const DirectedGraph& g, const EstimateOptions& opts,
                      MeanModel* model_out = nullptr, std::span<const double> extra = {});

struct DiffusionReport {
  double estimate = 0.0;
  double sigma_plus = 0.0;
  double sigma2_g = 0.0;
  double sigma2_1g = 0.0;
  Interval ci;
  double clb = 0.0;
  double alpha = 0.05;
  Variant variant = Variant::Irreversible;
  std::size_t n = 0;
  std::size_t draws = 0;
  DegreeStats degrees;
  /// d_mx^5 sqrt(d_mx d_av) / sqrt(n); should be small for the normal
  /// approximation to be credible.
  double rate_diagnostic = 0.0;
  bool fallback_used = false;
  double v2 = 0.0;
  MeanModel model;
};

DiffusionReport make_report(const InferenceCore& core, const FittedMeans& fm,
                            const DirectedGraph& g, double alpha);

/// fit -> predict -> simulate -> residuals -> estimate -> q/psi -> variance -> CI/CLB.
DiffusionReport estimate_diffusion(const Panel& panel, const DirectedGraph& g,
                                   const EstimateOptions& opts,
                                   const std::vector<NodePair>* pairs = nullptr,
                                   std::span<const double> extra = {});

}  // namespace netdiff

#pragma once

namespace netdiff {

/// Standard normal density.
double normal_pdf(double x) noexcept;

/// Standard normal CDF, accurate in both tails (erfc based).
double normal_cdf(double x) noexcept;

/// Inverse of the standard normal CDF for p in (0, 1). Rational starting
/// value refined by one Halley step; absolute error well below 1e-9.
double normal_quantile(double p);

/// Probabilities used downstream of a fitted model are kept inside
/// [kProbClamp, 1 - kProbClamp].
inline constexpr double kProbClamp = 1e-6;

inline double clamp_prob(double p) noexcept {
  return p < kProbClamp ? kProbClamp : (p > 1.0 - kProbClamp ? 1.0 - kProbClamp : p);
}

}  // namespace netdiff

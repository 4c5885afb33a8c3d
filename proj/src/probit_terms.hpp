#pragma once

#include <cmath>
#include <cstdint>

#include "netdiff/normal.hpp"

namespace netdiff::detail {

// Log-likelihood contribution of one Bernoulli observation under the probit
// link, with its first and second derivatives in the linear index.
struct ProbitTerms {
  double q;
  double dq;
  double d2q;
};

inline bool clamped(double tail) noexcept { return tail < kProbClamp; }

inline double probit_q(double eta, std::uint8_t y) noexcept {
  const double tail = normal_cdf(-std::fabs(eta));
  if (clamped(tail)) {
    // Clamped region: the objective is flat here.
    const bool upper = eta >= 0.0;
    return (y != 0) == upper ? std::log1p(-kProbClamp) : std::log(kProbClamp);
  }
  const bool small_side = (y != 0) != (eta >= 0.0);
  return small_side ? std::log(tail) : std::log1p(-tail);
}

inline ProbitTerms probit_terms(double eta, std::uint8_t y) noexcept {
  const double tail = normal_cdf(-std::fabs(eta));
  if (clamped(tail)) return {probit_q(eta, y), 0.0, 0.0};
  const double p1 = eta >= 0.0 ? 1.0 - tail : tail;
  const double p0 = eta >= 0.0 ? tail : 1.0 - tail;
  const double phi = normal_pdf(eta);
  const bool small_side = (y != 0) != (eta >= 0.0);
  const double q = small_side ? std::log(tail) : std::log1p(-tail);
  if (y) {
    const double lam = phi / p1;
    return {q, lam, -lam * (eta + lam)};
  }
  const double lam = phi / p0;
  return {q, -lam, -lam * (lam - eta)};
}

}  // namespace netdiff::detail

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "netdiff/graph.hpp"
#include "netdiff/matrix.hpp"

namespace netdiff {

enum class Y0Mode {
  Probit,          // Y_{j,0} ~ Bernoulli(Phi(X_j' gamma0))
  FixedBernoulli,  // Y_{j,0} ~ Bernoulli(pi0)
};

/// Two-period probit data-generating process over a causal graph:
///   Y_{j,0} = 1{Phi(X_j' gamma0) >= U_{j,0}},  U_{j,0} ~ U[0,1]
///   Y_{i,1} = 1{delta0 * Ybar_{i,0} + X_i' beta0 - U_{i,1} > 0},  U_{i,1} ~ N(0,1)
/// with Y_{i,1} forced to 0 when Y_{i,0} = 1 under irreversibility.
struct DgpSpec {
  std::vector<double> gamma0;
  double delta0 = 0.0;
  std::vector<double> beta0;
  Y0Mode y0_mode = Y0Mode::Probit;
  double pi0 = 0.3;
  bool irreversible = true;

  /// p = 5 design: gamma0 = (0.1,-0.5,-0.7,0.3,0.1), beta0 = (1,-1,-0.1,0.1,0.1).
  static DgpSpec low_dimensional(double delta0);
  /// Fixed-Bernoulli(0.3) Y0 and beta0 = (1,-1,-1,1,1,0,...,0) of length p.
  static DgpSpec high_dimensional(double delta0, std::size_t p);

  std::size_t dim() const noexcept { return beta0.size(); }

  /// Exact period-0 means mu_{j,0}.
  std::vector<double> mu0(const Matrix& x) const;
};

struct Panel {
  BinaryVector y0;
  BinaryVector y1;
  Matrix x;
  /// External node identifiers; empty means 0..n-1. Simulation draws are
  /// keyed by these, so permuting a panel together with its ids and graph
  /// reproduces the same per-node randomness.
  std::vector<std::uint64_t> ids;

  std::size_t size() const noexcept { return y0.size(); }
  friend bool operator==(const Panel&, const Panel&) = default;
};

/// n x p matrix of i.i.d. N(1, 1) entries.
Matrix gen_covariates(std::size_t n, std::size_t p, std::uint64_t seed);

/// Y_{j,0} = 1{mu_{j,0} >= U_{j,0}} with U_{j,0} the keyed uniform of node j.
BinaryVector gen_y0(const Matrix& x, const DgpSpec& spec, std::uint64_t seed,
                    std::span<const std::uint64_t> ids = {});

/// U_{i,1} is realized as Phi^{-1}(V_i) with V_i the keyed uniform of node i,
/// so the event {delta0 Ybar + X'beta0 - U_{i,1} > 0} is {V_i < Phi(delta0 Ybar + X'beta0)}.
BinaryVector gen_y1(const DirectedGraph& g, const BinaryVector& y0, const Matrix& x,
                    const DgpSpec& spec, std::uint64_t seed,
                    std::span<const std::uint64_t> ids = {});

/// Convenience: Y0 then Y1 from seed-derived streams.
Panel gen_panel(const DirectedGraph& g, Matrix x, const DgpSpec& spec, std::uint64_t seed,
                std::vector<std::uint64_t> ids = {});

struct TrueDiffusion {
  double d = 0.0;       // D
  double d_irr = 0.0;   // D^I (contrasts conditional on Y_{i,0} = 0)
  double se_d = 0.0;    // Monte Carlo standard errors
  double se_d_irr = 0.0;
  std::size_t sims = 0;
};

/// D = sum_j w_j tau_j with exact weights w_j proportional to
/// mu_{j,0}(1 - mu_{j,0}). tau_j is simulated: per draw, each edge i <- j
/// contributes Y*_{ij}(1) - Y*_{ij}(0), with j's period-0 value fixed at 1
/// and 0 while the other period-0 values and U_{i,1} keep their drawn values.
/// The two arms share U_{i,1}. Draws are keyed by (node id, simulation index)
/// and summed in fixed blocks, so the result does not depend on `threads`.
TrueDiffusion true_diffusion(const DirectedGraph& g, const Matrix& x, const DgpSpec& spec,
                             std::size_t sims, std::uint64_t seed,
                             std::span<const std::uint64_t> ids = {}, std::size_t threads = 0);

}  // namespace netdiff

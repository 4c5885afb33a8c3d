#include "netdiff/dgp.hpp"

#include <algorithm>
#include <cmath>

#include "netdiff/error.hpp"
#include "netdiff/kernels.hpp"
#include "netdiff/normal.hpp"
#include "netdiff/parallel.hpp"
#include "netdiff/rng.hpp"

namespace netdiff {

DgpSpec DgpSpec::low_dimensional(double delta0) {
  DgpSpec s;
  s.gamma0 = {0.1, -0.5, -0.7, 0.3, 0.1};
  s.delta0 = delta0;
  s.beta0 = {1.0, -1.0, -0.1, 0.1, 0.1};
  s.y0_mode = Y0Mode::Probit;
  return s;
}

DgpSpec DgpSpec::high_dimensional(double delta0, std::size_t p) {
  if (p < 5) throw Error(ErrorCode::InvalidSize, "high-dimensional design needs p >= 5");
  DgpSpec s;
  s.delta0 = delta0;
  s.beta0.assign(p, 0.0);
  const double head[] = {1.0, -1.0, -1.0, 1.0, 1.0};
  std::copy(std::begin(head), std::end(head), s.beta0.begin());
  s.y0_mode = Y0Mode::FixedBernoulli;
  s.pi0 = 0.3;
  return s;
}

std::vector<double> DgpSpec::mu0(const Matrix& x) const {
  std::vector<double> mu(x.rows());
  if (y0_mode == Y0Mode::FixedBernoulli) {
    std::fill(mu.begin(), mu.end(), pi0);
    return mu;
  }
  if (gamma0.size() != x.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "gamma0 length != covariate columns");
  }
  kernels::gemv(x, gamma0, mu);
  for (double& m : mu) m = normal_cdf(m);
  return mu;
}

Matrix gen_covariates(std::size_t n, std::size_t p, std::uint64_t seed) {
  if (n < 1 || p < 1) throw Error(ErrorCode::InvalidSize, "covariates need n, p >= 1");
  Rng rng(seed, {stream::kCovariates});
  Matrix x(n, p);
  for (double& v : x.data()) v = 1.0 + rng.normal();
  return x;
}

BinaryVector gen_y0(const Matrix& x, const DgpSpec& spec, std::uint64_t seed,
                    std::span<const std::uint64_t> ids) {
  if (!ids.empty() && ids.size() != x.rows()) {
    throw Error(ErrorCode::LengthMismatch, "ids length != covariate rows");
  }
  const auto mu = spec.mu0(x);
  const KeyedUniform draw(seed, {stream::kY0});
  BinaryVector y(x.rows());
  for (std::size_t j = 0; j < y.size(); ++j) y[j] = mu[j] >= draw(node_key(ids, j), 0) ? 1 : 0;
  return y;
}

BinaryVector gen_y1(const DirectedGraph& g, const BinaryVector& y0, const Matrix& x,
                    const DgpSpec& spec, std::uint64_t seed, std::span<const std::uint64_t> ids) {
  const std::size_t n = g.size();
  if (y0.size() != n || x.rows() != n) {
    throw Error(ErrorCode::DimensionMismatch, "graph, y0 and covariates disagree on n");
  }
  if (spec.beta0.size() != x.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "beta0 length != covariate columns");
  }
  if (!ids.empty() && ids.size() != n) {
    throw Error(ErrorCode::LengthMismatch, "ids length != node count");
  }
  const auto ybar = neighborhood_average(g, y0);
  std::vector<double> xb(n);
  kernels::gemv(x, spec.beta0, xb);
  const KeyedUniform draw(seed, {stream::kY1});
  BinaryVector y1(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = draw(node_key(ids, i), 0);
    const bool fires = v < normal_cdf(spec.delta0 * ybar[i] + xb[i]);
    y1[i] = (fires && !(spec.irreversible && y0[i] == 1)) ? 1 : 0;
  }
  return y1;
}

Panel gen_panel(const DirectedGraph& g, Matrix x, const DgpSpec& spec, std::uint64_t seed,
                std::vector<std::uint64_t> ids) {
  Panel p;
  p.y0 = gen_y0(x, spec, seed, ids);
  p.y1 = gen_y1(g, p.y0, x, spec, seed, ids);
  p.x = std::move(x);
  p.ids = std::move(ids);
  return p;
}

namespace {

struct Moments {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    ++count;
    const double d = v - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (v - mean);
  }

  void merge(const Moments& o) {
    if (o.count == 0) return;
    const double total = static_cast<double>(count + o.count);
    const double d = o.mean - mean;
    mean += d * static_cast<double>(o.count) / total;
    m2 += o.m2 + d * d * static_cast<double>(count) * static_cast<double>(o.count) / total;
    count += o.count;
  }

  double se() const {
    return count > 1 ? std::sqrt(m2 / static_cast<double>(count - 1) / static_cast<double>(count))
                     : 0.0;
  }
};

}  // namespace

TrueDiffusion true_diffusion(const DirectedGraph& g, const Matrix& x, const DgpSpec& spec,
                             std::size_t sims, std::uint64_t seed,
                             std::span<const std::uint64_t> ids, std::size_t threads) {
  if (sims < 1) throw Error(ErrorCode::InvalidSize, "true_diffusion needs sims >= 1");
  const std::size_t n = g.size();
  if (x.rows() != n) throw Error(ErrorCode::DimensionMismatch, "covariate rows != node count");
  if (spec.beta0.size() != x.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "beta0 length != covariate columns");
  }
  if (!ids.empty() && ids.size() != n) {
    throw Error(ErrorCode::LengthMismatch, "ids length != node count");
  }

  const auto mu = spec.mu0(x);
  double denom = 0.0;
  for (double m : mu) denom += m * (1.0 - m);
  if (!(denom > 0.0)) throw Error(ErrorCode::DegenerateWeights, "sum of mu(1-mu) is zero");
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j) w[j] = mu[j] * (1.0 - mu[j]) / denom;

  std::vector<double> xb(n);
  kernels::gemv(x, spec.beta0, xb);

  // fire[off[i] + s] = Phi(delta0 * s / d_i + x_i'beta0): Y*_{i,1} = 1 iff V_i < fire.
  std::vector<std::size_t> off(n + 1, 0);
  for (NodeId i = 0; i < n; ++i) {
    const std::size_t d = g.in_degree(i);
    off[i + 1] = off[i] + (d == 0 ? 0 : d + 1);
  }
  std::vector<double> fire(off[n]);
  for (NodeId i = 0; i < n; ++i) {
    const std::size_t d = g.in_degree(i);
    for (std::size_t s = 0; d > 0 && s <= d; ++s) {
      fire[off[i] + s] = normal_cdf(spec.delta0 * double(s) / double(d) + xb[i]);
    }
  }

  const KeyedUniform draw_y0(seed, {stream::kTruth, stream::kY0});
  const KeyedUniform draw_u1(seed, {stream::kTruth, stream::kY1});
  std::vector<std::uint64_t> state0(n), state1(n);
  for (std::size_t i = 0; i < n; ++i) {
    state0[i] = draw_y0.node_state(node_key(ids, i));
    state1[i] = draw_u1.node_state(node_key(ids, i));
  }

  const std::size_t blocks = std::min<std::size_t>(64, sims);
  std::vector<Moments> acc_d(blocks), acc_di(blocks);

  parallel_for(blocks, threads, [&](std::size_t b) {
    const std::size_t base = sims / blocks;
    const std::size_t extra = sims % blocks;
    const std::size_t first = b * base + std::min(b, extra);
    const std::size_t count = base + (b < extra ? 1 : 0);
    BinaryVector y0(n);
    for (std::size_t s = first; s < first + count; ++s) {
      for (std::size_t j = 0; j < n; ++j) y0[j] = mu[j] >= KeyedUniform::at(state0[j], s) ? 1 : 0;
      double d_s = 0.0;
      double di_s = 0.0;
      for (NodeId i = 0; i < n; ++i) {
        auto nb = g.in_neighbors(i);
        if (nb.empty()) continue;
        const double v = KeyedUniform::at(state1[i], s);
        const double* f = fire.data() + off[i];
        std::size_t total = 0;
        for (NodeId j : nb) total += y0[j];
        double edge_sum = 0.0;
        for (NodeId j : nb) {
          const std::size_t others = total - y0[j];
          const int hi = v < f[others + 1] ? 1 : 0;
          const int lo = v < f[others] ? 1 : 0;
          edge_sum += w[j] * static_cast<double>(hi - lo);
        }
        di_s += edge_sum;
        if (!(spec.irreversible && y0[i] == 1)) d_s += edge_sum;
      }
      acc_d[b].add(d_s);
      acc_di[b].add(di_s);
    }
  });

  Moments d, di;
  for (std::size_t b = 0; b < blocks; ++b) {
    d.merge(acc_d[b]);
    di.merge(acc_di[b]);
  }
  TrueDiffusion out;
  out.d = d.mean;
  out.d_irr = di.mean;
  out.se_d = d.se();
  out.se_d_irr = di.se();
  out.sims = sims;
  return out;
}

}  // namespace netdiff

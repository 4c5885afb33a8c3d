#include "netdiff/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "netdiff/error.hpp"
#include "netdiff/rng.hpp"

namespace netdiff {

namespace {

// Builds CSR offsets/neighbors from (row, col) pairs sorted by row then col.
void build_csr(std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& sorted,
               std::vector<std::size_t>& off, std::vector<NodeId>& nbrs) {
  off.assign(n + 1, 0);
  nbrs.resize(sorted.size());
  for (const auto& [row, col] : sorted) ++off[row + 1];
  std::partial_sum(off.begin(), off.end(), off.begin());
  for (std::size_t k = 0; k < sorted.size(); ++k) nbrs[k] = sorted[k].second;
}

}  // namespace

DirectedGraph::DirectedGraph(std::size_t n) : n_(n), in_off_(n + 1, 0), out_off_(n + 1, 0) {}

DirectedGraph DirectedGraph::from_edge_list(std::span<const Edge> edges, std::size_t n) {
  std::vector<std::pair<NodeId, NodeId>> in_pairs;
  in_pairs.reserve(edges.size());
  for (const Edge& e : edges) {
    if (e.target >= n || e.source >= n) {
      throw Error(ErrorCode::IndexOutOfRange,
                  "edge (" + std::to_string(e.target) + "," + std::to_string(e.source) +
                      ") outside [0," + std::to_string(n) + ")");
    }
    if (e.target == e.source) {
      throw Error(ErrorCode::SelfLoop, "self-loop on node " + std::to_string(e.target));
    }
    in_pairs.emplace_back(e.target, e.source);
  }
  std::sort(in_pairs.begin(), in_pairs.end());
  in_pairs.erase(std::unique(in_pairs.begin(), in_pairs.end()), in_pairs.end());

  std::vector<std::pair<NodeId, NodeId>> out_pairs;
  out_pairs.reserve(in_pairs.size());
  for (const auto& [t, s] : in_pairs) out_pairs.emplace_back(s, t);
  std::sort(out_pairs.begin(), out_pairs.end());

  DirectedGraph g;
  g.n_ = n;
  build_csr(n, in_pairs, g.in_off_, g.in_nbrs_);
  build_csr(n, out_pairs, g.out_off_, g.out_nbrs_);
  return g;
}

bool DirectedGraph::has_edge(NodeId target, NodeId source) const noexcept {
  if (target >= n_ || source >= n_) return false;
  auto nb = in_neighbors(target);
  return std::binary_search(nb.begin(), nb.end(), source);
}

std::vector<Edge> DirectedGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (NodeId i = 0; i < n_; ++i) {
    for (NodeId j : in_neighbors(i)) out.push_back({i, j});
  }
  return out;
}

DirectedGraph DirectedGraph::transposed() const {
  auto e = edges();
  for (Edge& x : e) std::swap(x.target, x.source);
  return from_edge_list(e, n_);
}

DirectedGraph DirectedGraph::permuted(std::span<const NodeId> perm) const {
  if (perm.size() != n_) throw Error(ErrorCode::LengthMismatch, "permutation length != n");
  auto e = edges();
  for (Edge& x : e) {
    x.target = perm[x.target];
    x.source = perm[x.source];
  }
  return from_edge_list(e, n_);
}

std::size_t UndirectedGraph::max_degree() const noexcept {
  std::size_t m = 0;
  for (const auto& a : adj) m = std::max(m, a.size());
  return m;
}

UndirectedGraph UndirectedGraph::symmetrize(const DirectedGraph& g) {
  UndirectedGraph u;
  u.adj.resize(g.size());
  for (NodeId i = 0; i < g.size(); ++i) {
    auto& a = u.adj[i];
    auto in = g.in_neighbors(i);
    auto out = g.out_neighbors(i);
    a.reserve(in.size() + out.size());
    std::set_union(in.begin(), in.end(), out.begin(), out.end(), std::back_inserter(a));
  }
  return u;
}

DegreeStats degree_stats(const DirectedGraph& g) {
  DegreeStats s;
  const std::size_t n = g.size();
  if (n == 0) return s;
  std::vector<std::size_t> in_deg(n);
  std::size_t max_deg = 0;
  for (NodeId i = 0; i < n; ++i) {
    in_deg[i] = g.in_degree(i);
    max_deg = std::max({max_deg, g.in_degree(i), g.out_degree(i)});
  }
  // Mean in-degree and mean out-degree both equal |E| / n.
  const double mean = static_cast<double>(g.edge_count()) / static_cast<double>(n);
  std::sort(in_deg.begin(), in_deg.end());
  s.max_deg = max_deg;
  s.avg_deg = mean;
  s.median_deg = n % 2 == 1 ? static_cast<double>(in_deg[n / 2])
                            : 0.5 * static_cast<double>(in_deg[n / 2 - 1] + in_deg[n / 2]);
  s.d_mx = std::max(1.0, static_cast<double>(max_deg));
  s.d_av = std::max(1.0, mean);
  return s;
}

std::vector<NodePair> overlap_pairs(const DirectedGraph& g) {
  const std::size_t n = g.size();
  std::size_t estimate = 0;
  for (NodeId k = 0; k < n; ++k) {
    const std::size_t r = g.out_degree(k) + 1;
    estimate += r * (r + 1) / 2;
  }
  std::vector<NodePair> pairs;
  pairs.reserve(estimate);
  std::vector<NodeId> group;
  for (NodeId k = 0; k < n; ++k) {
    auto out = g.out_neighbors(k);
    group.assign(out.begin(), out.end());
    group.insert(std::upper_bound(group.begin(), group.end(), k), k);
    for (std::size_t x = 0; x < group.size(); ++x) {
      for (std::size_t y = x; y < group.size(); ++y) pairs.push_back({group[x], group[y]});
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

std::vector<double> neighborhood_average(const DirectedGraph& g, std::span<const std::uint8_t> y) {
  if (y.size() != g.size()) {
    throw Error(ErrorCode::LengthMismatch, "outcome vector length != node count");
  }
  std::vector<double> out(g.size(), 0.0);
  for (NodeId i = 0; i < g.size(); ++i) {
    auto nb = g.in_neighbors(i);
    if (nb.empty()) continue;
    std::size_t s = 0;
    for (NodeId j : nb) s += y[j];
    out[i] = static_cast<double>(s) / static_cast<double>(nb.size());
  }
  return out;
}

std::vector<std::vector<NodeId>> greedy_partition(const UndirectedGraph& g) {
  const std::size_t n = g.size();
  constexpr std::size_t kUncolored = static_cast<std::size_t>(-1);
  std::vector<std::size_t> color(n, kUncolored);
  std::vector<std::size_t> seen_at;  // seen_at[c] == v  <=>  color c is used by a neighbor of v
  std::size_t n_colors = 0;
  for (NodeId v = 0; v < n; ++v) {
    for (NodeId u : g.adj[v]) {
      if (color[u] != kUncolored) seen_at[color[u]] = v;
    }
    std::size_t c = 0;
    while (c < n_colors && seen_at[c] == v) ++c;
    if (c == n_colors) {
      ++n_colors;
      seen_at.push_back(kUncolored);
    }
    color[v] = c;
  }
  std::vector<std::vector<NodeId>> classes(n == 0 ? 0 : n_colors);
  for (NodeId v = 0; v < n; ++v) classes[color[v]].push_back(v);
  return classes;
}

UndirectedGraph dependency_graph(std::span<const NodePair> pairs, std::size_t n) {
  UndirectedGraph u;
  u.adj.resize(n);
  for (const NodePair& p : pairs) {
    if (p.a == p.b) continue;
    u.adj[p.a].push_back(p.b);
    u.adj[p.b].push_back(p.a);
  }
  for (auto& a : u.adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  return u;
}

DirectedGraph erdos_renyi(std::size_t n, double lambda, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorCode::InvalidSize, "erdos_renyi requires n >= 2");
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidProbability, "lambda must be >= 0");
  const double p = lambda / static_cast<double>(n - 1);
  if (p > 1.0) throw Error(ErrorCode::InvalidProbability, "lambda/(n-1) exceeds 1");

  std::vector<Edge> edges;
  if (p > 0.0) {
    Rng rng(seed, {stream::kGraph});
    edges.reserve(static_cast<std::size_t>(lambda * static_cast<double>(n) * 1.2) + 16);
    for (NodeId i = 0; i < n; ++i) {
      for (NodeId j = 0; j < n; ++j) {
        if (i == j) continue;
        if (rng.uniform() < p) edges.push_back({i, j});
      }
    }
  }
  return DirectedGraph::from_edge_list(edges, n);
}

DirectedGraph barabasi_albert(std::size_t n, std::size_t m, std::uint64_t seed) {
  constexpr std::size_t kSeedSize = 20;
  if (n <= kSeedSize) throw Error(ErrorCode::InvalidSize, "barabasi_albert requires n > 20");
  if (m < 1 || m > kSeedSize) {
    throw Error(ErrorCode::InvalidSize, "barabasi_albert requires 1 <= m <= 20");
  }

  const DirectedGraph core = erdos_renyi(kSeedSize, 1.0, derive_seed(seed, {stream::kGraph, 0}));
  std::vector<Edge> edges;
  std::vector<std::size_t> degree(n, 0);  // undirected degree
  for (const auto& [t, s] : core.edges()) {
    if (core.has_edge(s, t) && s < t) continue;  // reciprocal pair counted once
    edges.push_back({t, s});
    edges.push_back({s, t});
    ++degree[t];
    ++degree[s];
  }

  Rng rng(seed, {stream::kGraph, 1});
  std::vector<double> weight;
  std::vector<NodeId> chosen;
  for (std::size_t v = kSeedSize; v < n; ++v) {
    weight.resize(v);
    for (std::size_t u = 0; u < v; ++u) weight[u] = degree[u] == 0 ? 1.0 : double(degree[u]);
    chosen.clear();
    while (chosen.size() < m) {
      std::discrete_distribution<std::size_t> pick(weight.begin(), weight.end());
      const auto u = static_cast<NodeId>(pick(rng.engine()));
      chosen.push_back(u);
      weight[u] = 0.0;  // sample without replacement
    }
    for (NodeId u : chosen) {
      edges.push_back({static_cast<NodeId>(v), u});
      edges.push_back({u, static_cast<NodeId>(v)});
      ++degree[u];
      ++degree[v];
    }
  }
  return DirectedGraph::from_edge_list(edges, n);
}

DirectedGraph drop_edges(const DirectedGraph& g, double drop_fraction, std::uint64_t seed) {
  if (!(drop_fraction >= 0.0 && drop_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidProbability, "drop fraction must lie in [0,1]");
  }
  auto e = g.edges();
  Rng rng(seed, {stream::kProxy});
  std::shuffle(e.begin(), e.end(), rng.engine());
  const auto drop = static_cast<std::size_t>(std::llround(drop_fraction * double(e.size())));
  e.resize(e.size() - drop);
  return DirectedGraph::from_edge_list(e, g.size());
}

}  // namespace netdiff

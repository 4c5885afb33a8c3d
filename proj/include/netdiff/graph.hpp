#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace netdiff {

using NodeId = std::uint32_t;

/// Directed edge `target <- source`: the period-0 outcome of `source`
/// influences the period-1 outcome of `target`.
struct Edge {
  NodeId target;
  NodeId source;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Immutable sparse directed graph in CSR form, with both in- and
/// out-adjacency. Neighbor lists are sorted. No self-loops, no duplicates.
class DirectedGraph {
 public:
  DirectedGraph() = default;
  explicit DirectedGraph(std::size_t n);

  /// Deduplicates the input. Throws IndexOutOfRange / SelfLoop.
  static DirectedGraph from_edge_list(std::span<const Edge> edges, std::size_t n);

  std::size_t size() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return in_nbrs_.size(); }

  /// N_G(i): nodes j with an edge i <- j.
  std::span<const NodeId> in_neighbors(NodeId i) const noexcept {
    return {in_nbrs_.data() + in_off_[i], in_off_[i + 1] - in_off_[i]};
  }
  /// N_G^O(j): nodes i with an edge i <- j.
  std::span<const NodeId> out_neighbors(NodeId j) const noexcept {
    return {out_nbrs_.data() + out_off_[j], out_off_[j + 1] - out_off_[j]};
  }
  std::size_t in_degree(NodeId i) const noexcept { return in_off_[i + 1] - in_off_[i]; }
  std::size_t out_degree(NodeId j) const noexcept { return out_off_[j + 1] - out_off_[j]; }

  bool has_edge(NodeId target, NodeId source) const noexcept;

  /// All edges ordered by (target, source).
  std::vector<Edge> edges() const;

  /// Every edge reversed.
  DirectedGraph transposed() const;

  /// Relabels node i as perm[i]; perm must be a permutation of 0..n-1.
  DirectedGraph permuted(std::span<const NodeId> perm) const;

  friend bool operator==(const DirectedGraph&, const DirectedGraph&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> in_off_{0};
  std::vector<NodeId> in_nbrs_;
  std::vector<std::size_t> out_off_{0};
  std::vector<NodeId> out_nbrs_;
};

/// Simple undirected graph as symmetric adjacency lists.
struct UndirectedGraph {
  std::vector<std::vector<NodeId>> adj;

  std::size_t size() const noexcept { return adj.size(); }
  std::size_t max_degree() const noexcept;

  /// Edge {i,j} whenever i <- j or j <- i.
  static UndirectedGraph symmetrize(const DirectedGraph& g);
};

struct DegreeStats {
  double d_mx = 1.0;   // 1 v max_i max(in_i, out_i)
  double d_av = 1.0;   // 1 v max(mean in, mean out)
  std::size_t max_deg = 0;
  double avg_deg = 0.0;     // mean in-degree (= mean out-degree)
  double median_deg = 0.0;  // median in-degree
};

DegreeStats degree_stats(const DirectedGraph& g);

/// Unordered node pair with a <= b.
struct NodePair {
  NodeId a;
  NodeId b;

  friend bool operator==(const NodePair&, const NodePair&) = default;
  friend auto operator<=>(const NodePair&, const NodePair&) = default;
};

/// All pairs {i1, i2} (diagonal included) whose closed in-neighborhoods
/// intersect, sorted and unique. Built by grouping R(k) = {k} u N_G^O(k):
/// i1 and i2 overlap iff both lie in some R(k).
std::vector<NodePair> overlap_pairs(const DirectedGraph& g);

/// Component i: mean of y over N_G(i); 0 for nodes without in-neighbors.
std::vector<double> neighborhood_average(const DirectedGraph& g, std::span<const std::uint8_t> y);

/// Greedy proper coloring in node order; uses at most 1 + max degree colors.
std::vector<std::vector<NodeId>> greedy_partition(const UndirectedGraph& g);

/// Undirected graph whose edges are the off-diagonal overlap pairs.
UndirectedGraph dependency_graph(std::span<const NodePair> pairs, std::size_t n);

// Random generators. Deterministic given the seed.

/// Each ordered pair (i, j), i != j, is an edge independently with
/// probability lambda / (n - 1).
DirectedGraph erdos_renyi(std::size_t n, double lambda, std::uint64_t seed);

/// Preferential attachment grown from a symmetrized E-R(20, 1) seed graph.
/// Each new vertex links to m distinct existing vertices drawn with
/// probability proportional to degree (degree-0 vertices weigh 1); every
/// link is stored in both directions.
DirectedGraph barabasi_albert(std::size_t n, std::size_t m, std::uint64_t seed);

/// Removes a uniformly chosen subset of round(drop_fraction * |E|) edges.
DirectedGraph drop_edges(const DirectedGraph& g, double drop_fraction, std::uint64_t seed);

}  // namespace netdiff

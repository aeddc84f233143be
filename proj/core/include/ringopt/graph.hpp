#pragma once

// Core graph model: latency matrices over a complete graph, undirected
// overlay topologies, rings (Hamiltonian cycles) and the weighted
// shortest-path / diameter machinery every builder is scored with.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ringopt {

using NodeId = std::int32_t;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Tolerance used when validating symmetry of latency matrices.
inline constexpr double kSymmetryTolerance = 1e-9;

/// Symmetric n x n matrix of one-way latencies in milliseconds. The diagonal
/// is zero and every off-diagonal entry is strictly positive.
class LatencyMatrix {
 public:
  LatencyMatrix() = default;

  /// Validates and adopts a row-major n*n buffer. Throws InvalidInput on a
  /// size mismatch, n < 2, asymmetry beyond kSymmetryTolerance, non-zero
  /// diagonal, or a non-positive / non-finite off-diagonal entry.
  static LatencyMatrix from_row_major(std::size_t n, std::vector<double> entries);

  std::size_t size() const { return n_; }
  double operator()(NodeId u, NodeId v) const {
    return data_[static_cast<std::size_t>(u) * n_ + static_cast<std::size_t>(v)];
  }
  std::span<const double> row(NodeId u) const {
    return {data_.data() + static_cast<std::size_t>(u) * n_, n_};
  }
  std::span<const double> data() const { return data_; }

  /// Mean over the n*(n-1) off-diagonal entries.
  double mean_off_diagonal() const;

  friend bool operator==(const LatencyMatrix&, const LatencyMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

struct Edge {
  NodeId u;
  NodeId v;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Undirected simple graph over nodes [0, n) with per-node degree tracking.
class Topology {
 public:
  Topology() = default;
  explicit Topology(std::size_t n);

  std::size_t size() const { return adjacency_.size(); }
  std::size_t edge_count() const { return edge_count_; }

  /// Adds {u, v}. Returns false (and changes nothing) when already present.
  /// Throws InvalidInput on a self-loop or an id outside [0, n).
  bool add_edge(NodeId u, NodeId v);
  /// Removes {u, v}. Returns false when the edge was absent.
  bool remove_edge(NodeId u, NodeId v);
  bool has_edge(NodeId u, NodeId v) const;

  std::size_t degree(NodeId v) const { return adjacency_[static_cast<std::size_t>(v)].size(); }
  std::size_t max_degree() const;
  std::span<const NodeId> neighbors(NodeId v) const {
    return adjacency_[static_cast<std::size_t>(v)];
  }

  /// Edge list with u < v, sorted lexicographically.
  std::vector<Edge> edges() const;

  /// Adds every edge of `other` (same node count required).
  void merge(const Topology& other);

  friend bool operator==(const Topology& a, const Topology& b);

 private:
  void check_node(NodeId v) const;

  std::vector<std::vector<NodeId>> adjacency_;
  std::size_t edge_count_ = 0;
};

/// Cyclic order over all n >= 3 nodes: one Hamiltonian cycle.
class Ring {
 public:
  Ring() = default;

  /// Throws InvalidInput unless `order` is a permutation of [0, n), n >= 3.
  static Ring from_order(std::vector<NodeId> order);

  std::size_t size() const { return order_.size(); }
  std::span<const NodeId> order() const { return order_; }
  NodeId operator[](std::size_t i) const { return order_[i]; }

  /// The n cycle edges (order[i], order[i+1 mod n]), normalized u < v.
  std::vector<Edge> edges() const;
  double total_weight(const LatencyMatrix& w) const;

  friend bool operator==(const Ring&, const Ring&) = default;

 private:
  std::vector<NodeId> order_;
};

/// Per-node overlay budget K. A K-ring overlay has undirected degree <= 2K:
/// each ring contributes one inbound and one outbound connection per node.
class DegreeBound {
 public:
  explicit DegreeBound(int k);

  /// ceil(log2 n), clamped to at least 1.
  static DegreeBound log2_ceil(std::size_t n);

  int k() const { return k_; }
  std::size_t max_degree() const { return 2 * static_cast<std::size_t>(k_); }

 private:
  int k_;
};

/// Dense n x n distance table; kInfinity marks unreachable pairs.
struct DistanceMatrix {
  std::size_t n = 0;
  std::vector<double> data;

  double operator()(NodeId u, NodeId v) const {
    return data[static_cast<std::size_t>(u) * n + static_cast<std::size_t>(v)];
  }
};

struct DiameterResult {
  double value = 0.0;
  /// Set when the topology has no edges; value is then 0.
  bool degenerate = false;
  std::size_t component_size = 0;
};

/// Weighted all-pairs shortest paths restricted to topology edges
/// (per-source Dijkstra). Throws InvalidInput on a size mismatch.
DistanceMatrix all_pairs_shortest(const Topology& topo, const LatencyMatrix& w);

/// Largest finite shortest-path distance inside the largest connected
/// component (ties on size go to the component holding the lowest id).
DiameterResult diameter(const Topology& topo, const LatencyMatrix& w);

/// Unweighted (hop-count) diameter of the largest component.
std::size_t hop_diameter(const Topology& topo);

/// Component label per node, labels assigned in order of lowest member id.
std::vector<int> component_labels(const Topology& topo);
std::size_t component_count(const Topology& topo);
bool is_connected(const Topology& topo);
/// Members of the largest component, ascending.
std::vector<NodeId> largest_component(const Topology& topo);

/// topo with every ring edge added; already-present edges are kept once.
Topology apply_ring(Topology topo, const Ring& ring);

/// Topology consisting of exactly the ring's edges.
Topology ring_topology(const Ring& ring);

/// True iff every node degree <= 2k.
bool check_degree(const Topology& topo, DegreeBound bound);

/// Sum of edge latencies.
double total_weight(const Topology& topo, const LatencyMatrix& w);

// CSV latency matrix: first line n, then n rows of n comma-separated values.
void write_matrix_csv(std::ostream& out, const LatencyMatrix& w);
/// Parses and validates; throws FormatError naming the offending row/col.
LatencyMatrix read_matrix_csv(std::istream& in);

// Edge-list topology file: first line n, then `u,v,w_uv` rows.
void write_edge_list(std::ostream& out, const Topology& topo, const LatencyMatrix& w);
/// Reads an edge list; the weight column is ignored on load.
Topology read_edge_list(std::istream& in);

/// Shortest round-trip decimal rendering of a double.
std::string format_double(double value);

}  // namespace ringopt

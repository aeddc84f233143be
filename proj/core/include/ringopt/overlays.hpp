#pragma once

// Baseline overlay builders: random and nearest-neighbor rings, RAPID-style
// K-rings, random/shortest ring mixes, Chord and Perigee-style
// nearest-peer graphs. Every builder is a pure function of its inputs.

#include <cstddef>
#include <span>
#include <vector>

#include "ringopt/graph.hpp"
#include "ringopt/rng.hpp"

namespace ringopt {

enum class RingKind { Random, NearestNeighbor };

const char* to_string(RingKind kind);

/// Ring order induced by a seeded uniform shuffle of [0, n). Requires n >= 3.
Ring random_ring(std::size_t n, Seed seed);

/// Greedy tour: from the current node step to the closest unvisited node
/// (ties to the lowest id) and finally close back to `start`.
Ring nearest_neighbor_ring(const LatencyMatrix& w, NodeId start);

/// Greedy tour that prefers nodes whose edge from the current node is not in
/// `existing`; falls back to the plain nearest unvisited node when every
/// candidate edge is already present.
Ring nearest_neighbor_ring_avoiding(const LatencyMatrix& w, NodeId start, const Topology& existing);

/// Union of k random rings seeded seed+0, ..., seed+k-1.
Topology rapid_k_ring(std::size_t n, DegreeBound k, Seed seed);

struct RingMix {
  int random = 0;
  int shortest = 0;
};

enum class OverlayMethod { Chord, Rapid, Perigee, KRingMix };

struct OverlaySpec {
  OverlayMethod method = OverlayMethod::KRingMix;
  std::size_t n = 0;
  DegreeBound k{1};
  RingMix mix;
};

/// Start nodes for the shortest rings of a mix: the first `count` entries
/// of a seeded shuffle of [0, n).
std::vector<NodeId> mix_shortest_starts(std::size_t n, std::size_t count, Seed seed);

/// mix.random random rings (seeded as in rapid_k_ring) followed by
/// mix.shortest nearest-neighbor rings from distinct seeded starts, each
/// avoiding edges already placed. Throws InvalidInput when the mix does not
/// sum to k, has negative counts, or mix.shortest > n - 1.
Topology k_ring_mix(const LatencyMatrix& w, const OverlaySpec& spec, Seed seed);

/// Chord identifier circle laid out by `order`: successor edges plus finger
/// edges at offsets 2^j, j = 1 .. floor(log2 n) - 1. Requires n >= 4.
Topology chord_from_order(std::span<const NodeId> order);

/// Chord over a seeded random identifier permutation.
Topology chord_topology(std::size_t n, Seed seed);

/// Every node links to its d_out lowest-latency peers (ties to the lowest
/// id). Connectivity is not guaranteed.
Topology perigee_topology(const LatencyMatrix& w, std::size_t d_out);

struct RingRecord {
  RingKind kind;
  Ring ring;
};

/// A base topology plus a bounded set of rings with recorded provenance, so
/// a ring can later be swapped out without disturbing other edges.
class RingOverlay {
 public:
  RingOverlay(Topology base, std::size_t ring_capacity);

  std::size_t size() const { return base_.size(); }
  std::size_t ring_capacity() const { return capacity_; }
  std::span<const RingRecord> rings() const { return rings_; }
  const Topology& base() const { return base_; }

  bool full() const { return rings_.size() >= capacity_; }

  /// Appends a ring. Throws InvalidInput when already at capacity.
  void add_ring(RingKind kind, Ring ring);

  /// Replaces the most recently added ring of kind `victim` with `ring`.
  /// Returns false if no ring of that kind exists.
  bool replace_latest(RingKind victim, RingKind kind, Ring ring);

  /// Base edges united with the edges of every recorded ring.
  Topology topology() const;

  std::size_t count(RingKind kind) const;

 private:
  Topology base_;
  std::size_t capacity_;
  std::vector<RingRecord> rings_;
};

}  // namespace ringopt

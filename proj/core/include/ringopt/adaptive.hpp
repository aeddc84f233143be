#pragma once

// Decentralized ring selection: nodes sample latencies to their neighbors
// and to random peers, the network averages those samples by gossip, and
// the ratio
//
//   rho = (avg_local - avg_min) / (avg_global - avg_min)
//
// tells whether the overlay is latency-clustered (rho near 0) or random
// (rho near 1). A clustered overlay receives a random ring, a random one
// receives a nearest-neighbor ring.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ringopt/graph.hpp"
#include "ringopt/overlays.hpp"
#include "ringopt/rng.hpp"

namespace ringopt::adaptive {

struct NodeStats {
  double l_local = 0.0;   // mean latency to sampled neighbors
  double l_global = 0.0;  // mean latency to sampled peers
  double l_min = 0.0;     // smallest of the peer samples
};

struct AggregateStats {
  double avg_local = 0.0;
  double avg_global = 0.0;
  double avg_min = 0.0;
  std::size_t message_count = 0;
  /// Largest deviation of any participating node's estimate from the
  /// reported value, over the three averages.
  double spread = 0.0;
};

enum class SwapAction { AddRandomRing, AddShortestRing, Keep };

const char* to_string(SwapAction action);

struct SwapDecision {
  SwapAction action = SwapAction::Keep;
  /// NaN when the ratio is undefined (uniform network).
  double rho = 0.0;
};

/// Samples k_samples neighbors and k_samples non-self peers, both with
/// replacement. Throws InvalidInput for an isolated node or k_samples = 0.
NodeStats measure_node(NodeId u, const Topology& topo, const LatencyMatrix& w, std::size_t k_samples, Seed seed);

/// measure_node for every node with a neighbor, seeds derived per node.
/// Isolated nodes get std::nullopt.
std::vector<std::optional<NodeStats>> measure_all(const Topology& topo, const LatencyMatrix& w,
                                                  std::size_t k_samples, Seed seed);

/// Synchronous push-sum gossip over the largest component: every round each
/// node keeps half of its (sums, weight) mass and pushes the other half to a
/// uniformly chosen neighbor. The reported averages are the estimate held by
/// the lowest-id member; `spread` bounds every member's error.
AggregateStats gossip_aggregate(std::span<const std::optional<NodeStats>> stats, const Topology& topo,
                                std::size_t rounds, Seed seed);

/// Exact arithmetic means over the largest component (the gossip oracle).
AggregateStats central_aggregate(std::span<const std::optional<NodeStats>> stats, const Topology& topo);

/// Degenerate-denominator threshold for rho.
inline constexpr double kRhoEpsilon = 1e-9;

/// std::nullopt when avg_global - avg_min < kRhoEpsilon.
std::optional<double> rho(const AggregateStats& agg);

/// rho < threshold => AddRandomRing; rho > 1 - threshold => AddShortestRing;
/// Keep otherwise (boundaries included). `inverted` swaps the two ring
/// choices. Throws InvalidInput unless threshold lies in (0, 0.5).
SwapDecision select_ring_action(double rho_value, double threshold, bool inverted = false);

/// Decision for a possibly undefined ratio (undefined => Keep).
SwapDecision select_ring_action(std::optional<double> rho_value, double threshold, bool inverted = false);

/// Applies a decision. Below ring capacity the new ring is appended;
/// at capacity it replaces the most recently added ring of the opposite
/// kind (nothing changes when no such ring exists). Random rings come from
/// random_ring(n, seed); shortest rings start at a seeded node.
RingOverlay apply_decision(RingOverlay overlay, const LatencyMatrix& w, const SwapDecision& decision, Seed seed);

/// Plain-topology form: Keep returns topo, otherwise topo united with the
/// chosen ring.
Topology apply_decision(const Topology& topo, const LatencyMatrix& w, const SwapDecision& decision, Seed seed);

struct AdaptiveConfig {
  double threshold = 0.2;
  /// 0 selects ceil(log2 n).
  std::size_t k_samples = 0;
  /// 0 selects 2 * ceil(log2 n) * hop diameter.
  std::size_t rounds = 0;
  bool inverted = false;
};

struct AdaptiveReport {
  AggregateStats aggregate;
  SwapDecision decision;
  std::size_t k_samples = 0;
  std::size_t rounds = 0;
};

/// Measurement, gossip, ratio and decision in one pass.
AdaptiveReport assess(const Topology& topo, const LatencyMatrix& w, const AdaptiveConfig& config, Seed seed);

}  // namespace ringopt::adaptive

#pragma once

// Sequential K-ring construction as an episodic decision process. The state
// is (latency matrix, partial topology, current tour node); an action picks
// the next node of the ring under construction. Each ring is walked from its
// start node through every node and closed back to the start; the next ring
// then begins at a fresh seeded start node on top of the same partial
// topology.

#include <cstddef>
#include <memory>
#include <vector>

#include "ringopt/graph.hpp"
#include "ringopt/rng.hpp"

namespace ringopt::qlearn {

struct EpisodeState {
  std::shared_ptr<const LatencyMatrix> w;
  Topology partial;
  NodeId current = 0;
  int ring_index = 0;
  int k = 1;
  std::vector<char> visited;
  std::size_t visited_count = 0;
  /// Start node of every ring; ring_starts[ring_index] is the active start.
  std::vector<NodeId> ring_starts;
  bool terminated = false;

  std::size_t size() const { return partial.size(); }
  NodeId start() const { return ring_starts[static_cast<std::size_t>(ring_index)]; }
  bool is_visited(NodeId v) const { return visited[static_cast<std::size_t>(v)] != 0; }
  std::size_t degree_cap() const { return 2 * static_cast<std::size_t>(k); }
};

/// Ring start nodes: `first` for ring 0, then the next entries of a seeded
/// shuffle of the remaining nodes (wrapping when k > n).
std::vector<NodeId> ring_start_nodes(std::size_t n, int k, NodeId first, Seed seed);

/// Fresh episode with an empty partial topology. Throws InvalidInput when
/// n < 3 or start is out of range.
EpisodeState begin_episode(std::shared_ptr<const LatencyMatrix> w, DegreeBound k, NodeId start, Seed ring_seed);

/// Nodes that may follow `current`: unvisited, not already adjacent to
/// `current`, and below the 2K degree cap. Once every node is visited the
/// only candidate is the closing edge back to the ring's start. Empty when
/// the episode has terminated or is stuck.
std::vector<NodeId> legal_actions(const EpisodeState& s);

struct StepInfo {
  bool ring_closed = false;
  /// The episode ended: all K rings closed or no legal action remains.
  bool terminal = false;
  /// Ended with no legal action before all rings closed.
  bool stuck = false;
};

/// Applies an action that must be legal (throws InvalidInput otherwise).
StepInfo advance(EpisodeState& s, NodeId action);

/// (d_prev - d_next) - alpha * edge_w.
double step_reward(double d_prev, double d_next, double edge_w, double alpha);

/// Episode decisions recorded compactly; any prefix can be replayed into
/// the state reached after that many actions.
struct EpisodeTrace {
  std::shared_ptr<const LatencyMatrix> w;
  int k = 1;
  std::vector<NodeId> ring_starts;
  std::vector<NodeId> actions;

  EpisodeState replay(std::size_t steps) const;
};

}  // namespace ringopt::qlearn

#pragma once

// Partitioned ring construction: nodes are split into M partitions, each
// partition orders its members into an open path independently, and the
// paths are stitched end to start into one Hamiltonian cycle. Nodes left
// over by the integer division are inserted afterwards.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ringopt/graph.hpp"
#include "ringopt/qlearn/params.hpp"
#include "ringopt/rng.hpp"

namespace ringopt::parallel {

enum class PartitionMode { Stride, Block };
enum class LeftoverMode { Seam, Append };

struct PartitionPlan {
  std::size_t n = 0;
  std::size_t m = 0;
  /// Seeded random ring order the partitions are cut from.
  std::vector<NodeId> ring_order;
  /// Members of every partition in ring order; the first member starts
  /// the partition's path.
  std::vector<std::vector<NodeId>> partitions;
  /// n mod m nodes not assigned to any partition.
  std::vector<NodeId> leftovers;
  /// Partition id per node, -1 for leftovers.
  std::vector<int> assignment;
};

/// Stride mode puts ring position i in partition i mod m; block mode gives
/// each partition a contiguous run of floor(n / m) positions. The final
/// n mod m positions become leftovers. Requires 1 <= m <= n / 2 (m = 1 is
/// the sequential case).
PartitionPlan make_partitions(std::size_t n, std::size_t m, Seed seed, PartitionMode mode = PartitionMode::Stride);

/// Chooses the next node of a partition path.
class NodeSelector {
 public:
  virtual ~NodeSelector() = default;
  /// `candidates` is non-empty; `partial` holds edges placed so far by this
  /// partition (plus any earlier rings).
  virtual NodeId select(const LatencyMatrix& w, const Topology& partial, NodeId current,
                        std::span<const NodeId> candidates) const = 0;
};

/// Lowest latency from the current node, ties to the lowest id.
class NearestNeighborSelector final : public NodeSelector {
 public:
  NodeId select(const LatencyMatrix& w, const Topology& partial, NodeId current,
                std::span<const NodeId> candidates) const override;
};

/// Highest Q value under trained parameters, evaluated on the full matrix
/// with actions restricted to the partition.
class QGreedySelector final : public NodeSelector {
 public:
  explicit QGreedySelector(const qlearn::EmbedParams& params) : params_(params) {}
  NodeId select(const LatencyMatrix& w, const Topology& partial, NodeId current,
                std::span<const NodeId> candidates) const override;

 private:
  const qlearn::EmbedParams& params_;
};

struct BuildOptions {
  LeftoverMode leftover_mode = LeftoverMode::Seam;
  /// Worker threads for partition paths; 0 reads RINGOPT_THREADS and falls
  /// back to the hardware concurrency.
  std::size_t threads = 0;
};

struct BuildStats {
  /// Node placements over all partitions plus leftover insertions (= n).
  std::size_t selector_steps = 0;
  /// Longest sequential chain: largest partition plus leftover insertions.
  std::size_t longest_chain = 0;
};

/// Thread count from RINGOPT_THREADS, else hardware concurrency (>= 1).
std::size_t default_thread_count();

/// Builds one ring from `plan`. Identical output for any thread count.
Ring parallel_ring(const LatencyMatrix& w, const PartitionPlan& plan, const NodeSelector& selector,
                   const BuildOptions& options = {}, BuildStats* stats = nullptr,
                   const Topology* existing = nullptr);

/// Union of k parallel rings, plan i seeded from seed + i.
Topology parallel_k_ring(const LatencyMatrix& w, DegreeBound k, std::size_t m, const NodeSelector& selector,
                         Seed seed, PartitionMode mode = PartitionMode::Stride, const BuildOptions& options = {},
                         BuildStats* stats = nullptr);

}  // namespace ringopt::parallel

#include "ringopt/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <thread>

#include "ringopt/errors.hpp"
#include "ringopt/qlearn/network.hpp"

namespace ringopt::parallel {

PartitionPlan make_partitions(std::size_t n, std::size_t m, Seed seed, PartitionMode mode) {
  if (n < 3) throw InvalidInput("partitioning needs n >= 3");
  if (m < 1 || (m > 1 && m > n / 2)) {
    throw InvalidInput("partition count " + std::to_string(m) + " outside [1, " + std::to_string(n / 2) + "]");
  }
  PartitionPlan plan;
  plan.n = n;
  plan.m = m;
  plan.ring_order.resize(n);
  std::iota(plan.ring_order.begin(), plan.ring_order.end(), NodeId{0});
  Rng rng(seed);
  shuffle(std::span<NodeId>(plan.ring_order), rng);
  plan.partitions.assign(m, {});
  plan.assignment.assign(n, -1);
  const std::size_t per = n / m;
  const std::size_t assigned = per * m;
  for (std::size_t i = 0; i < assigned; ++i) {
    const std::size_t part = mode == PartitionMode::Stride ? i % m : i / per;
    const NodeId v = plan.ring_order[i];
    plan.partitions[part].push_back(v);
    plan.assignment[static_cast<std::size_t>(v)] = static_cast<int>(part);
  }
  plan.leftovers.assign(plan.ring_order.begin() + static_cast<std::ptrdiff_t>(assigned), plan.ring_order.end());
  return plan;
}

NodeId NearestNeighborSelector::select(const LatencyMatrix& w, const Topology&, NodeId current,
                                       std::span<const NodeId> candidates) const {
  NodeId best = candidates.front();
  for (const NodeId v : candidates) {
    if (w(current, v) < w(current, best) || (w(current, v) == w(current, best) && v < best)) best = v;
  }
  return best;
}

NodeId QGreedySelector::select(const LatencyMatrix& w, const Topology& partial, NodeId current,
                               std::span<const NodeId> candidates) const {
  const qlearn::GraphView g{w, qlearn::latency_scale(w, params_.config), partial};
  std::vector<NodeId> sorted(candidates.begin(), candidates.end());
  std::sort(sorted.begin(), sorted.end());
  return qlearn::argmax_action(g, current, sorted, params_);
}

std::size_t default_thread_count() {
  if (const char* env = std::getenv("RINGOPT_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

// Open path over one partition's members, starting at its first member.
std::vector<NodeId> build_path(const LatencyMatrix& w, std::span<const NodeId> members, const NodeSelector& selector,
                               const Topology* existing) {
  Topology partial = existing ? *existing : Topology(w.size());
  std::vector<NodeId> path{members.front()};
  std::vector<NodeId> remaining(members.begin() + 1, members.end());
  std::vector<NodeId> preferred;
  while (!remaining.empty()) {
    const NodeId current = path.back();
    // Prefer candidates that do not duplicate an edge already placed.
    preferred.clear();
    for (const NodeId v : remaining) {
      if (!partial.has_edge(current, v)) preferred.push_back(v);
    }
    const std::span<const NodeId> pool = preferred.empty() ? std::span<const NodeId>(remaining) : preferred;
    const NodeId next = selector.select(w, partial, current, pool);
    partial.add_edge(current, next);
    path.push_back(next);
    remaining.erase(std::find(remaining.begin(), remaining.end(), next));
  }
  return path;
}

}  // namespace

Ring parallel_ring(const LatencyMatrix& w, const PartitionPlan& plan, const NodeSelector& selector,
                   const BuildOptions& options, BuildStats* stats, const Topology* existing) {
  if (plan.n != w.size()) throw InvalidInput("partition plan does not match matrix size");
  if (existing && existing->size() != w.size()) throw InvalidInput("existing topology size mismatch");
  std::vector<std::vector<NodeId>> paths(plan.m);
  const std::size_t threads = std::min(options.threads ? options.threads : default_thread_count(), plan.m);
  if (threads <= 1) {
    for (std::size_t i = 0; i < plan.m; ++i) paths[i] = build_path(w, plan.partitions[i], selector, existing);
  } else {
    // Partition i goes to worker i mod threads; each writes only paths[i].
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      workers.emplace_back([&, t] {
        for (std::size_t i = t; i < plan.m; i += threads) paths[i] = build_path(w, plan.partitions[i], selector, existing);
      });
    }
  }

  // Stitch: last(P_i) -> first(P_{i+1}); seams are the stitch edges.
  std::vector<NodeId> cycle;
  cycle.reserve(plan.n);
  std::vector<std::size_t> seam_after;  // index in `cycle` after which a seam begins
  for (const auto& path : paths) {
    cycle.insert(cycle.end(), path.begin(), path.end());
    seam_after.push_back(cycle.size() - 1);
  }
  for (const NodeId x : plan.leftovers) {
    std::size_t pos = cycle.size() - 1;  // append: between the last node and cycle[0]
    if (options.leftover_mode == LeftoverMode::Seam) {
      double best = kInfinity;
      for (const std::size_t s : seam_after) {
        const NodeId a = cycle[s];
        const NodeId b = cycle[(s + 1) % cycle.size()];
        const double cost = w(a, x) + w(x, b);
        if (cost < best) {
          best = cost;
          pos = s;
        }
      }
    }
    cycle.insert(cycle.begin() + static_cast<std::ptrdiff_t>(pos) + 1, x);
    // Shift seam indices past the insertion; the split seam becomes two seams.
    for (std::size_t& s : seam_after) {
      if (s > pos) ++s;
    }
    seam_after.push_back(pos + 1);
    std::sort(seam_after.begin(), seam_after.end());
  }

  if (stats) {
    std::size_t largest = 0;
    for (const auto& p : plan.partitions) largest = std::max(largest, p.size());
    stats->selector_steps = plan.n;
    stats->longest_chain = largest + plan.leftovers.size();
  }
  return Ring::from_order(std::move(cycle));
}

Topology parallel_k_ring(const LatencyMatrix& w, DegreeBound k, std::size_t m, const NodeSelector& selector, Seed seed,
                         PartitionMode mode, const BuildOptions& options, BuildStats* stats) {
  Topology topo(w.size());
  BuildStats total;
  for (int i = 0; i < k.k(); ++i) {
    const PartitionPlan plan = make_partitions(w.size(), m, Seed{seed.value + static_cast<std::uint64_t>(i)}, mode);
    BuildStats one;
    const Ring ring = parallel_ring(w, plan, selector, options, &one, &topo);
    topo = apply_ring(std::move(topo), ring);
    total.selector_steps += one.selector_steps;
    total.longest_chain += one.longest_chain;
  }
  if (stats) *stats = total;
  return topo;
}

}  // namespace ringopt::parallel

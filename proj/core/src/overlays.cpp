#include "ringopt/overlays.hpp"

#include <algorithm>
#include <numeric>

#include "ringopt/errors.hpp"

namespace ringopt {

const char* to_string(RingKind kind) {
  switch (kind) {
    case RingKind::Random: return "random";
    case RingKind::NearestNeighbor: return "shortest";
  }
  return "?";
}

namespace {

std::vector<NodeId> iota_nodes(std::size_t n) {
  std::vector<NodeId> v(n);
  std::iota(v.begin(), v.end(), NodeId{0});
  return v;
}

std::vector<NodeId> shuffled_nodes(std::size_t n, Seed seed) {
  auto v = iota_nodes(n);
  Rng rng(seed);
  shuffle(std::span<NodeId>(v), rng);
  return v;
}

Ring greedy_tour(const LatencyMatrix& w, NodeId start, const Topology* existing) {
  const std::size_t n = w.size();
  if (n < 3) throw InvalidInput("nearest-neighbor ring needs n >= 3");
  if (start < 0 || static_cast<std::size_t>(start) >= n) throw InvalidInput("start node out of range");
  std::vector<char> visited(n, 0);
  std::vector<NodeId> order;
  order.reserve(n);
  NodeId current = start;
  visited[static_cast<std::size_t>(start)] = 1;
  order.push_back(start);
  while (order.size() < n) {
    NodeId best = -1;
    NodeId fallback = -1;
    for (std::size_t v = 0; v < n; ++v) {
      if (visited[v]) continue;
      const auto vv = static_cast<NodeId>(v);
      if (fallback < 0 || w(current, vv) < w(current, fallback)) fallback = vv;
      if (existing && existing->has_edge(current, vv)) continue;
      if (best < 0 || w(current, vv) < w(current, best)) best = vv;
    }
    const NodeId next = best >= 0 ? best : fallback;
    visited[static_cast<std::size_t>(next)] = 1;
    order.push_back(next);
    current = next;
  }
  return Ring::from_order(std::move(order));
}

}  // namespace

Ring random_ring(std::size_t n, Seed seed) {
  if (n < 3) throw InvalidInput("random ring needs n >= 3, got " + std::to_string(n));
  return Ring::from_order(shuffled_nodes(n, seed));
}

Ring nearest_neighbor_ring(const LatencyMatrix& w, NodeId start) { return greedy_tour(w, start, nullptr); }

Ring nearest_neighbor_ring_avoiding(const LatencyMatrix& w, NodeId start, const Topology& existing) {
  if (existing.size() != w.size()) throw InvalidInput("topology/matrix size mismatch");
  return greedy_tour(w, start, &existing);
}

Topology rapid_k_ring(std::size_t n, DegreeBound k, Seed seed) {
  if (n < 3) throw InvalidInput("rapid_k_ring needs n >= 3");
  Topology topo(n);
  for (int i = 0; i < k.k(); ++i) {
    topo = apply_ring(std::move(topo), random_ring(n, Seed{seed.value + static_cast<std::uint64_t>(i)}));
  }
  return topo;
}

std::vector<NodeId> mix_shortest_starts(std::size_t n, std::size_t count, Seed seed) {
  auto order = shuffled_nodes(n, derive_seed(seed, {0x73686f72ULL}));
  order.resize(std::min(count, n));
  return order;
}

Topology k_ring_mix(const LatencyMatrix& w, const OverlaySpec& spec, Seed seed) {
  const std::size_t n = w.size();
  if (spec.method != OverlayMethod::KRingMix) throw InvalidInput("k_ring_mix requires a KRingMix spec");
  if (spec.n != n) throw InvalidInput("overlay spec n does not match latency matrix");
  if (spec.mix.random < 0 || spec.mix.shortest < 0) throw InvalidInput("ring mix counts must be non-negative");
  if (spec.mix.random + spec.mix.shortest != spec.k.k()) throw InvalidInput("ring mix must sum to k");
  if (static_cast<std::size_t>(spec.mix.shortest) > n - 1) {
    throw InvalidInput("infeasible mix: " + std::to_string(spec.mix.shortest) + " shortest rings over " +
                       std::to_string(n) + " nodes");
  }
  if (n < 3) throw InvalidInput("k_ring_mix needs n >= 3");
  Topology topo(n);
  for (int i = 0; i < spec.mix.random; ++i) {
    topo = apply_ring(std::move(topo), random_ring(n, Seed{seed.value + static_cast<std::uint64_t>(i)}));
  }
  for (const NodeId start : mix_shortest_starts(n, static_cast<std::size_t>(spec.mix.shortest), seed)) {
    topo = apply_ring(std::move(topo), nearest_neighbor_ring_avoiding(w, start, topo));
  }
  return topo;
}

Topology chord_from_order(std::span<const NodeId> order) {
  const std::size_t n = order.size();
  if (n < 4) throw InvalidInput("chord needs n >= 4, got " + std::to_string(n));
  int log2n = 0;
  while ((std::size_t{1} << (log2n + 1)) <= n) ++log2n;
  Topology topo(n);
  for (std::size_t i = 0; i < n; ++i) {
    topo.add_edge(order[i], order[(i + 1) % n]);
    for (int j = 1; j <= log2n - 1; ++j) {
      const std::size_t target = (i + (std::size_t{1} << j)) % n;
      if (order[target] != order[i]) topo.add_edge(order[i], order[target]);
    }
  }
  return topo;
}

Topology chord_topology(std::size_t n, Seed seed) {
  if (n < 4) throw InvalidInput("chord needs n >= 4, got " + std::to_string(n));
  const auto order = shuffled_nodes(n, seed);
  return chord_from_order(order);
}

Topology perigee_topology(const LatencyMatrix& w, std::size_t d_out) {
  const std::size_t n = w.size();
  if (d_out < 1 || d_out >= n) throw InvalidInput("perigee d_out must be in [1, n)");
  Topology topo(n);
  std::vector<NodeId> peers;
  for (std::size_t u = 0; u < n; ++u) {
    const auto uu = static_cast<NodeId>(u);
    peers.clear();
    for (std::size_t v = 0; v < n; ++v) {
      if (v != u) peers.push_back(static_cast<NodeId>(v));
    }
    std::partial_sort(peers.begin(), peers.begin() + static_cast<std::ptrdiff_t>(d_out), peers.end(),
                      [&](NodeId a, NodeId b) { return w(uu, a) != w(uu, b) ? w(uu, a) < w(uu, b) : a < b; });
    for (std::size_t i = 0; i < d_out; ++i) topo.add_edge(uu, peers[i]);
  }
  return topo;
}

// ---------------------------------------------------------------------------
// RingOverlay

RingOverlay::RingOverlay(Topology base, std::size_t ring_capacity)
    : base_(std::move(base)), capacity_(ring_capacity) {}

void RingOverlay::add_ring(RingKind kind, Ring ring) {
  if (full()) throw InvalidInput("ring overlay already holds its capacity of rings");
  if (ring.size() != base_.size()) throw InvalidInput("ring size does not match overlay");
  rings_.push_back({kind, std::move(ring)});
}

bool RingOverlay::replace_latest(RingKind victim, RingKind kind, Ring ring) {
  if (ring.size() != base_.size()) throw InvalidInput("ring size does not match overlay");
  for (auto it = rings_.rbegin(); it != rings_.rend(); ++it) {
    if (it->kind == victim) {
      rings_.erase(std::next(it).base());
      rings_.push_back({kind, std::move(ring)});
      return true;
    }
  }
  return false;
}

Topology RingOverlay::topology() const {
  Topology topo = base_;
  for (const auto& r : rings_) topo = apply_ring(std::move(topo), r.ring);
  return topo;
}

std::size_t RingOverlay::count(RingKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(rings_.begin(), rings_.end(), [&](const RingRecord& r) { return r.kind == kind; }));
}

}  // namespace ringopt

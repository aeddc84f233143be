#include "ringopt/adaptive.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "ringopt/errors.hpp"

namespace ringopt::adaptive {

const char* to_string(SwapAction action) {
  switch (action) {
    case SwapAction::AddRandomRing: return "add-random-ring";
    case SwapAction::AddShortestRing: return "add-shortest-ring";
    case SwapAction::Keep: return "keep";
  }
  return "?";
}

NodeStats measure_node(NodeId u, const Topology& topo, const LatencyMatrix& w, std::size_t k_samples, Seed seed) {
  if (topo.size() != w.size()) throw InvalidInput("topology/matrix size mismatch");
  if (k_samples == 0) throw InvalidInput("k_samples must be >= 1");
  const auto neighbors = topo.neighbors(u);
  if (neighbors.empty()) throw InvalidInput("node " + std::to_string(u) + " is isolated; cannot sample neighbors");
  const std::size_t n = topo.size();
  Rng rng(seed);
  NodeStats s;
  double local = 0.0;
  for (std::size_t i = 0; i < k_samples; ++i) local += w(u, neighbors[uniform_below(rng, neighbors.size())]);
  double global = 0.0;
  double lo = kInfinity;
  for (std::size_t i = 0; i < k_samples; ++i) {
    // Uniform over the n - 1 other nodes.
    auto v = static_cast<NodeId>(uniform_below(rng, n - 1));
    if (v >= u) ++v;
    const double x = w(u, v);
    global += x;
    lo = std::min(lo, x);
  }
  s.l_local = local / static_cast<double>(k_samples);
  s.l_global = global / static_cast<double>(k_samples);
  s.l_min = lo;
  return s;
}

std::vector<std::optional<NodeStats>> measure_all(const Topology& topo, const LatencyMatrix& w,
                                                  std::size_t k_samples, Seed seed) {
  std::vector<std::optional<NodeStats>> out(topo.size());
  for (std::size_t v = 0; v < topo.size(); ++v) {
    const auto vv = static_cast<NodeId>(v);
    if (topo.degree(vv) == 0) continue;
    out[v] = measure_node(vv, topo, w, k_samples, derive_seed(seed, {static_cast<std::uint64_t>(v)}));
  }
  return out;
}

namespace {

using Triple = std::array<double, 3>;

Triple as_triple(const NodeStats& s) { return {s.l_local, s.l_global, s.l_min}; }

std::vector<NodeId> participants(std::span<const std::optional<NodeStats>> stats, const Topology& topo) {
  if (stats.size() != topo.size()) throw InvalidInput("stats/topology size mismatch");
  std::vector<NodeId> members = largest_component(topo);
  for (const NodeId v : members) {
    if (!stats[static_cast<std::size_t>(v)]) {
      throw InvalidInput("missing stats for node " + std::to_string(v));
    }
  }
  return members;
}

}  // namespace

AggregateStats central_aggregate(std::span<const std::optional<NodeStats>> stats, const Topology& topo) {
  const auto members = participants(stats, topo);
  Triple sum{0.0, 0.0, 0.0};
  for (const NodeId v : members) {
    const Triple t = as_triple(*stats[static_cast<std::size_t>(v)]);
    for (std::size_t i = 0; i < 3; ++i) sum[i] += t[i];
  }
  const auto m = static_cast<double>(members.size());
  return AggregateStats{sum[0] / m, sum[1] / m, sum[2] / m, 0, 0.0};
}

AggregateStats gossip_aggregate(std::span<const std::optional<NodeStats>> stats, const Topology& topo,
                                std::size_t rounds, Seed seed) {
  const auto members = participants(stats, topo);
  const std::size_t n = topo.size();
  std::vector<Triple> sums(n, Triple{0.0, 0.0, 0.0});
  std::vector<double> weights(n, 0.0);
  for (const NodeId v : members) {
    sums[static_cast<std::size_t>(v)] = as_triple(*stats[static_cast<std::size_t>(v)]);
    weights[static_cast<std::size_t>(v)] = 1.0;
  }
  AggregateStats agg;
  if (members.size() == 1) {
    const Triple& t = sums[static_cast<std::size_t>(members.front())];
    agg.avg_local = t[0];
    agg.avg_global = t[1];
    agg.avg_min = t[2];
    return agg;
  }
  Rng rng(seed);
  std::vector<Triple> next_sums(n);
  std::vector<double> next_weights(n);
  for (std::size_t r = 0; r < rounds; ++r) {
    // Sends are computed from the previous round's snapshot.
    for (const NodeId v : members) {
      next_sums[static_cast<std::size_t>(v)] = Triple{0.0, 0.0, 0.0};
      next_weights[static_cast<std::size_t>(v)] = 0.0;
    }
    for (const NodeId v : members) {
      const auto vv = static_cast<std::size_t>(v);
      const auto nbrs = topo.neighbors(v);
      const auto target = static_cast<std::size_t>(nbrs[uniform_below(rng, nbrs.size())]);
      for (std::size_t i = 0; i < 3; ++i) {
        const double half = 0.5 * sums[vv][i];
        next_sums[vv][i] += half;
        next_sums[target][i] += half;
      }
      const double half_w = 0.5 * weights[vv];
      next_weights[vv] += half_w;
      next_weights[target] += half_w;
      ++agg.message_count;
    }
    std::swap(sums, next_sums);
    std::swap(weights, next_weights);
  }
  const auto reporter = static_cast<std::size_t>(members.front());
  agg.avg_local = sums[reporter][0] / weights[reporter];
  agg.avg_global = sums[reporter][1] / weights[reporter];
  agg.avg_min = sums[reporter][2] / weights[reporter];
  const Triple reported{agg.avg_local, agg.avg_global, agg.avg_min};
  for (const NodeId v : members) {
    const auto vv = static_cast<std::size_t>(v);
    for (std::size_t i = 0; i < 3; ++i) {
      agg.spread = std::max(agg.spread, std::abs(sums[vv][i] / weights[vv] - reported[i]));
    }
  }
  return agg;
}

std::optional<double> rho(const AggregateStats& agg) {
  const double denom = agg.avg_global - agg.avg_min;
  if (!(denom >= kRhoEpsilon)) return std::nullopt;
  return (agg.avg_local - agg.avg_min) / denom;
}

SwapDecision select_ring_action(double rho_value, double threshold, bool inverted) {
  if (!(threshold > 0.0 && threshold < 0.5)) throw InvalidInput("threshold must lie in (0, 0.5)");
  SwapDecision d;
  d.rho = rho_value;
  if (rho_value < threshold) {
    d.action = inverted ? SwapAction::AddShortestRing : SwapAction::AddRandomRing;
  } else if (rho_value > 1.0 - threshold) {
    d.action = inverted ? SwapAction::AddRandomRing : SwapAction::AddShortestRing;
  } else {
    d.action = SwapAction::Keep;
  }
  return d;
}

SwapDecision select_ring_action(std::optional<double> rho_value, double threshold, bool inverted) {
  if (!rho_value) {
    if (!(threshold > 0.0 && threshold < 0.5)) throw InvalidInput("threshold must lie in (0, 0.5)");
    return SwapDecision{SwapAction::Keep, std::numeric_limits<double>::quiet_NaN()};
  }
  return select_ring_action(*rho_value, threshold, inverted);
}

namespace {

Ring decision_ring(const LatencyMatrix& w, SwapAction action, Seed seed) {
  const std::size_t n = w.size();
  if (action == SwapAction::AddRandomRing) return random_ring(n, seed);
  Rng rng(derive_seed(seed, {0x6e6eULL}));
  return nearest_neighbor_ring(w, static_cast<NodeId>(uniform_below(rng, n)));
}

}  // namespace

RingOverlay apply_decision(RingOverlay overlay, const LatencyMatrix& w, const SwapDecision& decision, Seed seed) {
  if (decision.action == SwapAction::Keep) return overlay;
  if (overlay.size() != w.size()) throw InvalidInput("overlay/matrix size mismatch");
  const RingKind kind =
      decision.action == SwapAction::AddRandomRing ? RingKind::Random : RingKind::NearestNeighbor;
  const RingKind victim = kind == RingKind::Random ? RingKind::NearestNeighbor : RingKind::Random;
  Ring ring = decision_ring(w, decision.action, seed);
  if (!overlay.full()) {
    overlay.add_ring(kind, std::move(ring));
  } else {
    overlay.replace_latest(victim, kind, std::move(ring));
  }
  return overlay;
}

Topology apply_decision(const Topology& topo, const LatencyMatrix& w, const SwapDecision& decision, Seed seed) {
  if (decision.action == SwapAction::Keep) return topo;
  return apply_ring(topo, decision_ring(w, decision.action, seed));
}

AdaptiveReport assess(const Topology& topo, const LatencyMatrix& w, const AdaptiveConfig& config, Seed seed) {
  const std::size_t n = topo.size();
  AdaptiveReport report;
  report.k_samples = config.k_samples ? config.k_samples : static_cast<std::size_t>(DegreeBound::log2_ceil(n).k());
  report.rounds = config.rounds;
  if (report.rounds == 0) {
    report.rounds = 2 * static_cast<std::size_t>(DegreeBound::log2_ceil(n).k()) * std::max<std::size_t>(1, hop_diameter(topo));
  }
  const auto stats = measure_all(topo, w, report.k_samples, derive_seed(seed, {1}));
  report.aggregate = gossip_aggregate(stats, topo, report.rounds, derive_seed(seed, {2}));
  report.decision = select_ring_action(rho(report.aggregate), config.threshold, config.inverted);
  return report;
}

}  // namespace ringopt::adaptive

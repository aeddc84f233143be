#include <algorithm>
#include <numeric>

#include "ringopt/errors.hpp"
#include "ringopt/qlearn/episode.hpp"

namespace ringopt::qlearn {

std::vector<NodeId> ring_start_nodes(std::size_t n, int k, NodeId first, Seed seed) {
  std::vector<NodeId> others;
  others.reserve(n - 1);
  for (std::size_t v = 0; v < n; ++v) {
    if (static_cast<NodeId>(v) != first) others.push_back(static_cast<NodeId>(v));
  }
  Rng rng(seed);
  shuffle(std::span<NodeId>(others), rng);
  std::vector<NodeId> starts{first};
  for (int r = 1; r < k; ++r) starts.push_back(others[static_cast<std::size_t>(r - 1) % others.size()]);
  return starts;
}

EpisodeState begin_episode(std::shared_ptr<const LatencyMatrix> w, DegreeBound k, NodeId start, Seed ring_seed) {
  if (!w) throw InvalidInput("episode needs a latency matrix");
  const std::size_t n = w->size();
  if (n < 3) throw InvalidInput("episode needs n >= 3");
  if (start < 0 || static_cast<std::size_t>(start) >= n) throw InvalidInput("episode start out of range");
  EpisodeState s;
  s.w = std::move(w);
  s.partial = Topology(n);
  s.k = k.k();
  s.ring_starts = ring_start_nodes(n, k.k(), start, ring_seed);
  s.visited.assign(n, 0);
  s.current = start;
  s.visited[static_cast<std::size_t>(start)] = 1;
  s.visited_count = 1;
  return s;
}

std::vector<NodeId> legal_actions(const EpisodeState& s) {
  std::vector<NodeId> out;
  if (s.terminated) return out;
  const std::size_t n = s.size();
  const std::size_t cap = s.degree_cap();
  if (s.partial.degree(s.current) >= cap) return out;
  if (s.visited_count == n) {
    const NodeId start = s.start();
    if (start != s.current && !s.partial.has_edge(s.current, start) && s.partial.degree(start) < cap) {
      out.push_back(start);
    }
    return out;
  }
  for (std::size_t v = 0; v < n; ++v) {
    const auto u = static_cast<NodeId>(v);
    if (s.visited[v] || s.partial.degree(u) >= cap || s.partial.has_edge(s.current, u)) continue;
    out.push_back(u);
  }
  return out;
}

StepInfo advance(EpisodeState& s, NodeId action) {
  if (s.terminated) throw InvalidInput("episode already terminated");
  const auto legal = legal_actions(s);
  if (std::find(legal.begin(), legal.end(), action) == legal.end()) {
    throw InvalidInput("illegal action " + std::to_string(action) + " from node " + std::to_string(s.current));
  }
  StepInfo info;
  s.partial.add_edge(s.current, action);
  const std::size_t n = s.size();
  if (s.visited_count == n) {
    // Closed the active ring.
    info.ring_closed = true;
    ++s.ring_index;
    if (s.ring_index >= s.k) {
      s.ring_index = s.k - 1;
      s.current = action;
      s.terminated = true;
      info.terminal = true;
      return info;
    }
    std::fill(s.visited.begin(), s.visited.end(), 0);
    s.current = s.start();
    s.visited[static_cast<std::size_t>(s.current)] = 1;
    s.visited_count = 1;
  } else {
    s.current = action;
    s.visited[static_cast<std::size_t>(action)] = 1;
    ++s.visited_count;
  }
  if (legal_actions(s).empty()) {
    s.terminated = true;
    info.terminal = true;
    info.stuck = true;
  }
  return info;
}

double step_reward(double d_prev, double d_next, double edge_w, double alpha) {
  return (d_prev - d_next) - alpha * edge_w;
}

EpisodeState EpisodeTrace::replay(std::size_t steps) const {
  if (steps > actions.size()) throw InvalidInput("trace replay beyond recorded actions");
  EpisodeState s = begin_episode(w, DegreeBound(k), ring_starts.front(), Seed{0});
  s.ring_starts = ring_starts;
  for (std::size_t i = 0; i < steps; ++i) advance(s, actions[i]);
  return s;
}

}  // namespace ringopt::qlearn

#include "ringopt/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <queue>
#include <sstream>

#include "ringopt/errors.hpp"

namespace ringopt {

// ---------------------------------------------------------------------------
// LatencyMatrix

LatencyMatrix LatencyMatrix::from_row_major(std::size_t n, std::vector<double> entries) {
  if (n < 2) throw InvalidInput("latency matrix needs at least 2 nodes, got " + std::to_string(n));
  if (entries.size() != n * n) {
    throw InvalidInput("latency matrix buffer has " + std::to_string(entries.size()) +
                       " entries, expected " + std::to_string(n * n));
  }
  for (std::size_t u = 0; u < n; ++u) {
    if (entries[u * n + u] != 0.0) {
      throw InvalidInput("latency matrix diagonal (" + std::to_string(u) + "," + std::to_string(u) +
                         ") is not zero");
    }
    for (std::size_t v = u + 1; v < n; ++v) {
      const double a = entries[u * n + v];
      const double b = entries[v * n + u];
      if (!std::isfinite(a) || !std::isfinite(b) || a <= 0.0 || b <= 0.0) {
        throw InvalidInput("latency entry (" + std::to_string(u) + "," + std::to_string(v) +
                           ") must be finite and positive");
      }
      if (std::abs(a - b) > kSymmetryTolerance) {
        throw InvalidInput("latency matrix is not symmetric at (" + std::to_string(u) + "," +
                           std::to_string(v) + ")");
      }
    }
  }
  LatencyMatrix m;
  m.n_ = n;
  m.data_ = std::move(entries);
  return m;
}

double LatencyMatrix::mean_off_diagonal() const {
  if (n_ < 2) return 0.0;
  const double sum = std::accumulate(data_.begin(), data_.end(), 0.0);
  return sum / static_cast<double>(n_ * (n_ - 1));
}

// ---------------------------------------------------------------------------
// Topology

Topology::Topology(std::size_t n) : adjacency_(n) {}

void Topology::check_node(NodeId v) const {
  if (v < 0 || static_cast<std::size_t>(v) >= adjacency_.size()) {
    throw InvalidInput("node id " + std::to_string(v) + " outside [0, " +
                       std::to_string(adjacency_.size()) + ")");
  }
}

bool Topology::add_edge(NodeId u, NodeId v) {
  check_node(u);
  check_node(v);
  if (u == v) throw InvalidInput("self-loop on node " + std::to_string(u));
  if (has_edge(u, v)) return false;
  adjacency_[static_cast<std::size_t>(u)].push_back(v);
  adjacency_[static_cast<std::size_t>(v)].push_back(u);
  ++edge_count_;
  return true;
}

bool Topology::remove_edge(NodeId u, NodeId v) {
  check_node(u);
  check_node(v);
  auto& au = adjacency_[static_cast<std::size_t>(u)];
  auto it = std::find(au.begin(), au.end(), v);
  if (it == au.end()) return false;
  au.erase(it);
  auto& av = adjacency_[static_cast<std::size_t>(v)];
  av.erase(std::find(av.begin(), av.end(), u));
  --edge_count_;
  return true;
}

bool Topology::has_edge(NodeId u, NodeId v) const {
  const auto& au = adjacency_[static_cast<std::size_t>(u)];
  const auto& av = adjacency_[static_cast<std::size_t>(v)];
  // Scan the shorter list.
  if (au.size() <= av.size()) return std::find(au.begin(), au.end(), v) != au.end();
  return std::find(av.begin(), av.end(), u) != av.end();
}

std::size_t Topology::max_degree() const {
  std::size_t best = 0;
  for (const auto& a : adjacency_) best = std::max(best, a.size());
  return best;
}

std::vector<Edge> Topology::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (std::size_t u = 0; u < adjacency_.size(); ++u) {
    for (const NodeId v : adjacency_[u]) {
      if (static_cast<NodeId>(u) < v) out.push_back({static_cast<NodeId>(u), v});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void Topology::merge(const Topology& other) {
  if (other.size() != size()) throw InvalidInput("cannot merge topologies of different size");
  for (const Edge& e : other.edges()) add_edge(e.u, e.v);
}

bool operator==(const Topology& a, const Topology& b) {
  return a.size() == b.size() && a.edge_count() == b.edge_count() && a.edges() == b.edges();
}

// ---------------------------------------------------------------------------
// Ring / DegreeBound

Ring Ring::from_order(std::vector<NodeId> order) {
  const std::size_t n = order.size();
  if (n < 3) throw InvalidInput("a ring needs at least 3 nodes, got " + std::to_string(n));
  std::vector<char> seen(n, 0);
  for (const NodeId v : order) {
    if (v < 0 || static_cast<std::size_t>(v) >= n || seen[static_cast<std::size_t>(v)]) {
      throw InvalidInput("ring order is not a permutation of [0, " + std::to_string(n) + ")");
    }
    seen[static_cast<std::size_t>(v)] = 1;
  }
  Ring r;
  r.order_ = std::move(order);
  return r;
}

std::vector<Edge> Ring::edges() const {
  std::vector<Edge> out;
  out.reserve(order_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) {
    const NodeId a = order_[i];
    const NodeId b = order_[(i + 1) % order_.size()];
    out.push_back({std::min(a, b), std::max(a, b)});
  }
  return out;
}

double Ring::total_weight(const LatencyMatrix& w) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < order_.size(); ++i) sum += w(order_[i], order_[(i + 1) % order_.size()]);
  return sum;
}

DegreeBound::DegreeBound(int k) : k_(k) {
  if (k < 1) throw InvalidInput("degree bound k must be >= 1, got " + std::to_string(k));
}

DegreeBound DegreeBound::log2_ceil(std::size_t n) {
  int k = 0;
  while ((std::size_t{1} << k) < n) ++k;
  return DegreeBound(std::max(k, 1));
}

// ---------------------------------------------------------------------------
// Shortest paths

namespace {

// Compressed adjacency with weights; built once per topology evaluation.
struct WeightedCsr {
  std::vector<std::size_t> offsets;
  std::vector<NodeId> targets;
  std::vector<double> weights;
};

WeightedCsr build_csr(const Topology& topo, const LatencyMatrix& w) {
  WeightedCsr g;
  const std::size_t n = topo.size();
  g.offsets.resize(n + 1, 0);
  for (std::size_t u = 0; u < n; ++u) g.offsets[u + 1] = g.offsets[u] + topo.degree(static_cast<NodeId>(u));
  g.targets.resize(g.offsets[n]);
  g.weights.resize(g.offsets[n]);
  for (std::size_t u = 0; u < n; ++u) {
    std::size_t k = g.offsets[u];
    for (const NodeId v : topo.neighbors(static_cast<NodeId>(u))) {
      g.targets[k] = v;
      g.weights[k] = w(static_cast<NodeId>(u), v);
      ++k;
    }
  }
  return g;
}

void dijkstra(const WeightedCsr& g, NodeId source, std::span<double> dist) {
  using Item = std::pair<double, NodeId>;
  std::fill(dist.begin(), dist.end(), kInfinity);
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[static_cast<std::size_t>(source)] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    const auto uu = static_cast<std::size_t>(u);
    for (std::size_t k = g.offsets[uu]; k < g.offsets[uu + 1]; ++k) {
      const NodeId v = g.targets[k];
      const double nd = d + g.weights[k];
      if (nd < dist[static_cast<std::size_t>(v)]) {
        dist[static_cast<std::size_t>(v)] = nd;
        heap.emplace(nd, v);
      }
    }
  }
}

// Largest eccentricity over `members` using eccentricity bounds: after a
// Dijkstra from v, every w satisfies ecc(w) <= ecc(v) + d(v,w), so a source
// whose upper bound cannot exceed the best value found so far is skipped.
// Sources alternate between the largest upper bound and the smallest lower
// bound; ties go to the lowest id.
double bounded_eccentricity_max(const WeightedCsr& g, const std::vector<NodeId>& members) {
  const std::size_t n = g.offsets.size() - 1;
  std::vector<double> dist(n);
  std::vector<double> lower(n, 0.0);
  std::vector<double> upper(n, kInfinity);
  std::vector<NodeId> candidates = members;
  double best = 0.0;
  bool pick_upper = true;
  NodeId next = candidates.front();
  while (!candidates.empty()) {
    dijkstra(g, next, dist);
    double ecc = 0.0;
    for (const NodeId v : members) ecc = std::max(ecc, dist[static_cast<std::size_t>(v)]);
    best = std::max(best, ecc);

    std::erase(candidates, next);
    std::erase_if(candidates, [&](NodeId c) {
      const auto cc = static_cast<std::size_t>(c);
      const double d = dist[cc];
      lower[cc] = std::max({lower[cc], d, ecc - d});
      upper[cc] = std::min(upper[cc], ecc + d);
      return upper[cc] <= best;
    });
    if (candidates.empty()) break;

    next = candidates.front();
    for (const NodeId c : candidates) {
      const auto cc = static_cast<std::size_t>(c);
      const auto nn = static_cast<std::size_t>(next);
      if (pick_upper ? upper[cc] > upper[nn] : lower[cc] < lower[nn]) next = c;
    }
    pick_upper = !pick_upper;
  }
  return best;
}

void check_sizes(const Topology& topo, const LatencyMatrix& w) {
  if (topo.size() != w.size()) {
    throw InvalidInput("topology has " + std::to_string(topo.size()) + " nodes but latency matrix has " +
                       std::to_string(w.size()));
  }
}

}  // namespace

DistanceMatrix all_pairs_shortest(const Topology& topo, const LatencyMatrix& w) {
  check_sizes(topo, w);
  const std::size_t n = topo.size();
  DistanceMatrix out{n, std::vector<double>(n * n)};
  const WeightedCsr g = build_csr(topo, w);
  for (std::size_t s = 0; s < n; ++s) {
    dijkstra(g, static_cast<NodeId>(s), std::span<double>(out.data).subspan(s * n, n));
  }
  return out;
}

std::vector<int> component_labels(const Topology& topo) {
  const std::size_t n = topo.size();
  std::vector<int> label(n, -1);
  std::vector<NodeId> stack;
  int next = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (label[s] >= 0) continue;
    label[s] = next;
    stack.push_back(static_cast<NodeId>(s));
    while (!stack.empty()) {
      const NodeId u = stack.back();
      stack.pop_back();
      for (const NodeId v : topo.neighbors(u)) {
        if (label[static_cast<std::size_t>(v)] < 0) {
          label[static_cast<std::size_t>(v)] = next;
          stack.push_back(v);
        }
      }
    }
    ++next;
  }
  return label;
}

std::size_t component_count(const Topology& topo) {
  const auto labels = component_labels(topo);
  return labels.empty() ? 0 : static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end()) + 1);
}

bool is_connected(const Topology& topo) { return component_count(topo) <= 1; }

std::vector<NodeId> largest_component(const Topology& topo) {
  const auto labels = component_labels(topo);
  if (labels.empty()) return {};
  std::vector<std::size_t> sizes(static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end()) + 1), 0);
  for (const int l : labels) ++sizes[static_cast<std::size_t>(l)];
  // Labels follow lowest member id, so the first maximum wins ties.
  const auto best = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  std::vector<NodeId> members;
  members.reserve(sizes[static_cast<std::size_t>(best)]);
  for (std::size_t v = 0; v < labels.size(); ++v) {
    if (labels[v] == best) members.push_back(static_cast<NodeId>(v));
  }
  return members;
}

DiameterResult diameter(const Topology& topo, const LatencyMatrix& w) {
  check_sizes(topo, w);
  DiameterResult result;
  if (topo.edge_count() == 0) {
    result.degenerate = true;
    result.component_size = topo.size() > 0 ? 1 : 0;
    return result;
  }
  const auto members = largest_component(topo);
  result.component_size = members.size();
  const WeightedCsr g = build_csr(topo, w);
  result.value = bounded_eccentricity_max(g, members);
  return result;
}

std::size_t hop_diameter(const Topology& topo) {
  const auto members = largest_component(topo);
  std::vector<int> hops(topo.size());
  std::size_t best = 0;
  std::vector<NodeId> frontier;
  for (const NodeId s : members) {
    std::fill(hops.begin(), hops.end(), -1);
    hops[static_cast<std::size_t>(s)] = 0;
    frontier.assign(1, s);
    std::size_t head = 0;
    while (head < frontier.size()) {
      const NodeId u = frontier[head++];
      for (const NodeId v : topo.neighbors(u)) {
        if (hops[static_cast<std::size_t>(v)] < 0) {
          hops[static_cast<std::size_t>(v)] = hops[static_cast<std::size_t>(u)] + 1;
          best = std::max(best, static_cast<std::size_t>(hops[static_cast<std::size_t>(v)]));
          frontier.push_back(v);
        }
      }
    }
  }
  return best;
}

Topology apply_ring(Topology topo, const Ring& ring) {
  if (ring.size() != topo.size()) {
    throw InvalidInput("ring has " + std::to_string(ring.size()) + " nodes but topology has " +
                       std::to_string(topo.size()));
  }
  for (const Edge& e : ring.edges()) topo.add_edge(e.u, e.v);
  return topo;
}

Topology ring_topology(const Ring& ring) { return apply_ring(Topology(ring.size()), ring); }

bool check_degree(const Topology& topo, DegreeBound bound) {
  return topo.max_degree() <= bound.max_degree();
}

double total_weight(const Topology& topo, const LatencyMatrix& w) {
  double sum = 0.0;
  for (const Edge& e : topo.edges()) sum += w(e.u, e.v);
  return sum;
}

// ---------------------------------------------------------------------------
// Text formats

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

bool parse_double(const std::string& text, double& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc() && res.ptr == end;
}

std::size_t parse_count_line(std::istream& in, const char* what) {
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    std::size_t n = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), n);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
      throw FormatError(std::string(what) + ": header line must be a node count, got '" + t + "'");
    }
    return n;
  }
  throw FormatError(std::string(what) + ": empty input");
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

void write_matrix_csv(std::ostream& out, const LatencyMatrix& w) {
  const std::size_t n = w.size();
  out << n << '\n';
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (v) out << ',';
      out << format_double(w(static_cast<NodeId>(u), static_cast<NodeId>(v)));
    }
    out << '\n';
  }
}

LatencyMatrix read_matrix_csv(std::istream& in) {
  const std::size_t n = parse_count_line(in, "latency matrix");
  if (n < 2) throw FormatError("latency matrix: n must be >= 2, got " + std::to_string(n));
  std::vector<double> data(n * n);
  std::string line;
  std::size_t row = 0;
  while (row < n && std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != n) {
      throw FormatError("latency matrix: row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                        " cells, expected " + std::to_string(n));
    }
    for (std::size_t col = 0; col < n; ++col) {
      if (!parse_double(cells[col], data[row * n + col])) {
        throw FormatError("latency matrix: non-numeric cell at (" + std::to_string(row) + "," +
                          std::to_string(col) + "): '" + cells[col] + "'");
      }
    }
    ++row;
  }
  if (row != n) {
    throw FormatError("latency matrix: expected " + std::to_string(n) + " rows, got " + std::to_string(row));
  }
  for (std::size_t u = 0; u < n; ++u) {
    if (data[u * n + u] != 0.0) {
      throw FormatError("latency matrix: nonzero diagonal at (" + std::to_string(u) + "," + std::to_string(u) + ")");
    }
    for (std::size_t v = u + 1; v < n; ++v) {
      if (std::abs(data[u * n + v] - data[v * n + u]) > kSymmetryTolerance) {
        throw FormatError("latency matrix: asymmetric entry at (" + std::to_string(u) + "," + std::to_string(v) + ")");
      }
      if (!(data[u * n + v] > 0.0) || !std::isfinite(data[u * n + v])) {
        throw FormatError("latency matrix: non-positive entry at (" + std::to_string(u) + "," + std::to_string(v) + ")");
      }
    }
  }
  return LatencyMatrix::from_row_major(n, std::move(data));
}

void write_edge_list(std::ostream& out, const Topology& topo, const LatencyMatrix& w) {
  out << topo.size() << '\n';
  for (const Edge& e : topo.edges()) out << e.u << ',' << e.v << ',' << format_double(w(e.u, e.v)) << '\n';
}

Topology read_edge_list(std::istream& in) {
  const std::size_t n = parse_count_line(in, "edge list");
  Topology topo(n);
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() < 2 || cells.size() > 3) {
      throw FormatError("edge list: line " + std::to_string(lineno) + " must be u,v[,w]");
    }
    long long u = 0;
    long long v = 0;
    const auto ru = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), u);
    const auto rv = std::from_chars(cells[1].data(), cells[1].data() + cells[1].size(), v);
    if (ru.ec != std::errc() || rv.ec != std::errc() || u < 0 || v < 0 || static_cast<std::size_t>(u) >= n ||
        static_cast<std::size_t>(v) >= n || u == v) {
      throw FormatError("edge list: invalid endpoints on line " + std::to_string(lineno));
    }
    topo.add_edge(static_cast<NodeId>(u), static_cast<NodeId>(v));
  }
  return topo;
}

}  // namespace ringopt

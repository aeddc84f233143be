#pragma once

#include <cstddef>
#include <vector>

#include "ringopt/graph.hpp"
#include "ringopt/rng.hpp"

namespace ringopt::ga {

struct GaConfig {
  std::size_t population = 100;
  /// Candidate topologies examined, the initial population included.
  std::size_t budget = 100'000;
  double crossover_rate = 0.9;
  double mutation_rate = 0.2;
  std::size_t tournament = 3;
  Seed seed{1};

  void validate() const;
};

/// K ring permutations plus a cached fitness.
struct Individual {
  std::vector<Ring> rings;
  double diameter = 0.0;
  double weight = 0.0;  // total edge latency, tie-breaker
  bool dirty = true;

  Topology topology(std::size_t n) const;
};

/// True when a has strictly better fitness than b: lower diameter, then
/// lower total weight.
bool fitter(const Individual& a, const Individual& b);

/// Order crossover: keeps a[lo, hi] in place and fills the remaining
/// positions with the missing nodes in the order they appear in b,
/// starting after hi.
Ring order_crossover(const Ring& a, const Ring& b, std::size_t lo, std::size_t hi);

struct GaResult {
  Topology best;
  double best_diameter = 0.0;
  double best_weight = 0.0;
  /// Best-ever diameter after each generation (generation 0 = initial).
  std::vector<double> best_per_generation;
  std::size_t evaluations = 0;
  /// Diameter computations actually performed (clones reuse the cache).
  std::size_t diameter_computations = 0;
  /// Populations of every generation when requested (testing aid).
  std::vector<std::vector<Individual>> history;
};

/// Tournament selection, per-ring order crossover, swap mutation and
/// elitism of one, until `budget` candidates have been examined.
GaResult ga_search(const LatencyMatrix& w, DegreeBound k, const GaConfig& config, bool keep_history = false);

}  // namespace ringopt::ga

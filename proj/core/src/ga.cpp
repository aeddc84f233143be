#include "ringopt/ga.hpp"

#include <algorithm>

#include "ringopt/errors.hpp"
#include "ringopt/overlays.hpp"

namespace ringopt::ga {

void GaConfig::validate() const {
  if (population < 4) throw InvalidInput("GA population must be >= 4");
  if (budget < population) throw InvalidInput("GA budget must be >= population");
  if (tournament < 1) throw InvalidInput("GA tournament size must be >= 1");
  if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0) || !(mutation_rate >= 0.0 && mutation_rate <= 1.0)) {
    throw InvalidInput("GA rates must lie in [0, 1]");
  }
}

Topology Individual::topology(std::size_t n) const {
  Topology topo(n);
  for (const Ring& r : rings) topo = apply_ring(std::move(topo), r);
  return topo;
}

bool fitter(const Individual& a, const Individual& b) {
  if (a.diameter != b.diameter) return a.diameter < b.diameter;
  return a.weight < b.weight;
}

Ring order_crossover(const Ring& a, const Ring& b, std::size_t lo, std::size_t hi) {
  const std::size_t n = a.size();
  if (b.size() != n || lo > hi || hi >= n) throw InvalidInput("invalid order crossover arguments");
  std::vector<NodeId> child(n, -1);
  std::vector<char> used(n, 0);
  for (std::size_t i = lo; i <= hi; ++i) {
    child[i] = a[i];
    used[static_cast<std::size_t>(a[i])] = 1;
  }
  std::size_t write = (hi + 1) % n;
  for (std::size_t step = 0; step < n; ++step) {
    const NodeId v = b[(hi + 1 + step) % n];
    if (used[static_cast<std::size_t>(v)]) continue;
    child[write] = v;
    used[static_cast<std::size_t>(v)] = 1;
    write = (write + 1) % n;
  }
  return Ring::from_order(std::move(child));
}

namespace {

void evaluate(Individual& ind, const LatencyMatrix& w, std::size_t& computations) {
  if (!ind.dirty) return;
  const Topology topo = ind.topology(w.size());
  ind.diameter = diameter(topo, w).value;
  ind.weight = total_weight(topo, w);
  ind.dirty = false;
  ++computations;
}

const Individual& tournament_pick(const std::vector<Individual>& pop, std::size_t size, Rng& rng) {
  const Individual* best = &pop[uniform_below(rng, pop.size())];
  for (std::size_t i = 1; i < size; ++i) {
    const Individual& other = pop[uniform_below(rng, pop.size())];
    if (fitter(other, *best)) best = &other;
  }
  return *best;
}

Ring swap_mutation(const Ring& r, Rng& rng) {
  std::vector<NodeId> order(r.order().begin(), r.order().end());
  const std::size_t i = uniform_below(rng, order.size());
  std::size_t j = uniform_below(rng, order.size() - 1);
  if (j >= i) ++j;
  std::swap(order[i], order[j]);
  return Ring::from_order(std::move(order));
}

}  // namespace

GaResult ga_search(const LatencyMatrix& w, DegreeBound k, const GaConfig& config, bool keep_history) {
  config.validate();
  const std::size_t n = w.size();
  if (n < 3) throw InvalidInput("GA needs n >= 3");
  Rng rng(config.seed);
  GaResult result;

  std::vector<Individual> pop(config.population);
  for (auto& ind : pop) {
    for (int r = 0; r < k.k(); ++r) ind.rings.push_back(random_ring(n, Seed{rng()}));
    evaluate(ind, w, result.diameter_computations);
    ++result.evaluations;
  }
  Individual best = *std::min_element(pop.begin(), pop.end(), fitter);
  result.best_per_generation.push_back(best.diameter);
  if (keep_history) result.history.push_back(pop);

  while (result.evaluations < config.budget) {
    std::vector<Individual> next;
    next.reserve(config.population);
    next.push_back(best);
    while (next.size() < config.population && result.evaluations < config.budget) {
      const Individual& a = tournament_pick(pop, config.tournament, rng);
      const Individual& b = tournament_pick(pop, config.tournament, rng);
      Individual child = a;
      if (uniform01(rng) < config.crossover_rate) {
        for (std::size_t r = 0; r < child.rings.size(); ++r) {
          std::size_t lo = uniform_below(rng, n);
          std::size_t hi = uniform_below(rng, n);
          if (lo > hi) std::swap(lo, hi);
          Ring mixed = order_crossover(a.rings[r], b.rings[r], lo, hi);
          if (!(mixed == child.rings[r])) {
            child.rings[r] = std::move(mixed);
            child.dirty = true;
          }
        }
      }
      for (auto& ring : child.rings) {
        if (uniform01(rng) < config.mutation_rate) {
          ring = swap_mutation(ring, rng);
          child.dirty = true;
        }
      }
      evaluate(child, w, result.diameter_computations);
      ++result.evaluations;
      if (fitter(child, best)) best = child;
      next.push_back(std::move(child));
    }
    // A budget cut mid-generation keeps the tail of the previous population.
    for (std::size_t i = next.size(); i < config.population; ++i) next.push_back(pop[i]);
    pop = std::move(next);
    result.best_per_generation.push_back(best.diameter);
    if (keep_history) result.history.push_back(pop);
  }

  result.best = best.topology(n);
  result.best_diameter = best.diameter;
  result.best_weight = best.weight;
  return result;
}

}  // namespace ringopt::ga

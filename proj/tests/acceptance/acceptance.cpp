// Acceptance gate: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "ringopt/adaptive.hpp"
#include "ringopt/ga.hpp"
#include "ringopt/graph.hpp"
#include "ringopt/latency.hpp"
#include "ringopt/overlays.hpp"
#include "ringopt/parallel.hpp"
#include "ringopt/qlearn/network.hpp"
#include "ringopt/qlearn/trainer.hpp"

using namespace ringopt;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool oracle_connected(const Topology& topo, const LatencyMatrix& w) {
  const auto d = oracle::floyd_warshall(topo, w);
  for (const auto& row : d)
    for (double x : row)
      if (!std::isfinite(x)) return false;
  return true;
}

bool oracle_degree_ok(const Topology& topo, int k) {
  for (std::size_t v = 0; v < topo.size(); ++v) {
    std::set<NodeId> nb;
    for (const auto& e : topo.edges()) {
      if (e.u == static_cast<NodeId>(v)) nb.insert(e.v);
      if (e.v == static_cast<NodeId>(v)) nb.insert(e.u);
    }
    if (nb.size() > 2 * static_cast<std::size_t>(k)) return false;
  }
  return true;
}

Topology random_edges(std::size_t n, std::size_t m, Rng& rng) {
  Topology t(n);
  for (std::size_t i = 0; i < m; ++i) {
    const auto u = static_cast<NodeId>(uniform_below(rng, n));
    const auto v = static_cast<NodeId>(uniform_below(rng, n));
    if (u != v) t.add_edge(u, v);
  }
  return t;
}

// 1
Outcome diameter_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(Seed{101});
  int mismatches = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 4 + uniform_below(rng, 29);
    const auto w = oracle::dyadic_matrix(n, rng());
    const DegreeBound k(1 + static_cast<int>(uniform_below(rng, 3)));
    Topology topo;
    switch (i % 5) {
      case 0: topo = rapid_k_ring(n, k, Seed{rng()}); break;
      case 1: topo = k_ring_mix(w, OverlaySpec{OverlayMethod::KRingMix, n, k, {k.k() - 1, 1}}, Seed{rng()}); break;
      case 2: topo = chord_topology(n, Seed{rng()}); break;
      case 3: topo = perigee_topology(w, 1 + uniform_below(rng, 3)); break;
      default: topo = random_edges(n, n, rng); break;
    }
    if (diameter(topo, w).value != oracle::diameter(topo, w)) ++mismatches;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 10.0, fmt("mismatches=%d/100 time=%.2fs", mismatches, secs)};
}

// 2
Outcome structural_invariants() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(Seed{202});
  int violations = 0;
  std::string first;
  const auto note = [&](bool ok, const char* what, std::size_t n) {
    if (ok) return;
    if (violations++ == 0) first = fmt(" first=%s(n=%zu)", what, n);
  };
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 4 + uniform_below(rng, 61);
    const auto w = gen_uniform(n, Seed{rng()});
    const DegreeBound k(1 + static_cast<int>(uniform_below(rng, 4)));
    const Seed s{rng()};
    switch (i % 10) {
      case 0:
        note(oracle::is_hamiltonian_cycle(ring_topology(random_ring(n, s))), "random-ring", n);
        break;
      case 1: {
        const auto start = static_cast<NodeId>(uniform_below(rng, n));
        note(oracle::is_hamiltonian_cycle(ring_topology(nearest_neighbor_ring(w, start))), "nn-ring", n);
        break;
      }
      case 2: {
        const auto t = rapid_k_ring(n, k, s);
        note(oracle_degree_ok(t, k.k()) && oracle_connected(t, w), "rapid", n);
        break;
      }
      case 3: {
        const int shortest = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(k.k()) + 1));
        const auto t = k_ring_mix(w, OverlaySpec{OverlayMethod::KRingMix, n, k, {k.k() - shortest, shortest}}, s);
        note(oracle_degree_ok(t, k.k()) && oracle_connected(t, w), "k-ring-mix", n);
        break;
      }
      case 4:
        note(oracle_connected(chord_topology(n, s), w), "chord", n);
        break;
      case 5: {
        const auto t = apply_ring(perigee_topology(w, 1 + uniform_below(rng, std::min<std::size_t>(4, n - 1))), random_ring(n, s));
        note(oracle_connected(t, w), "perigee+ring", n);
        break;
      }
      case 6: {
        const std::size_t m = 1 + uniform_below(rng, n / 2);
        const auto mode = uniform_below(rng, 2) ? parallel::PartitionMode::Block : parallel::PartitionMode::Stride;
        const auto leftover = uniform_below(rng, 2) ? parallel::LeftoverMode::Append : parallel::LeftoverMode::Seam;
        const auto plan = parallel::make_partitions(n, m, s, mode);
        const auto ring = parallel::parallel_ring(w, plan, parallel::NearestNeighborSelector{},
                                                  parallel::BuildOptions{leftover, 1});
        note(oracle::is_hamiltonian_cycle(ring_topology(ring)), "parallel-ring", n);
        break;
      }
      case 7: {
        const std::size_t m = 1 + uniform_below(rng, n / 2);
        const auto t = parallel::parallel_k_ring(w, k, m, parallel::NearestNeighborSelector{}, s,
                                                 parallel::PartitionMode::Stride, parallel::BuildOptions{{}, 1});
        note(oracle_degree_ok(t, k.k()) && oracle_connected(t, w), "parallel-k-ring", n);
        break;
      }
      case 8: {
        const auto params = qlearn::EmbedParams::random(qlearn::EmbedConfig{4, 8, 2}, s);
        const auto r = qlearn::greedy_construct(w, params, static_cast<NodeId>(uniform_below(rng, n)), k);
        note(oracle_degree_ok(r.topology, k.k()) && oracle_connected(r.topology, w),
             "greedy-construct", n);
        break;
      }
      default: {
        ga::GaConfig cfg;
        cfg.population = 8;
        cfg.budget = 24;
        cfg.seed = s;
        const auto r = ga::ga_search(w, k, cfg);
        note(oracle_degree_ok(r.best, k.k()) && oracle_connected(r.best, w), "ga", n);
        break;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {violations == 0 && secs < 60.0, fmt("violations=%d/1000%s time=%.2fs", violations, first.c_str(), secs)};
}

// 3
Outcome gradient_check() {
  const auto t0 = std::chrono::steady_clock::now();
  using namespace qlearn;
  const EmbedConfig cfg{4, 8, 4};
  const std::size_t n = 8;
  Rng rng(Seed{303});
  double worst = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    const auto w = gen_gaussian(n, Seed{rng()});
    const auto params0 = EmbedParams::random(cfg, Seed{rng()});
    auto state = begin_episode(std::make_shared<const LatencyMatrix>(w), DegreeBound(2),
                               static_cast<NodeId>(uniform_below(rng, n)), Seed{rng()});
    const std::size_t prefix = uniform_below(rng, n);
    for (std::size_t s = 0; s < prefix; ++s) {
      const auto legal = legal_actions(state);
      advance(state, legal[uniform_below(rng, legal.size())]);
    }
    const auto legal = legal_actions(state);
    const NodeId action = legal[uniform_below(rng, legal.size())];
    const NodeId current = state.current;
    const double target = 4.0 * uniform01(rng) - 2.0;
    const Topology partial = state.partial;

    auto params = params0;
    auto grad = EmbedParams::zeros(cfg);
    const GraphView g{w, latency_scale(w, cfg), partial};
    accumulate_gradient(g, current, action, target, 1.0, params, grad);

    const auto loss = [&](const EmbedParams& p) {
      const double e = target - oracle::q_loop(w, partial, current, action, p);
      return e * e;
    };
    const double h = 1e-5;
    for (std::size_t b = 0; b < EmbedParams::kBlockCount; ++b) {
      auto* block = params.blocks()[b];
      Eigen::MatrixXd fd(block->rows(), block->cols());
      for (Eigen::Index i = 0; i < fd.size(); ++i) {
        double& x = block->data()[i];
        const double x0 = x;
        x = x0 + h;
        const double up = loss(params);
        x = x0 - h;
        const double down = loss(params);
        x = x0;
        fd.data()[i] = (up - down) / (2 * h);
      }
      const auto& an = *std::as_const(grad).blocks()[b];
      const double scale = std::max({fd.norm(), an.norm(), 1e-8});
      worst = std::max(worst, (fd - an).norm() / scale);
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 60.0, fmt("max_block_rel_err=%.3g time=%.2fs", worst, secs)};
}

// 4
Outcome telescoping() {
  qlearn::TrainConfig cfg;
  cfg.epochs = 100;
  cfg.seed = Seed{404};
  qlearn::Trainer trainer(cfg);
  double worst = 0.0;
  for (int e = 0; e < 100; ++e) {
    trainer.run_epoch();
    const auto& rec = trainer.last_episode();
    double sum = 0.0;
    for (double t : rec.diameter_terms) sum += t;
    worst = std::max(worst, std::abs(sum + rec.final_diameter));
  }
  return {worst <= 1e-9, fmt("episodes=100 max|sum+D(G_T)|=%.3g", worst)};
}

// 5
Outcome dgro_vs_random() {
  const auto t0 = std::chrono::steady_clock::now();
  qlearn::TrainConfig cfg;
  cfg.n_nodes = 20;
  cfg.k_rings = 2;
  cfg.epochs = 3000;
  cfg.distribution = qlearn::TrainDistribution::Uniform;
  cfg.seed = Seed{1};
  qlearn::Trainer trainer(cfg);
  trainer.run();
  const double train_secs = seconds_since(t0);

  const DegreeBound k(2);
  const auto starts = qlearn::pick_starts(20, 10, Seed{7});
  int passed = 0, early = 0;
  double worst = 0.0;
  const int instances = 5;
  for (int inst = 0; inst < instances; ++inst) {
    const auto w = gen_uniform(20, Seed{5000 + static_cast<std::uint64_t>(inst)});
    std::vector<double> random;
    for (std::uint64_t s = 0; s < 100; ++s) random.push_back(oracle::diameter(oracle::random_k_ring(20, 2, s), w));
    const auto best = qlearn::best_of_starts(w, trainer.params(), k, starts);
    const double ratio = oracle::diameter(best.topology, w) / median(random);
    worst = std::max(worst, ratio);
    if (best.early_termination) ++early;
    if (ratio <= 0.8 && oracle_connected(best.topology, w)) ++passed;
  }
  return {passed == instances && train_secs <= 1800.0,
          fmt("instances=%d/%d worst_ratio=%.3f early_terminations=%d train_time=%.0fs", passed, instances, worst,
              early, train_secs)};
}

// 6
Outcome ring_swap() {
  const auto t0 = std::chrono::steady_clock::now();
  int chord = 0, rapid = 0, perigee = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto w = gen_gaussian(300, Seed{600 + s});
    const auto k = DegreeBound::log2_ceil(300);
    Rng rng(Seed{700 + s});
    const auto start = static_cast<NodeId>(uniform_below(rng, 300));
    const double chord_random = diameter(chord_topology(300, Seed{s}), w).value;
    const double chord_nn = diameter(chord_from_order(nearest_neighbor_ring(w, start).order()), w).value;
    if (chord_nn < chord_random) ++chord;
    const double rapid_random =
        diameter(k_ring_mix(w, OverlaySpec{OverlayMethod::KRingMix, 300, k, {k.k(), 0}}, Seed{s}), w).value;
    const double rapid_nn =
        diameter(k_ring_mix(w, OverlaySpec{OverlayMethod::KRingMix, 300, k, {k.k() - 1, 1}}, Seed{s}), w).value;
    if (rapid_nn < rapid_random) ++rapid;

    const auto w5 = gen_gaussian(500, Seed{800 + s});
    const auto base = perigee_topology(w5, static_cast<std::size_t>(DegreeBound::log2_ceil(500).k()));
    const auto start5 = static_cast<NodeId>(uniform_below(rng, 500));
    const double per_random = diameter(apply_ring(base, random_ring(500, Seed{s})), w5).value;
    const double per_nn = diameter(apply_ring(base, nearest_neighbor_ring(w5, start5)), w5).value;
    if (per_random < per_nn) ++perigee;
  }
  const double secs = seconds_since(t0);
  return {chord >= 8 && rapid >= 8 && perigee >= 8 && secs < 300.0,
          fmt("chord=%d/10 rapid=%d/10 perigee=%d/10 time=%.1fs", chord, rapid, perigee, secs)};
}

// 7
Outcome parallel_build() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto k = DegreeBound::log2_ceil(256);
  std::vector<double> med;
  const std::size_t ms[] = {1, 2, 4, 8, 32};
  for (std::size_t m : ms) {
    std::vector<double> d;
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto w = gen_uniform(256, Seed{900 + s});
      const auto t = parallel::parallel_k_ring(w, k, m, parallel::NearestNeighborSelector{}, Seed{950 + s});
      d.push_back(diameter(t, w).value);
    }
    med.push_back(median(d));
  }
  bool ok = true;
  for (std::size_t i = 1; i < 4; ++i) ok = ok && med[i] <= 1.15 * med[0];
  ok = ok && med[4] <= 1.20 * med[0];
  const double secs = seconds_since(t0);
  return {ok && secs < 120.0, fmt("median m=1:%.1f m=2:%.1f m=4:%.1f m=8:%.1f m=32:%.1f time=%.1fs", med[0], med[1],
                                  med[2], med[3], med[4], secs)};
}

// 8
Outcome ga_sanity() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto w = gen_uniform(500, Seed{1000});
  std::vector<double> random;
  for (std::uint64_t s = 0; s < 10; ++s) random.push_back(diameter(rapid_k_ring(500, DegreeBound(9), Seed{s}), w).value);
  ga::GaConfig cfg;
  cfg.budget = 10'000;
  cfg.seed = Seed{1001};
  const auto large = ga::ga_search(w, DegreeBound(9), cfg);
  const double ratio = large.best_diameter / median(random);
  const bool large_ok = std::abs(ratio - 1.0) <= 0.10;

  int wins = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto ws = gen_gaussian(10, Seed{1100 + s});
    ga::GaConfig small;
    small.population = 50;
    small.budget = 5000;
    small.seed = Seed{1200 + s};
    const auto r = ga::ga_search(ws, DegreeBound(1), small);
    if (r.best_diameter <= oracle::random_search(ws, 1, 5000, 1300 + s)) ++wins;
  }
  return {large_ok && wins >= 7,
          fmt("n500_ratio=%.3f n10_wins=%d/10 time=%.0fs", ratio, wins, seconds_since(t0))};
}

// 9
Outcome gossip() {
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto w = gen_gaussian(64, Seed{1400 + s});
    const auto topo = rapid_k_ring(64, DegreeBound::log2_ceil(64), Seed{1500 + s});
    const auto stats = adaptive::measure_all(topo, w, 6, Seed{1600 + s});
    const auto agg = adaptive::gossip_aggregate(stats, topo, 40, Seed{1700 + s});
    double local = 0, global = 0, min = 0;
    for (const auto& st : stats) {
      local += st->l_local;
      global += st->l_global;
      min += st->l_min;
    }
    local /= 64;
    global /= 64;
    min /= 64;
    worst = std::max({worst, std::abs(agg.avg_local - local) / local, std::abs(agg.avg_global - global) / global,
                      std::abs(agg.avg_min - min) / min});
  }
  return {worst <= 0.01, fmt("seeds=20 rounds=40 max_rel_err=%.3g", worst)};
}

// 10
Outcome rho_calibration() {
  double random_min = 1.0, nn_max = 0.0;
  const std::size_t n = 100;
  const auto k = DegreeBound::log2_ceil(n);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto w = gen_site_composite(two_cluster_model(n, 100.0), Seed{1800 + s});
    const auto random = rapid_k_ring(n, k, Seed{1900 + s});
    const auto nn = k_ring_mix(w, OverlaySpec{OverlayMethod::KRingMix, n, k, {0, k.k()}}, Seed{2000 + s});
    const auto r1 = adaptive::assess(random, w, {}, Seed{2100 + s}).decision.rho;
    const auto r2 = adaptive::assess(nn, w, {}, Seed{2200 + s}).decision.rho;
    random_min = std::min(random_min, std::isnan(r1) ? -1.0 : r1);
    nn_max = std::max(nn_max, std::isnan(r2) ? 2.0 : r2);
  }
  return {random_min >= 0.8 && nn_max <= 0.2, fmt("seeds=10 min_rho_random=%.3f max_rho_nn=%.3f", random_min, nn_max)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "diameter-oracle", diameter_oracle},
      {2, "structural-invariants", structural_invariants},
      {3, "gradient-check", gradient_check},
      {4, "telescoping-reward", telescoping},
      {5, "dgro-vs-random", dgro_vs_random},
      {6, "ring-swap-direction", ring_swap},
      {7, "parallel-construction", parallel_build},
      {8, "ga-sanity", ga_sanity},
      {9, "gossip-aggregation", gossip},
      {10, "rho-calibration", rho_calibration},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!selected.empty() && !selected.contains(c.id)) continue;
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    if (!out.pass) ++failed;
    std::printf("%s %2d %-22s %s\n", out.pass ? "PASS" : "FAIL", c.id, c.name, out.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}

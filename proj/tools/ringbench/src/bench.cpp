#include "ringbench/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "ringopt/errors.hpp"
#include "ringopt/ga.hpp"
#include "ringopt/latency.hpp"
#include "ringopt/overlays.hpp"
#include "ringopt/qlearn/trainer.hpp"

namespace ringbench {

using namespace ringopt;

DistSpec parse_dist(std::string_view text) {
  DistSpec d;
  if (text == "uniform") {
    d.kind = DistKind::Uniform;
  } else if (text == "gaussian") {
    d.kind = DistKind::Gaussian;
  } else if (text.starts_with("site:") && text.size() > 5) {
    d.kind = DistKind::Site;
    d.site_file = std::string(text.substr(5));
  } else if (text == "two-cluster" || text.starts_with("two-cluster:")) {
    d.kind = DistKind::TwoCluster;
    if (text.size() > 12) {
      const auto ms = text.substr(12);
      auto [ptr, ec] = std::from_chars(ms.data(), ms.data() + ms.size(), d.inter_site_ms);
      if (ec != std::errc{} || ptr != ms.data() + ms.size() || !(d.inter_site_ms >= 0.0)) {
        throw UsageError("bad inter-site latency in --dist " + std::string(text));
      }
    }
  } else {
    throw UsageError("unknown distribution '" + std::string(text) +
                     "' (expected uniform, gaussian, site:PATH or two-cluster[:MS])");
  }
  return d;
}

std::string to_string(const DistSpec& dist) {
  switch (dist.kind) {
    case DistKind::Uniform: return "uniform";
    case DistKind::Gaussian: return "gaussian";
    case DistKind::Site: return "site:" + dist.site_file.string();
    case DistKind::TwoCluster: return "two-cluster:" + format_double(dist.inter_site_ms);
  }
  return "?";
}

LatencyMatrix make_matrix(const DistSpec& dist, std::size_t n, Seed seed) {
  switch (dist.kind) {
    case DistKind::Uniform: return gen_uniform(n, seed);
    case DistKind::Gaussian: return gen_gaussian(n, seed);
    case DistKind::TwoCluster: return gen_site_composite(two_cluster_model(n, dist.inter_site_ms), seed);
    case DistKind::Site: {
      SiteModel model = load_site_model(dist.site_file);
      const std::size_t sites = model.site_count();
      if (n < sites) {
        throw InvalidInput("n = " + std::to_string(n) + " is smaller than the " + std::to_string(sites) +
                           " sites of " + dist.site_file.string());
      }
      for (std::size_t i = 0; i < sites; ++i) model.nodes_per_site[i] = n / sites + (i < n % sites ? 1 : 0);
      return gen_site_composite(model, seed);
    }
  }
  throw InvalidInput("unknown distribution");
}

int resolve_k(std::size_t n, int k) { return k > 0 ? k : DegreeBound::log2_ceil(n).k(); }

namespace {

enum class Method {
  RandomRing,
  NnRing,
  RandomKRing,
  NnKRing,
  MixedKRing,
  KRingAdaptive,
  Chord,
  ChordNn,
  ChordAdaptive,
  PerigeeRandom,
  PerigeeNn,
  PerigeeAdaptive,
  NnParallel,
  Dgro,
  DgroParallel,
  Ga,
};

struct MethodEntry {
  const char* name;
  Method method;
};

constexpr MethodEntry kMethods[] = {
    {"random-ring", Method::RandomRing},
    {"nn-ring", Method::NnRing},
    {"random-kring", Method::RandomKRing},
    {"nn-kring", Method::NnKRing},
    {"mixed-kring", Method::MixedKRing},
    {"kring-adaptive", Method::KRingAdaptive},
    {"chord", Method::Chord},
    {"chord-nn", Method::ChordNn},
    {"chord-adaptive", Method::ChordAdaptive},
    {"perigee-random", Method::PerigeeRandom},
    {"perigee-nn", Method::PerigeeNn},
    {"perigee-adaptive", Method::PerigeeAdaptive},
    {"nn-parallel", Method::NnParallel},
    {"dgro", Method::Dgro},
    {"dgro-parallel", Method::DgroParallel},
    {"ga", Method::Ga},
};

std::optional<Method> lookup(std::string_view name) {
  for (const auto& e : kMethods) {
    if (name == e.name) return e.method;
  }
  return std::nullopt;
}

bool needs_model(Method m) { return m == Method::Dgro || m == Method::DgroParallel; }

NodeId seeded_node(std::size_t n, Seed seed, std::uint64_t salt) {
  Rng rng(derive_seed(seed, {salt}));
  return static_cast<NodeId>(uniform_below(rng, n));
}

Ring nn_ring_from(const LatencyMatrix& w, Seed seed) { return nearest_neighbor_ring(w, seeded_node(w.size(), seed, 1)); }

std::size_t perigee_degree(std::size_t n, const MethodOptions& o) {
  const std::size_t d = o.perigee_d_out ? o.perigee_d_out : static_cast<std::size_t>(DegreeBound::log2_ceil(n).k());
  return std::min(d, n - 1);
}

BuildOutcome build_partitioned(const LatencyMatrix& w, const MethodOptions& o, Seed seed,
                               const parallel::NodeSelector& selector, int k) {
  BuildOutcome out;
  parallel::BuildStats stats;
  out.topology = parallel::parallel_k_ring(w, DegreeBound(k), o.partitions, selector, seed, o.partition_mode,
                                           parallel::BuildOptions{o.leftover_mode, o.threads}, &stats);
  out.build_steps = stats.longest_chain;
  return out;
}

}  // namespace

const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& e : kMethods) v.emplace_back(e.name);
    return v;
  }();
  return names;
}

void check_method(std::string_view method, const MethodOptions& options) {
  const auto m = lookup(method);
  if (!m) {
    std::string known;
    for (const auto& e : kMethods) known += std::string(known.empty() ? "" : ", ") + e.name;
    throw UsageError("unknown method '" + std::string(method) + "' (known: " + known + ")");
  }
  if (needs_model(*m) && !options.model) throw UsageError("method '" + std::string(method) + "' needs --model");
}

BuildOutcome build_topology(std::string_view method, const LatencyMatrix& w, const MethodOptions& o, Seed seed) {
  check_method(method, o);
  const std::size_t n = w.size();
  const int k = resolve_k(n, o.k);
  BuildOutcome out;
  out.k = k;
  switch (*lookup(method)) {
    case Method::RandomRing:
      out.topology = ring_topology(random_ring(n, seed));
      out.k = 1;
      out.build_steps = n;
      break;
    case Method::NnRing:
      out.topology = ring_topology(nn_ring_from(w, seed));
      out.k = 1;
      out.build_steps = n;
      break;
    case Method::RandomKRing:
      out.topology = rapid_k_ring(n, DegreeBound(k), seed);
      out.build_steps = n * static_cast<std::size_t>(k);
      break;
    case Method::NnKRing:
      out.topology = k_ring_mix(w, OverlaySpec{OverlayMethod::KRingMix, n, DegreeBound(k), RingMix{0, k}}, seed);
      out.build_steps = n * static_cast<std::size_t>(k);
      break;
    case Method::MixedKRing:
      out.topology =
          k_ring_mix(w, OverlaySpec{OverlayMethod::KRingMix, n, DegreeBound(k), RingMix{k - 1, 1}}, seed);
      out.build_steps = n * static_cast<std::size_t>(k);
      break;
    case Method::KRingAdaptive: {
      RingOverlay overlay(Topology(n), static_cast<std::size_t>(k));
      for (int i = 0; i < k; ++i) {
        overlay.add_ring(RingKind::Random, random_ring(n, Seed{seed.value + static_cast<std::uint64_t>(i)}));
      }
      const auto report = adaptive::assess(overlay.topology(), w, o.adaptive, derive_seed(seed, {2}));
      overlay = adaptive::apply_decision(std::move(overlay), w, report.decision, derive_seed(seed, {3}));
      out.topology = overlay.topology();
      out.adaptive = report;
      out.build_steps = n * static_cast<std::size_t>(k);
      break;
    }
    case Method::Chord:
      out.topology = chord_topology(n, seed);
      out.build_steps = n;
      break;
    case Method::ChordNn:
      out.topology = chord_from_order(nn_ring_from(w, seed).order());
      out.build_steps = n;
      break;
    case Method::ChordAdaptive: {
      const Topology base = chord_topology(n, seed);
      const auto report = adaptive::assess(base, w, o.adaptive, derive_seed(seed, {2}));
      out.topology = report.decision.action == adaptive::SwapAction::AddShortestRing
                         ? chord_from_order(nn_ring_from(w, seed).order())
                         : base;
      out.adaptive = report;
      out.build_steps = n;
      break;
    }
    case Method::PerigeeRandom:
    case Method::PerigeeNn:
    case Method::PerigeeAdaptive: {
      const std::size_t d = perigee_degree(n, o);
      const Topology base = perigee_topology(w, d);
      bool shortest = *lookup(method) == Method::PerigeeNn;
      if (*lookup(method) == Method::PerigeeAdaptive) {
        const auto report = adaptive::assess(base, w, o.adaptive, derive_seed(seed, {2}));
        shortest = report.decision.action == adaptive::SwapAction::AddShortestRing;
        out.adaptive = report;
      }
      out.topology = apply_ring(base, shortest ? nn_ring_from(w, seed) : random_ring(n, seed));
      out.k = static_cast<int>(d);
      out.build_steps = n * d + n;
      break;
    }
    case Method::NnParallel:
      out = build_partitioned(w, o, seed, parallel::NearestNeighborSelector{}, k);
      out.k = k;
      break;
    case Method::Dgro: {
      const auto starts = qlearn::pick_starts(n, std::min(o.starts, n), seed);
      auto r = qlearn::best_of_starts(w, *o.model, DegreeBound(k), starts);
      out.topology = std::move(r.topology);
      out.build_steps = r.steps;
      out.early_termination = r.early_termination;
      break;
    }
    case Method::DgroParallel:
      out = build_partitioned(w, o, seed, parallel::QGreedySelector{*o.model}, k);
      out.k = k;
      break;
    case Method::Ga: {
      ga::GaConfig cfg;
      cfg.population = o.ga_population;
      cfg.budget = o.ga_budget;
      cfg.seed = seed;
      auto r = ga::ga_search(w, DegreeBound(k), cfg);
      out.topology = std::move(r.best);
      out.build_steps = r.evaluations;
      break;
    }
  }
  return out;
}

std::uint64_t method_salt(std::string_view method) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : method) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

void SweepConfig::validate() const {
  if (sizes.empty()) throw UsageError("no sizes given");
  for (const std::size_t s : sizes) {
    if (s < 3) throw UsageError("sizes must be >= 3 (got " + std::to_string(s) + ")");
  }
  if (runs == 0) throw UsageError("runs must be >= 1");
  if (methods.empty()) throw UsageError("no methods given");
  for (const auto& m : methods) check_method(m, options);
}

Seed matrix_seed(Seed base, std::size_t size, std::size_t run) { return derive_seed(base, {size, run}); }

Seed cell_seed(Seed base, std::size_t size, std::size_t run, std::string_view method) {
  return derive_seed(base, {size, run, method_salt(method)});
}

std::vector<SweepRow> run_sweep(const SweepConfig& config, const std::function<void(const SweepRow&)>& on_row) {
  config.validate();
  struct Cell {
    std::size_t size;
    std::size_t run;
    std::size_t method;
  };
  std::vector<Cell> cells;
  for (const std::size_t size : config.sizes) {
    for (std::size_t run = 0; run < config.runs; ++run) {
      for (std::size_t m = 0; m < config.methods.size(); ++m) cells.push_back({size, run, m});
    }
  }
  std::vector<std::optional<SweepRow>> rows(cells.size());

  const auto evaluate = [&](const Cell& c) {
    const std::string& method = config.methods[c.method];
    const LatencyMatrix w = make_matrix(config.dist, c.size, matrix_seed(config.seed, c.size, c.run));
    const auto t0 = std::chrono::steady_clock::now();
    const BuildOutcome built = build_topology(method, w, config.options, cell_seed(config.seed, c.size, c.run, method));
    const auto t1 = std::chrono::steady_clock::now();
    SweepRow row;
    row.size = c.size;
    row.run = c.run;
    row.method = method;
    row.k = built.k;
    row.diameter_ms = diameter(built.topology, w).value;
    row.build_steps = built.build_steps;
    row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    if (config.hop_diameter) row.hop_diameter = hop_diameter(built.topology);
    return row;
  };

  const std::size_t jobs = std::max<std::size_t>(1, std::min(config.jobs, cells.size()));
  std::size_t emitted = 0;
  std::mutex mu;
  const auto flush = [&] {
    while (emitted < rows.size() && rows[emitted]) {
      if (on_row) on_row(*rows[emitted]);
      ++emitted;
    }
  };
  if (jobs == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      rows[i] = evaluate(cells[i]);
      flush();
    }
  } else {
    std::size_t next = 0;
    std::exception_ptr failure;
    {
      std::vector<std::jthread> workers;
      for (std::size_t t = 0; t < jobs; ++t) {
        workers.emplace_back([&] {
          for (;;) {
            std::size_t i;
            {
              std::lock_guard lock(mu);
              if (next >= cells.size() || failure) return;
              i = next++;
            }
            try {
              SweepRow row = evaluate(cells[i]);
              std::lock_guard lock(mu);
              rows[i] = std::move(row);
              flush();
            } catch (...) {
              std::lock_guard lock(mu);
              if (!failure) failure = std::current_exception();
            }
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<SweepRow> out;
  out.reserve(rows.size());
  for (auto& r : rows) out.push_back(std::move(*r));
  return out;
}

void write_csv_header(std::ostream& out, bool hop_diameter) {
  out << "size,run,method,k,diameter_ms,build_steps,wall_ms";
  if (hop_diameter) out << ",hop_diameter";
  out << '\n';
}

void write_csv_row(std::ostream& out, const SweepRow& row) {
  char wall[32];
  std::snprintf(wall, sizeof wall, "%.3f", row.wall_ms);
  out << row.size << ',' << row.run << ',' << row.method << ',' << row.k << ',' << format_double(row.diameter_ms)
      << ',' << row.build_steps << ',' << wall;
  if (row.hop_diameter) out << ',' << *row.hop_diameter;
  out << '\n';
}

namespace {

template <typename T>
T parse_field(std::string_view text, std::string_view name) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw FormatError("bad " + std::string(name) + " field '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

SweepRow parse_csv_row(std::string_view line) {
  std::vector<std::string_view> f;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t comma = line.find(',', pos);
    f.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (f.size() != 7 && f.size() != 8) {
    throw FormatError("expected 7 or 8 CSV fields, got " + std::to_string(f.size()));
  }
  SweepRow row;
  row.size = parse_field<std::size_t>(f[0], "size");
  row.run = parse_field<std::size_t>(f[1], "run");
  row.method = std::string(f[2]);
  row.k = parse_field<int>(f[3], "k");
  row.diameter_ms = parse_field<double>(f[4], "diameter_ms");
  row.build_steps = parse_field<std::size_t>(f[5], "build_steps");
  row.wall_ms = parse_field<double>(f[6], "wall_ms");
  if (f.size() == 8) row.hop_diameter = parse_field<std::size_t>(f[7], "hop_diameter");
  return row;
}

}  // namespace ringbench

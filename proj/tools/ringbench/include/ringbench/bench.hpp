#pragma once

// Experiment harness behind the ringbench CLI: latency sources, the method
// registry that turns a latency matrix into an overlay topology, and the
// size sweep that writes one CSV row per (size, run, method) cell.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ringopt/adaptive.hpp"
#include "ringopt/graph.hpp"
#include "ringopt/parallel.hpp"
#include "ringopt/qlearn/params.hpp"
#include "ringopt/rng.hpp"

namespace ringbench {

using ringopt::LatencyMatrix;
using ringopt::Seed;
using ringopt::Topology;

/// Bad command-line input detected before any work starts (exit code 1).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DistKind { Uniform, Gaussian, Site, TwoCluster };

struct DistSpec {
  DistKind kind = DistKind::Uniform;
  std::filesystem::path site_file;
  double inter_site_ms = 100.0;
};

/// "uniform", "gaussian", "site:PATH" or "two-cluster[:MS]".
DistSpec parse_dist(std::string_view text);
std::string to_string(const DistSpec& dist);

/// Site files are rescaled to n nodes spread as evenly as possible over
/// the sites.
LatencyMatrix make_matrix(const DistSpec& dist, std::size_t n, Seed seed);

/// k = ceil(log2 n) when `k` is 0.
int resolve_k(std::size_t n, int k);

struct MethodOptions {
  /// 0 selects ceil(log2 n).
  int k = 0;
  /// Perigee out-degree; 0 selects ceil(log2 n).
  std::size_t perigee_d_out = 0;
  /// Start nodes tried by dgro.
  std::size_t starts = 10;
  std::size_t partitions = 8;
  ringopt::parallel::PartitionMode partition_mode = ringopt::parallel::PartitionMode::Stride;
  ringopt::parallel::LeftoverMode leftover_mode = ringopt::parallel::LeftoverMode::Seam;
  /// 0 reads RINGOPT_THREADS.
  std::size_t threads = 0;
  std::size_t ga_budget = 10'000;
  std::size_t ga_population = 100;
  ringopt::adaptive::AdaptiveConfig adaptive;
  std::shared_ptr<const ringopt::qlearn::EmbedParams> model;
};

struct BuildOutcome {
  Topology topology;
  int k = 0;
  /// Sequential construction steps; the longest chain for partitioned
  /// builds and candidate evaluations for the GA.
  std::size_t build_steps = 0;
  bool early_termination = false;
  std::optional<ringopt::adaptive::AdaptiveReport> adaptive;
};

/// Every method name accepted by build_topology.
const std::vector<std::string>& method_names();

/// Throws UsageError for unknown methods or a dgro method without a model.
void check_method(std::string_view method, const MethodOptions& options);

BuildOutcome build_topology(std::string_view method, const LatencyMatrix& w, const MethodOptions& options,
                            Seed seed);

/// FNV-1a of the method name, used to salt per-cell seeds.
std::uint64_t method_salt(std::string_view method);

struct SweepConfig {
  std::vector<std::size_t> sizes;
  std::size_t runs = 10;
  std::vector<std::string> methods;
  DistSpec dist;
  Seed seed{1};
  MethodOptions options;
  bool hop_diameter = false;
  /// Cells evaluated concurrently.
  std::size_t jobs = 1;

  /// Throws UsageError on empty lists, sizes < 3, runs = 0 or bad methods.
  void validate() const;
};

struct SweepRow {
  std::size_t size = 0;
  std::size_t run = 0;
  std::string method;
  int k = 0;
  double diameter_ms = 0.0;
  std::size_t build_steps = 0;
  double wall_ms = 0.0;
  std::optional<std::size_t> hop_diameter;
};

/// Matrix seed of a (size, run) cell; shared by every method in the cell.
Seed matrix_seed(Seed base, std::size_t size, std::size_t run);
/// Builder seed of a (size, run, method) cell.
Seed cell_seed(Seed base, std::size_t size, std::size_t run, std::string_view method);

/// Rows ordered by (size, run, method list position). `on_row` sees rows in
/// that order as soon as they are final.
std::vector<SweepRow> run_sweep(const SweepConfig& config, const std::function<void(const SweepRow&)>& on_row = {});

void write_csv_header(std::ostream& out, bool hop_diameter);
void write_csv_row(std::ostream& out, const SweepRow& row);
/// Parses a data row written by write_csv_row. Throws ringopt::FormatError.
SweepRow parse_csv_row(std::string_view line);

}  // namespace ringbench

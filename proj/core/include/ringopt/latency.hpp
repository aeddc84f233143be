#pragma once

// Synthetic latency generators and matrix/site-model file I/O.

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "ringopt/graph.hpp"
#include "ringopt/rng.hpp"

namespace ringopt {

/// Floor applied to every Gaussian draw so latencies stay positive.
inline constexpr double kGaussianFloorMs = 0.1;

/// Multi-site network: inter-site latencies plus a per-node access latency.
/// A node u at site i and v at site j are separated by
/// site_matrix[i][j] + l_u + l_v, with l ~ Normal(intra_mean, intra_std^2).
struct SiteModel {
  std::vector<std::vector<double>> site_matrix;
  std::vector<std::size_t> nodes_per_site;
  double intra_mean = 5.0;
  double intra_std = 1.0;

  std::size_t site_count() const { return site_matrix.size(); }
  std::size_t total_nodes() const;
  /// Throws InvalidInput if the site matrix is not square, symmetric with a
  /// zero diagonal and non-negative entries, or a site has no nodes.
  void validate() const;
  /// Site index of every node; nodes are numbered site by site.
  std::vector<std::size_t> site_of_nodes() const;
};

/// Off-diagonal entries i.i.d. uniform over the integers {1, ..., 10}.
LatencyMatrix gen_uniform(std::size_t n, Seed seed);

/// Off-diagonal entries i.i.d. Normal(mean, std^2), floored at 0.1 ms.
LatencyMatrix gen_gaussian(std::size_t n, Seed seed, double mean = 5.0, double std_dev = 1.0);

LatencyMatrix gen_site_composite(const SiteModel& model, Seed seed);

/// Same model with every site holding `per_site` nodes.
SiteModel with_uniform_site_load(SiteModel model, std::size_t per_site);

/// Two-cluster model: `n` nodes split as evenly as possible over two sites
/// separated by `inter_site_ms`.
SiteModel two_cluster_model(std::size_t n, double inter_site_ms);

LatencyMatrix load_matrix(const std::filesystem::path& path);
void save_matrix(const std::filesystem::path& path, const LatencyMatrix& w);

/// JSON object with keys site_matrix, nodes_per_site, intra_mean, intra_std.
SiteModel parse_site_model(std::istream& in);
SiteModel load_site_model(const std::filesystem::path& path);

}  // namespace ringopt

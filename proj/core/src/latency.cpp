#include "ringopt/latency.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "ringopt/errors.hpp"

namespace ringopt {

namespace {

// Upper triangle drawn in row-major order, mirrored into the lower triangle.
template <typename Draw>
LatencyMatrix fill_symmetric(std::size_t n, Draw&& draw) {
  std::vector<double> data(n * n, 0.0);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      const double x = draw(u, v);
      data[u * n + v] = x;
      data[v * n + u] = x;
    }
  }
  return LatencyMatrix::from_row_major(n, std::move(data));
}

double truncated_normal(Rng& rng, double mean, double std_dev) {
  return std::max(kGaussianFloorMs, mean + std_dev * standard_normal(rng));
}

}  // namespace

std::size_t SiteModel::total_nodes() const {
  return std::accumulate(nodes_per_site.begin(), nodes_per_site.end(), std::size_t{0});
}

void SiteModel::validate() const {
  const std::size_t s = site_matrix.size();
  if (s == 0) throw InvalidInput("site model has no sites");
  if (nodes_per_site.size() != s) {
    throw InvalidInput("nodes_per_site has " + std::to_string(nodes_per_site.size()) + " entries for " +
                       std::to_string(s) + " sites");
  }
  for (std::size_t i = 0; i < s; ++i) {
    if (site_matrix[i].size() != s) throw InvalidInput("site_matrix row " + std::to_string(i) + " is not length " + std::to_string(s));
    if (site_matrix[i][i] != 0.0) throw InvalidInput("site_matrix diagonal must be zero at site " + std::to_string(i));
    if (nodes_per_site[i] < 1) throw InvalidInput("site " + std::to_string(i) + " has no nodes");
  }
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = i + 1; j < s; ++j) {
      if (!(site_matrix[i][j] >= 0.0) || !std::isfinite(site_matrix[i][j])) {
        throw InvalidInput("site_matrix entry (" + std::to_string(i) + "," + std::to_string(j) + ") must be finite and >= 0");
      }
      if (std::abs(site_matrix[i][j] - site_matrix[j][i]) > kSymmetryTolerance) {
        throw InvalidInput("site_matrix is not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }
  if (!(intra_mean > 0.0)) throw InvalidInput("intra_mean must be positive");
  if (!(intra_std > 0.0)) throw InvalidInput("intra_std must be positive");
}

std::vector<std::size_t> SiteModel::site_of_nodes() const {
  std::vector<std::size_t> out;
  out.reserve(total_nodes());
  for (std::size_t i = 0; i < nodes_per_site.size(); ++i) out.insert(out.end(), nodes_per_site[i], i);
  return out;
}

LatencyMatrix gen_uniform(std::size_t n, Seed seed) {
  if (n < 2) throw InvalidInput("gen_uniform needs n >= 2, got " + std::to_string(n));
  Rng rng(seed);
  return fill_symmetric(n, [&](std::size_t, std::size_t) { return static_cast<double>(1 + uniform_below(rng, 10)); });
}

LatencyMatrix gen_gaussian(std::size_t n, Seed seed, double mean, double std_dev) {
  if (n < 2) throw InvalidInput("gen_gaussian needs n >= 2, got " + std::to_string(n));
  if (!(mean > 0.0)) throw InvalidInput("gen_gaussian mean must be positive");
  if (!(std_dev > 0.0)) throw InvalidInput("gen_gaussian std must be positive");
  Rng rng(seed);
  return fill_symmetric(n, [&](std::size_t, std::size_t) { return truncated_normal(rng, mean, std_dev); });
}

LatencyMatrix gen_site_composite(const SiteModel& model, Seed seed) {
  model.validate();
  const std::size_t n = model.total_nodes();
  if (n < 2) throw InvalidInput("site model must hold at least 2 nodes");
  const auto site = model.site_of_nodes();
  Rng rng(seed);
  std::vector<double> access(n);
  for (double& l : access) l = truncated_normal(rng, model.intra_mean, model.intra_std);
  return fill_symmetric(n, [&](std::size_t u, std::size_t v) {
    return model.site_matrix[site[u]][site[v]] + access[u] + access[v];
  });
}

SiteModel with_uniform_site_load(SiteModel model, std::size_t per_site) {
  if (per_site < 1) throw InvalidInput("per_site must be >= 1");
  model.nodes_per_site.assign(model.site_matrix.size(), per_site);
  return model;
}

SiteModel two_cluster_model(std::size_t n, double inter_site_ms) {
  if (n < 2) throw InvalidInput("two_cluster_model needs n >= 2");
  SiteModel m;
  m.site_matrix = {{0.0, inter_site_ms}, {inter_site_ms, 0.0}};
  m.nodes_per_site = {(n + 1) / 2, n / 2};
  return m;
}

LatencyMatrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open latency matrix file " + path.string());
  try {
    return read_matrix_csv(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_matrix(const std::filesystem::path& path, const LatencyMatrix& w) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write latency matrix file " + path.string());
  write_matrix_csv(out, w);
}

SiteModel parse_site_model(std::istream& in) {
  SiteModel m;
  try {
    const auto j = nlohmann::json::parse(in);
    m.site_matrix = j.at("site_matrix").get<std::vector<std::vector<double>>>();
    m.nodes_per_site = j.at("nodes_per_site").get<std::vector<std::size_t>>();
    m.intra_mean = j.value("intra_mean", 5.0);
    m.intra_std = j.value("intra_std", 1.0);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("site model: ") + e.what());
  }
  try {
    m.validate();
  } catch (const InvalidInput& e) {
    throw FormatError(std::string("site model: ") + e.what());
  }
  return m;
}

SiteModel load_site_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open site model file " + path.string());
  return parse_site_model(in);
}

}  // namespace ringopt

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string_view>

#include <Eigen/Dense>

#include "ringopt/rng.hpp"

namespace ringopt::qlearn {

/// Which nodes feed a per-node sum in the embedding update.
enum class NeighborRange : std::uint32_t {
  PartialNeighbors = 0,  // neighbors in the partially built topology
  AllNodes = 1,          // every other node of the complete graph
};

enum class LatencyNormalization : std::uint32_t {
  None = 0,
  MatrixMean = 1,  // divide latencies by the off-diagonal mean of the matrix
};

struct EmbedConfig {
  int p = 16;        // embedding dimension
  int h = 32;        // hidden width of the scoring head
  int t_embed = 4;   // message-passing iterations
  NeighborRange structure_range = NeighborRange::PartialNeighbors;
  NeighborRange latency_range = NeighborRange::AllNodes;
  LatencyNormalization normalization = LatencyNormalization::MatrixMean;

  friend bool operator==(const EmbedConfig&, const EmbedConfig&) = default;
};

/// The ten parameter blocks of the embedding and scoring network.
///
///   degree_scale   1 x 1      weight on the node degree
///   neighbor_mix   p x p      mixes summed neighbor embeddings
///   latency_mix    p x p      mixes summed latency features
///   latency_proj   p x 1      lifts a scalar latency to p features
///   pooled_proj    p x p      graph-level (summed) embedding
///   current_proj   p x p      embedding of the tour's current node
///   candidate_proj p x p      embedding of the candidate node
///   head_in        h x (3p+1) first scoring layer
///   head_hidden    h x h      second scoring layer
///   head_out       h x 1      output weights
struct EmbedParams {
  EmbedConfig config;
  Eigen::MatrixXd degree_scale;
  Eigen::MatrixXd neighbor_mix;
  Eigen::MatrixXd latency_mix;
  Eigen::MatrixXd latency_proj;
  Eigen::MatrixXd pooled_proj;
  Eigen::MatrixXd current_proj;
  Eigen::MatrixXd candidate_proj;
  Eigen::MatrixXd head_in;
  Eigen::MatrixXd head_hidden;
  Eigen::MatrixXd head_out;

  static constexpr std::size_t kBlockCount = 10;

  /// All blocks zero, shaped per config. Throws InvalidInput on bad dims.
  static EmbedParams zeros(const EmbedConfig& config);
  /// Each block uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  static EmbedParams random(const EmbedConfig& config, Seed seed);

  std::array<Eigen::MatrixXd*, kBlockCount> blocks();
  std::array<const Eigen::MatrixXd*, kBlockCount> blocks() const;
  static std::string_view block_name(std::size_t index);

  std::size_t parameter_count() const;
  bool all_finite() const;

  /// this += scale * other, block by block.
  void add_scaled(const EmbedParams& other, double scale);
  void set_zero();

  friend bool operator==(const EmbedParams& a, const EmbedParams& b);
};

/// Binary checkpoint; layout documented in docs/checkpoint-format.md.
void write_params(std::ostream& out, const EmbedParams& params);
EmbedParams read_params(std::istream& in);
void save_params(const std::filesystem::path& path, const EmbedParams& params);
EmbedParams load_params(const std::filesystem::path& path);
/// As load_params, but throws FormatError naming expected/actual values when
/// p, h or t_embed differ from `expected`.
EmbedParams load_params(const std::filesystem::path& path, const EmbedConfig& expected);

}  // namespace ringopt::qlearn

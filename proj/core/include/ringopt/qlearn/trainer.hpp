#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "ringopt/graph.hpp"
#include "ringopt/qlearn/episode.hpp"
#include "ringopt/qlearn/network.hpp"
#include "ringopt/qlearn/params.hpp"
#include "ringopt/qlearn/replay.hpp"
#include "ringopt/rng.hpp"

namespace ringopt::qlearn {

enum class TrainDistribution { Uniform, Gaussian };

struct TrainConfig {
  std::size_t n_nodes = 20;
  int k_rings = 2;
  std::size_t epochs = 10'000;
  std::size_t batch = 32;
  double lr = 5e-4;
  double gamma = 1.0;
  double alpha_latency = 0.1;
  /// Rescale the batch gradient to this global L2 norm when it is larger
  /// (0 disables clipping).
  double max_grad_norm = 10.0;
  std::size_t replay_capacity = 1'000'000;
  EmbedConfig embed;
  TrainDistribution distribution = TrainDistribution::Uniform;
  Seed seed{1};
  /// Evaluate greedy construction on held-out graphs every this many epochs
  /// (0 disables the test curve).
  std::size_t eval_every = 0;
  std::size_t eval_graphs = 5;

  /// Throws InvalidInput on non-positive sizes or gamma outside (0, 1].
  void validate() const;
};

/// max(1 - epoch / 2000, 0.05).
double epsilon_schedule(std::size_t epoch);

struct EpochLog {
  std::size_t epoch = 0;
  double epsilon = 0.0;
  /// Largest-component diameter (ms) of the episode's final topology.
  double episode_diameter = 0.0;
  double mean_loss = 0.0;
  std::size_t steps = 0;
  bool stuck = false;
  /// Mean greedy diameter on held-out graphs; NaN when not evaluated.
  double test_diameter = std::numeric_limits<double>::quiet_NaN();
};

/// Per-step diameter bookkeeping of one episode, D(G_0) taken as 0.
struct EpisodeRecord {
  std::vector<double> diameters;       // D(G_1) .. D(G_T)
  std::vector<double> diameter_terms;  // D(G_{t}) - D(G_{t+1})
  std::vector<double> rewards;
  double final_diameter = 0.0;
};

/// One SGD step on the mean squared TD error of `batch`. Targets use the
/// current parameters: y = r + gamma * max_a' Q(s', a'), or y = r when
/// terminal. The gradient is clipped to `max_grad_norm` (0 disables).
/// Returns the mean loss before the update. Throws NumericError when the
/// loss is not finite.
double sgd_step(EmbedParams& params, std::span<const Transition* const> batch, double lr, double gamma,
                double max_grad_norm = 0.0);

/// Mean squared TD error of `batch` against explicit targets, and its
/// gradient (when `grad` is non-null).
double batch_loss(const EmbedParams& params, std::span<const Transition* const> batch,
                  std::span<const double> targets, EmbedParams* grad);

/// TD targets for `batch` under `params`.
std::vector<double> td_targets(const EmbedParams& params, std::span<const Transition* const> batch, double gamma);

class Trainer {
 public:
  explicit Trainer(TrainConfig config, std::optional<EmbedParams> init = std::nullopt);

  /// Draws a graph, plays one epsilon-greedy episode, updating after every
  /// step once the buffer holds at least one batch.
  EpochLog run_epoch();
  /// Runs the remaining epochs; `on_epoch` sees every log entry.
  void run(const std::function<void(const EpochLog&)>& on_epoch = {});

  const EmbedParams& params() const { return params_; }
  const std::vector<EpochLog>& log() const { return log_; }
  const EpisodeRecord& last_episode() const { return last_episode_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const TrainConfig& config() const { return config_; }

 private:
  LatencyMatrix draw_graph(Seed seed) const;
  double evaluate_test_graphs() const;

  TrainConfig config_;
  EmbedParams params_;
  ReplayBuffer buffer_;
  Rng rng_;
  std::size_t epoch_ = 0;
  std::vector<EpochLog> log_;
  EpisodeRecord last_episode_;
};

struct TrainResult {
  EmbedParams params;
  std::vector<EpochLog> log;
};

TrainResult train(const TrainConfig& config, const std::function<void(const EpochLog&)>& on_epoch = {});

struct ConstructResult {
  Topology topology;
  /// The episode got stuck before all K rings closed.
  bool early_termination = false;
  std::size_t steps = 0;
  NodeId start = 0;
};

/// Ring-seed used for rings after the first when none is given.
Seed default_ring_seed(NodeId start);

/// Pure argmax rollout (ties to the lowest id), re-embedding every step.
ConstructResult greedy_construct(const LatencyMatrix& w, const EmbedParams& params, NodeId start, DegreeBound k,
                                 std::optional<Seed> ring_seed = std::nullopt);

/// `count` distinct start nodes drawn from a seeded shuffle.
std::vector<NodeId> pick_starts(std::size_t n, std::size_t count, Seed seed);

/// Runs greedy_construct from every start and keeps the lowest diameter
/// (ties to the earlier start).
ConstructResult best_of_starts(const LatencyMatrix& w, const EmbedParams& params, DegreeBound k,
                               std::span<const NodeId> starts);

}  // namespace ringopt::qlearn

#include <algorithm>
#include <cmath>
#include <utility>

#include "ringopt/errors.hpp"
#include "ringopt/latency.hpp"
#include "ringopt/qlearn/trainer.hpp"

namespace ringopt::qlearn {

namespace {

std::shared_ptr<const LatencyMatrix> borrow(const LatencyMatrix& w) {
  return std::shared_ptr<const LatencyMatrix>(std::shared_ptr<void>{}, &w);
}

double max_next_q(const EmbedParams& params, const EpisodeState& next) {
  const auto legal = legal_actions(next);
  if (legal.empty()) return 0.0;
  const GraphView g = view_of(next, params.config);
  const Eigen::MatrixXd mu = embed(g, params);
  return q_scores(g, next.current, legal, mu, params).maxCoeff();
}

}  // namespace

void TrainConfig::validate() const {
  if (n_nodes < 3) throw InvalidInput("training needs n_nodes >= 3");
  if (k_rings < 1) throw InvalidInput("training needs k_rings >= 1");
  if (epochs < 1 || batch < 1 || replay_capacity < 1) throw InvalidInput("epochs, batch and capacity must be positive");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw InvalidInput("learning rate must be finite and >= 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidInput("gamma must lie in (0, 1]");
  if (!(alpha_latency >= 0.0)) throw InvalidInput("alpha_latency must be >= 0");
  if (!(max_grad_norm >= 0.0)) throw InvalidInput("max_grad_norm must be >= 0");
}

double epsilon_schedule(std::size_t epoch) {
  return std::max(1.0 - static_cast<double>(epoch) / 2000.0, 0.05);
}

std::vector<double> td_targets(const EmbedParams& params, std::span<const Transition* const> batch, double gamma) {
  std::vector<double> targets;
  targets.reserve(batch.size());
  for (const Transition* t : batch) {
    double y = t->reward;
    if (!t->terminal) y += gamma * max_next_q(params, t->next_state.materialize());
    targets.push_back(y);
  }
  return targets;
}

double batch_loss(const EmbedParams& params, std::span<const Transition* const> batch,
                  std::span<const double> targets, EmbedParams* grad) {
  if (batch.size() != targets.size()) throw InvalidInput("batch/target size mismatch");
  if (batch.empty()) return 0.0;
  const double weight = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  EmbedParams scratch;
  if (!grad) scratch = EmbedParams::zeros(params.config);
  EmbedParams& g = grad ? *grad : scratch;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const EpisodeState s = batch[i]->state.materialize();
    loss += weight * accumulate_gradient(view_of(s, params.config), s.current, batch[i]->action, targets[i], weight,
                                         params, g);
  }
  return loss;
}

double sgd_step(EmbedParams& params, std::span<const Transition* const> batch, double lr, double gamma,
                double max_grad_norm) {
  const auto targets = td_targets(params, batch, gamma);
  EmbedParams grad = EmbedParams::zeros(params.config);
  const double loss = batch_loss(params, batch, targets, &grad);
  if (!std::isfinite(loss)) throw NumericError("training loss is not finite");
  double scale = 1.0;
  if (max_grad_norm > 0.0) {
    double sq = 0.0;
    for (const Eigen::MatrixXd* b : std::as_const(grad).blocks()) sq += b->squaredNorm();
    const double norm = std::sqrt(sq);
    if (norm > max_grad_norm) scale = max_grad_norm / norm;
  }
  params.add_scaled(grad, -lr * scale);
  if (!params.all_finite()) throw NumericError("parameters became non-finite after update");
  return loss;
}

// ---------------------------------------------------------------------------
// Trainer

Trainer::Trainer(TrainConfig config, std::optional<EmbedParams> init)
    : config_(std::move(config)),
      buffer_(config_.replay_capacity),
      rng_(derive_seed(config_.seed, {0x747261696eULL})) {
  config_.validate();
  if (init) {
    if (!(init->config == config_.embed)) throw InvalidInput("initial parameters do not match embed config");
    params_ = std::move(*init);
  } else {
    params_ = EmbedParams::random(config_.embed, derive_seed(config_.seed, {0x696e6974ULL}));
  }
}

LatencyMatrix Trainer::draw_graph(Seed seed) const {
  switch (config_.distribution) {
    case TrainDistribution::Gaussian: return gen_gaussian(config_.n_nodes, seed);
    case TrainDistribution::Uniform: break;
  }
  return gen_uniform(config_.n_nodes, seed);
}

double Trainer::evaluate_test_graphs() const {
  double total = 0.0;
  const DegreeBound k(config_.k_rings);
  for (std::size_t i = 0; i < config_.eval_graphs; ++i) {
    const LatencyMatrix w = draw_graph(derive_seed(config_.seed, {0x74657374ULL, i}));
    total += diameter(greedy_construct(w, params_, 0, k).topology, w).value;
  }
  return config_.eval_graphs ? total / static_cast<double>(config_.eval_graphs) : 0.0;
}

EpochLog Trainer::run_epoch() {
  EpochLog entry;
  entry.epoch = epoch_;
  entry.epsilon = epsilon_schedule(epoch_);
  const auto w = std::make_shared<const LatencyMatrix>(draw_graph(derive_seed(config_.seed, {epoch_})));
  const std::size_t n = w->size();
  const DegreeBound k(config_.k_rings);

  auto trace = std::make_shared<EpisodeTrace>();
  const auto start = static_cast<NodeId>(uniform_below(rng_, n));
  EpisodeState state = begin_episode(w, k, start, Seed{rng_()});
  trace->w = w;
  trace->k = k.k();
  trace->ring_starts = state.ring_starts;

  last_episode_ = EpisodeRecord{};
  double d_prev = 0.0;
  double loss_sum = 0.0;
  std::size_t updates = 0;
  std::size_t step = 0;
  while (!state.terminated) {
    const auto legal = legal_actions(state);
    NodeId action = legal.front();
    if (legal.size() > 1) {
      if (uniform01(rng_) < entry.epsilon) {
        action = legal[uniform_below(rng_, legal.size())];
      } else {
        action = argmax_action(view_of(state, params_.config), state.current, legal, params_);
      }
    }
    const double edge_w = (*w)(state.current, action);
    const StepInfo info = advance(state, action);
    trace->actions.push_back(action);
    const double d_next = diameter(state.partial, *w).value;
    const double reward = step_reward(d_prev, d_next, edge_w, config_.alpha_latency);
    last_episode_.diameters.push_back(d_next);
    last_episode_.diameter_terms.push_back(d_prev - d_next);
    last_episode_.rewards.push_back(reward);
    buffer_.push(Transition{StateRef{trace, step}, action, reward, StateRef{trace, step + 1}, info.terminal});
    ++step;
    d_prev = d_next;
    entry.stuck = info.stuck;

    if (buffer_.size() >= config_.batch) {
      const auto batch = buffer_.sample(rng_, config_.batch);
      try {
        loss_sum += sgd_step(params_, batch, config_.lr, config_.gamma, config_.max_grad_norm);
      } catch (const NumericError& e) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch_) + ", step " +
                           std::to_string(step) + ": " + e.what());
      }
      ++updates;
    }
  }
  last_episode_.final_diameter = d_prev;
  entry.episode_diameter = d_prev;
  entry.steps = step;
  entry.mean_loss = updates ? loss_sum / static_cast<double>(updates) : 0.0;
  if (config_.eval_every && (epoch_ % config_.eval_every == 0 || epoch_ + 1 == config_.epochs)) {
    entry.test_diameter = evaluate_test_graphs();
  }
  log_.push_back(entry);
  ++epoch_;
  return entry;
}

void Trainer::run(const std::function<void(const EpochLog&)>& on_epoch) {
  while (epoch_ < config_.epochs) {
    const EpochLog entry = run_epoch();
    if (on_epoch) on_epoch(entry);
  }
}

TrainResult train(const TrainConfig& config, const std::function<void(const EpochLog&)>& on_epoch) {
  Trainer trainer(config);
  trainer.run(on_epoch);
  return TrainResult{trainer.params(), trainer.log()};
}

// ---------------------------------------------------------------------------
// Greedy construction

Seed default_ring_seed(NodeId start) {
  return derive_seed(Seed{0x67726565647953ULL}, {static_cast<std::uint64_t>(start)});
}

ConstructResult greedy_construct(const LatencyMatrix& w, const EmbedParams& params, NodeId start, DegreeBound k,
                                 std::optional<Seed> ring_seed) {
  EpisodeState state = begin_episode(borrow(w), k, start, ring_seed.value_or(default_ring_seed(start)));
  ConstructResult result;
  result.start = start;
  while (!state.terminated) {
    const auto legal = legal_actions(state);
    const NodeId action = argmax_action(view_of(state, params.config), state.current, legal, params);
    const StepInfo info = advance(state, action);
    ++result.steps;
    result.early_termination = info.stuck;
  }
  result.topology = std::move(state.partial);
  return result;
}

std::vector<NodeId> pick_starts(std::size_t n, std::size_t count, Seed seed) {
  std::vector<NodeId> nodes(n);
  for (std::size_t i = 0; i < n; ++i) nodes[i] = static_cast<NodeId>(i);
  Rng rng(seed);
  shuffle(std::span<NodeId>(nodes), rng);
  nodes.resize(std::min(count, n));
  return nodes;
}

ConstructResult best_of_starts(const LatencyMatrix& w, const EmbedParams& params, DegreeBound k,
                               std::span<const NodeId> starts) {
  if (starts.empty()) throw InvalidInput("best_of_starts needs at least one start");
  std::optional<ConstructResult> best;
  double best_d = kInfinity;
  for (const NodeId s : starts) {
    ConstructResult r = greedy_construct(w, params, s, k);
    const double d = diameter(r.topology, w).value;
    if (d < best_d) {
      best_d = d;
      best = std::move(r);
    }
  }
  return std::move(*best);
}

}  // namespace ringopt::qlearn

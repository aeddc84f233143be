#pragma once

// Graph embedding and Q-value head.
//
// Embedding update, run t_embed times from mu = 0, synchronously over nodes:
//
//   mu_v <- relu( degree_scale * x_v * 1
//                 + neighbor_mix * sum_{u in N(v)} mu_u
//                 + latency_mix  * sum_{u in R(v)} relu(latency_proj * w(v,u)) )
//
// x_v is the degree of v in the partial topology, N(v) and R(v) follow
// EmbedConfig::structure_range / latency_range. Scoring an edge
// (current, u):
//
//   x = [ w(current,u), pooled_proj * sum_v mu_v, current_proj * mu_current,
//         candidate_proj * mu_u ]
//   Q = head_out^T relu(head_hidden relu(head_in relu(x)))

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ringopt/graph.hpp"
#include "ringopt/qlearn/episode.hpp"
#include "ringopt/qlearn/params.hpp"

namespace ringopt::qlearn {

/// What the network sees: latencies (divided by `latency_scale`) and the
/// partial topology.
struct GraphView {
  const LatencyMatrix& w;
  double latency_scale;
  const Topology& partial;
};

/// Divisor applied to latencies before they enter the network.
double latency_scale(const LatencyMatrix& w, const EmbedConfig& config);

GraphView view_of(const EpisodeState& s, const EmbedConfig& config);

/// n x p table of final node embeddings (row v = mu_v). Throws NumericError
/// on a non-finite intermediate.
Eigen::MatrixXd embed(const GraphView& g, const EmbedParams& params);
Eigen::MatrixXd embed(const EpisodeState& s, const EmbedParams& params);

/// Q value of stepping from `current` to every node in `candidates`.
Eigen::VectorXd q_scores(const GraphView& g, NodeId current, std::span<const NodeId> candidates,
                         const Eigen::MatrixXd& mu, const EmbedParams& params);

double q_score(const EpisodeState& s, NodeId u, const Eigen::MatrixXd& mu, const EmbedParams& params);

/// Highest-scoring candidate, ties to the lowest id. A single candidate is
/// returned without evaluating the network. Requires a non-empty list.
NodeId argmax_action(const GraphView& g, NodeId current, std::span<const NodeId> candidates,
                     const EmbedParams& params);

/// Adds d/dtheta of (target - Q(s, action))^2 * weight into `grad`, target
/// held fixed. Returns the unweighted squared error.
double accumulate_gradient(const GraphView& g, NodeId current, NodeId action, double target, double weight,
                           const EmbedParams& params, EmbedParams& grad);

}  // namespace ringopt::qlearn

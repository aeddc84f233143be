#include <algorithm>
#include <cmath>

#include "ringopt/errors.hpp"
#include "ringopt/qlearn/network.hpp"

namespace ringopt::qlearn {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd relu(const MatrixXd& m) { return m.cwiseMax(0.0); }

MatrixXd relu_mask(const MatrixXd& m) { return (m.array() > 0.0).cast<double>().matrix(); }

// Row v: sum over N(v) of rows of `m`.
MatrixXd neighbor_sum(const GraphView& g, NeighborRange range, const MatrixXd& m) {
  const auto n = static_cast<Eigen::Index>(g.partial.size());
  if (range == NeighborRange::AllNodes) {
    const Eigen::RowVectorXd total = m.colwise().sum();
    return (-m).rowwise() + total;
  }
  MatrixXd out = MatrixXd::Zero(n, m.cols());
  for (Eigen::Index v = 0; v < n; ++v) {
    for (const NodeId u : g.partial.neighbors(static_cast<NodeId>(v))) out.row(v) += m.row(u);
  }
  return out;
}

// Per node: sum of scaled latencies over R(v).
VectorXd latency_row_sums(const GraphView& g, NeighborRange range) {
  const std::size_t n = g.partial.size();
  VectorXd sums = VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t v = 0; v < n; ++v) {
    double s = 0.0;
    if (range == NeighborRange::AllNodes) {
      for (const double x : g.w.row(static_cast<NodeId>(v))) s += x;
    } else {
      for (const NodeId u : g.partial.neighbors(static_cast<NodeId>(v))) s += g.w(static_cast<NodeId>(v), u);
    }
    sums(static_cast<Eigen::Index>(v)) = s / g.latency_scale;
  }
  return sums;
}

struct EmbedTrace {
  VectorXd degree;
  VectorXd latency_sums;
  MatrixXd latency_features;         // n x p, sum_u relu(latency_proj * w)
  std::vector<MatrixXd> mu;          // t_embed + 1 entries, mu[0] = 0
  std::vector<MatrixXd> neighbor;    // neighbor sums of mu[t]
  std::vector<MatrixXd> pre;         // pre-activations producing mu[t+1]
};

void check_finite(const MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw NumericError(std::string("non-finite value in ") + what);
}

EmbedTrace embed_forward(const GraphView& g, const EmbedParams& params) {
  const auto& cfg = params.config;
  const auto n = static_cast<Eigen::Index>(g.partial.size());
  EmbedTrace t;
  t.degree.resize(n);
  for (Eigen::Index v = 0; v < n; ++v) t.degree(v) = static_cast<double>(g.partial.degree(static_cast<NodeId>(v)));
  t.latency_sums = latency_row_sums(g, cfg.latency_range);
  // Latencies are non-negative, so sum_u relu(theta4_j * w) = relu(theta4_j) * sum_u w.
  t.latency_features = t.latency_sums * relu(params.latency_proj).transpose();
  const MatrixXd constant =
      (t.degree * params.degree_scale(0, 0)).replicate(1, cfg.p) + t.latency_features * params.latency_mix.transpose();
  t.mu.reserve(static_cast<std::size_t>(cfg.t_embed) + 1);
  t.mu.push_back(MatrixXd::Zero(n, cfg.p));
  for (int it = 0; it < cfg.t_embed; ++it) {
    t.neighbor.push_back(neighbor_sum(g, cfg.structure_range, t.mu.back()));
    t.pre.push_back(constant + t.neighbor.back() * params.neighbor_mix.transpose());
    t.mu.push_back(relu(t.pre.back()));
  }
  check_finite(t.mu.back(), "node embedding");
  return t;
}

struct HeadTrace {
  VectorXd x;
  VectorXd z1;
  VectorXd z2;
  double q = 0.0;
};

HeadTrace head_forward(const GraphView& g, NodeId current, NodeId u, const MatrixXd& mu, const EmbedParams& params) {
  const int p = params.config.p;
  HeadTrace t;
  t.x.resize(3 * p + 1);
  t.x(0) = g.w(current, u) / g.latency_scale;
  t.x.segment(1, p) = params.pooled_proj * mu.colwise().sum().transpose();
  t.x.segment(1 + p, p) = params.current_proj * mu.row(current).transpose();
  t.x.segment(1 + 2 * p, p) = params.candidate_proj * mu.row(u).transpose();
  t.z1 = params.head_in * relu(t.x);
  t.z2 = params.head_hidden * relu(t.z1);
  t.q = (params.head_out.transpose() * relu(t.z2))(0, 0);
  return t;
}

}  // namespace

double latency_scale(const LatencyMatrix& w, const EmbedConfig& config) {
  if (config.normalization == LatencyNormalization::MatrixMean) {
    const double m = w.mean_off_diagonal();
    return m > 0.0 ? m : 1.0;
  }
  return 1.0;
}

GraphView view_of(const EpisodeState& s, const EmbedConfig& config) {
  return GraphView{*s.w, latency_scale(*s.w, config), s.partial};
}

Eigen::MatrixXd embed(const GraphView& g, const EmbedParams& params) {
  if (g.partial.size() != g.w.size()) throw InvalidInput("embedding: topology/matrix size mismatch");
  return std::move(embed_forward(g, params).mu.back());
}

Eigen::MatrixXd embed(const EpisodeState& s, const EmbedParams& params) { return embed(view_of(s, params.config), params); }

Eigen::VectorXd q_scores(const GraphView& g, NodeId current, std::span<const NodeId> candidates, const MatrixXd& mu,
                         const EmbedParams& params) {
  const int p = params.config.p;
  const auto m = static_cast<Eigen::Index>(candidates.size());
  // relu(x) splits into a part shared by all candidates and a per-candidate part.
  const VectorXd pooled = relu(params.pooled_proj * mu.colwise().sum().transpose());
  const VectorXd cur = relu(params.current_proj * mu.row(current).transpose());
  const VectorXd shared = params.head_in.middleCols(1, p) * pooled + params.head_in.middleCols(1 + p, p) * cur;
  MatrixXd cand_mu(p, m);
  VectorXd lat(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const NodeId u = candidates[static_cast<std::size_t>(i)];
    cand_mu.col(i) = mu.row(u).transpose();
    lat(i) = std::max(0.0, g.w(current, u) / g.latency_scale);
  }
  MatrixXd z1 = params.head_in.middleCols(1 + 2 * p, p) * relu(params.candidate_proj * cand_mu);
  z1 += params.head_in.col(0) * lat.transpose();
  z1.colwise() += shared;
  const MatrixXd a2 = relu(params.head_hidden * relu(z1));
  VectorXd q = (params.head_out.transpose() * a2).transpose();
  if (!q.allFinite()) throw NumericError("non-finite Q value");
  return q;
}

double q_score(const EpisodeState& s, NodeId u, const MatrixXd& mu, const EmbedParams& params) {
  const GraphView g = view_of(s, params.config);
  const NodeId cand[] = {u};
  return q_scores(g, s.current, cand, mu, params)(0);
}

NodeId argmax_action(const GraphView& g, NodeId current, std::span<const NodeId> candidates,
                     const EmbedParams& params) {
  if (candidates.empty()) throw InvalidInput("argmax over an empty action set");
  if (candidates.size() == 1) return candidates.front();
  const MatrixXd mu = embed(g, params);
  const VectorXd q = q_scores(g, current, candidates, mu, params);
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const auto bb = static_cast<Eigen::Index>(best);
    if (q(ii) > q(bb) || (q(ii) == q(bb) && candidates[i] < candidates[best])) best = i;
  }
  return candidates[best];
}

double accumulate_gradient(const GraphView& g, NodeId current, NodeId action, double target, double weight,
                           const EmbedParams& params, EmbedParams& grad) {
  const auto& cfg = params.config;
  const int p = cfg.p;
  const EmbedTrace et = embed_forward(g, params);
  const MatrixXd& mu = et.mu.back();
  const HeadTrace ht = head_forward(g, current, action, mu, params);
  const double err = target - ht.q;
  if (!std::isfinite(err)) throw NumericError("non-finite TD error");

  // Scoring head.
  const double dq = -2.0 * err * weight;
  const VectorXd a2 = relu(ht.z2);
  const VectorXd a1 = relu(ht.z1);
  const VectorXd a0 = relu(ht.x);
  grad.head_out += dq * a2;
  const VectorXd dz2 = (dq * params.head_out).cwiseProduct(relu_mask(ht.z2));
  grad.head_hidden += dz2 * a1.transpose();
  const VectorXd dz1 = (params.head_hidden.transpose() * dz2).cwiseProduct(relu_mask(ht.z1));
  grad.head_in += dz1 * a0.transpose();
  const VectorXd dx = (params.head_in.transpose() * dz1).cwiseProduct(relu_mask(ht.x));

  const VectorXd pooled_sum = mu.colwise().sum().transpose();
  const VectorXd d_pooled = dx.segment(1, p);
  const VectorXd d_cur = dx.segment(1 + p, p);
  const VectorXd d_cand = dx.segment(1 + 2 * p, p);
  grad.pooled_proj += d_pooled * pooled_sum.transpose();
  grad.current_proj += d_cur * mu.row(current);
  grad.candidate_proj += d_cand * mu.row(action);

  MatrixXd dmu = (params.pooled_proj.transpose() * d_pooled).transpose().replicate(mu.rows(), 1);
  dmu.row(current) += (params.current_proj.transpose() * d_cur).transpose();
  dmu.row(action) += (params.candidate_proj.transpose() * d_cand).transpose();

  // Unrolled embedding iterations.
  MatrixXd d_latency_features = MatrixXd::Zero(mu.rows(), p);
  for (int it = cfg.t_embed - 1; it >= 0; --it) {
    const auto idx = static_cast<std::size_t>(it);
    const MatrixXd dz = dmu.cwiseProduct(relu_mask(et.pre[idx]));
    grad.degree_scale(0, 0) += (et.degree.transpose() * dz.rowwise().sum())(0, 0);
    grad.neighbor_mix += dz.transpose() * et.neighbor[idx];
    grad.latency_mix += dz.transpose() * et.latency_features;
    d_latency_features += dz * params.latency_mix;
    if (it > 0) {
      // Neighbor sums are symmetric, so the adjoint is the same sum.
      dmu = neighbor_sum(g, cfg.structure_range, dz * params.neighbor_mix);
    }
  }
  const VectorXd d_relu_proj = d_latency_features.transpose() * et.latency_sums;
  grad.latency_proj += d_relu_proj.cwiseProduct(relu_mask(params.latency_proj));
  return err * err;
}

}  // namespace ringopt::qlearn

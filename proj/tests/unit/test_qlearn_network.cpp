#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "oracles.hpp"
#include "ringopt/errors.hpp"
#include "ringopt/latency.hpp"
#include "ringopt/qlearn/network.hpp"

using namespace ringopt;
using namespace ringopt::qlearn;

namespace {

Topology partial_path(std::size_t n, std::size_t edges) {
  Topology t(n);
  for (std::size_t i = 0; i + 1 < n && i < edges; ++i) t.add_edge(static_cast<NodeId>(i), static_cast<NodeId>(i + 1));
  return t;
}

double q_at(const LatencyMatrix& w, const Topology& partial, NodeId current, NodeId u, const EmbedParams& params) {
  const GraphView g{w, latency_scale(w, params.config), partial};
  const auto mu = embed(g, params);
  const NodeId c[] = {u};
  return q_scores(g, current, c, mu, params)(0);
}

std::vector<EmbedConfig> config_variants() {
  std::vector<EmbedConfig> out;
  for (auto s : {NeighborRange::PartialNeighbors, NeighborRange::AllNodes})
    for (auto l : {NeighborRange::PartialNeighbors, NeighborRange::AllNodes})
      for (auto norm : {LatencyNormalization::None, LatencyNormalization::MatrixMean})
        out.push_back(EmbedConfig{6, 10, 3, s, l, norm});
  return out;
}

}  // namespace

TEST(Embed, MatchesLoopOracle) {
  const auto w = gen_gaussian(12, Seed{2});
  const auto partial = partial_path(12, 7);
  for (const auto& cfg : config_variants()) {
    const auto params = EmbedParams::random(cfg, Seed{11});
    const GraphView g{w, latency_scale(w, cfg), partial};
    const auto mu = embed(g, params);
    const auto ref = oracle::embed_loop(w, partial, params);
    ASSERT_EQ(mu.rows(), 12);
    ASSERT_EQ(mu.cols(), cfg.p);
    for (int v = 0; v < 12; ++v)
      for (int j = 0; j < cfg.p; ++j) EXPECT_NEAR(mu(v, j), ref[v][j], 1e-9);
  }
}

TEST(QScore, MatchesLoopOracle) {
  const auto w = gen_uniform(10, Seed{5});
  const auto partial = partial_path(10, 4);
  for (const auto& cfg : config_variants()) {
    const auto params = EmbedParams::random(cfg, Seed{12});
    const GraphView g{w, latency_scale(w, cfg), partial};
    const auto mu = embed(g, params);
    std::vector<NodeId> cands{5, 6, 7, 8, 9};
    const auto q = q_scores(g, 4, cands, mu, params);
    for (std::size_t i = 0; i < cands.size(); ++i) {
      const double ref = oracle::q_loop(w, partial, 4, cands[i], params);
      EXPECT_NEAR(q(static_cast<Eigen::Index>(i)), ref, 1e-6 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST(QScore, ZeroParamsGiveZero) {
  const auto w = gen_uniform(8, Seed{1});
  const auto partial = partial_path(8, 3);
  EXPECT_EQ(q_at(w, partial, 3, 5, EmbedParams::zeros(EmbedConfig{})), 0.0);
}

TEST(QScore, ZeroOutputLayerGivesZero) {
  const auto w = gen_uniform(8, Seed{1});
  auto params = EmbedParams::random(EmbedConfig{}, Seed{3});
  params.head_out.setZero();
  EXPECT_EQ(q_at(w, partial_path(8, 3), 3, 6, params), 0.0);
}

TEST(Embed, PermutationEquivariant) {
  const std::size_t n = 9;
  const auto w = gen_gaussian(n, Seed{7});
  auto partial = partial_path(n, 5);
  partial.add_edge(0, 6);
  std::vector<NodeId> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(Seed{8});
  shuffle(std::span<NodeId>(perm), rng);

  std::vector<double> pw(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      pw[static_cast<std::size_t>(perm[i]) * n + static_cast<std::size_t>(perm[j])] =
          w(static_cast<NodeId>(i), static_cast<NodeId>(j));
  const auto w2 = LatencyMatrix::from_row_major(n, pw);
  Topology p2(n);
  for (const auto& e : partial.edges()) p2.add_edge(perm[e.u], perm[e.v]);

  for (const auto& cfg : config_variants()) {
    const auto params = EmbedParams::random(cfg, Seed{4});
    const auto mu1 = embed(GraphView{w, latency_scale(w, cfg), partial}, params);
    const auto mu2 = embed(GraphView{w2, latency_scale(w2, cfg), p2}, params);
    for (std::size_t v = 0; v < n; ++v)
      for (int j = 0; j < cfg.p; ++j)
        EXPECT_NEAR(mu1(static_cast<Eigen::Index>(v), j), mu2(perm[v], j), 1e-9);
    EXPECT_NEAR(q_at(w, partial, 5, 8, params), q_at(w2, p2, perm[5], perm[8], params), 1e-9);
  }
}

TEST(Embed, EmptyPartialTopology) {
  const auto w = gen_uniform(6, Seed{3});
  const Topology empty(6);
  const auto params = EmbedParams::random(EmbedConfig{}, Seed{5});
  const GraphView g{w, latency_scale(w, params.config), empty};
  const auto mu = embed(g, params);
  EXPECT_TRUE(mu.allFinite());
  EXPECT_TRUE((mu.array() >= 0.0).all());
  const auto ref = oracle::embed_loop(w, empty, params);
  for (int v = 0; v < 6; ++v)
    for (int j = 0; j < params.config.p; ++j) EXPECT_NEAR(mu(v, j), ref[v][j], 1e-9);
}

TEST(ArgmaxAction, SingleCandidateAndTies) {
  const auto w = gen_uniform(6, Seed{3});
  const Topology empty(6);
  const auto zero = EmbedParams::zeros(EmbedConfig{});
  const GraphView g{w, 1.0, empty};
  const NodeId one[] = {4};
  EXPECT_EQ(argmax_action(g, 0, one, zero), 4);
  const NodeId many[] = {5, 2, 3};
  EXPECT_EQ(argmax_action(g, 0, many, zero), 2);
}

TEST(Gradient, MatchesFiniteDifferences) {
  const EmbedConfig cfg{4, 8, 3};
  const auto w = gen_gaussian(8, Seed{21});
  auto partial = partial_path(8, 4);
  partial.add_edge(1, 6);
  const NodeId current = 4;
  const NodeId action = 7;
  const double target = 3.0;

  for (std::uint64_t seed : {31u, 32u, 33u}) {
    auto params = EmbedParams::random(cfg, Seed{seed});
    auto grad = EmbedParams::zeros(cfg);
    const GraphView g{w, latency_scale(w, cfg), partial};
    accumulate_gradient(g, current, action, target, 1.0, params, grad);

    const auto loss = [&](const EmbedParams& p) {
      const double e = target - q_at(w, partial, current, action, p);
      return e * e;
    };
    const double h = 1e-5;
    for (std::size_t b = 0; b < EmbedParams::kBlockCount; ++b) {
      Eigen::MatrixXd fd(params.blocks()[b]->rows(), params.blocks()[b]->cols());
      for (Eigen::Index i = 0; i < fd.size(); ++i) {
        double& x = params.blocks()[b]->data()[i];
        const double x0 = x;
        x = x0 + h;
        const double up = loss(params);
        x = x0 - h;
        const double down = loss(params);
        x = x0;
        fd.data()[i] = (up - down) / (2 * h);
      }
      const auto& an = *grad.blocks()[b];
      const double scale = std::max({fd.norm(), an.norm(), 1e-8});
      EXPECT_LT((fd - an).norm() / scale, 1e-4) << "block " << EmbedParams::block_name(b) << " seed " << seed;
    }
  }
}

TEST(Gradient, WeightScalesLinearly) {
  const EmbedConfig cfg{4, 8, 2};
  const auto w = gen_uniform(7, Seed{2});
  const auto partial = partial_path(7, 3);
  const auto params = EmbedParams::random(cfg, Seed{9});
  const GraphView g{w, latency_scale(w, cfg), partial};
  auto g1 = EmbedParams::zeros(cfg);
  auto g2 = EmbedParams::zeros(cfg);
  const double e1 = accumulate_gradient(g, 3, 5, 2.0, 1.0, params, g1);
  const double e2 = accumulate_gradient(g, 3, 5, 2.0, 0.5, params, g2);
  EXPECT_EQ(e1, e2);
  g2.add_scaled(g1, -0.5);
  for (const auto* b : std::as_const(g2).blocks()) EXPECT_LT(b->cwiseAbs().maxCoeff(), 1e-12);
}

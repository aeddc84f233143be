#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ringbench/bench.hpp"
#include "ringopt/adaptive.hpp"
#include "ringopt/errors.hpp"
#include "ringopt/latency.hpp"
#include "ringopt/qlearn/trainer.hpp"

using namespace ringopt;
using ringbench::UsageError;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

struct Common {
  std::uint64_t seed = 1;
  std::string dist = "uniform";
  std::string out;
};

struct MethodFlags {
  int k = 0;
  std::size_t perigee_d_out = 0;
  std::size_t starts = 10;
  std::size_t partitions = 8;
  std::string partition_mode = "stride";
  std::string leftover_mode = "seam";
  std::size_t budget = 10'000;
  std::size_t population = 100;
  double threshold = 0.2;
  std::size_t samples = 0;
  std::size_t rounds = 0;
  bool inverted = false;
  std::string model;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Base seed");
  cmd->add_option("--dist", c.dist, "uniform | gaussian | site:PATH | two-cluster[:MS]");
  cmd->add_option("--out", c.out, "Output file (default stdout)");
}

void add_method_flags(CLI::App* cmd, MethodFlags& f) {
  cmd->add_option("--k", f.k, "Rings per node (0 = ceil(log2 n))");
  cmd->add_option("--perigee-dout", f.perigee_d_out, "Perigee out-degree (0 = ceil(log2 n))");
  cmd->add_option("--starts", f.starts, "Start nodes tried by dgro");
  cmd->add_option("--partitions", f.partitions, "Partitions for the parallel methods");
  cmd->add_option("--partition-mode", f.partition_mode, "stride | block")->check(CLI::IsMember({"stride", "block"}));
  cmd->add_option("--leftover-mode", f.leftover_mode, "seam | append")->check(CLI::IsMember({"seam", "append"}));
  cmd->add_option("--budget", f.budget, "GA candidate budget");
  cmd->add_option("--population", f.population, "GA population");
  cmd->add_option("--threshold", f.threshold, "Adaptive decision threshold in (0, 0.5)");
  cmd->add_option("--samples", f.samples, "Adaptive latency samples per node (0 = ceil(log2 n))");
  cmd->add_option("--rounds", f.rounds, "Gossip rounds (0 = 2 ceil(log2 n) x hop diameter)");
  cmd->add_flag("--inverted", f.inverted, "Swap the adaptive ring choices");
  cmd->add_option("--model", f.model, "DGRO checkpoint for dgro / dgro-parallel");
}

ringbench::MethodOptions method_options(const MethodFlags& f) {
  ringbench::MethodOptions o;
  o.k = f.k;
  o.perigee_d_out = f.perigee_d_out;
  o.starts = f.starts;
  o.partitions = f.partitions;
  o.partition_mode = f.partition_mode == "block" ? parallel::PartitionMode::Block : parallel::PartitionMode::Stride;
  o.leftover_mode = f.leftover_mode == "append" ? parallel::LeftoverMode::Append : parallel::LeftoverMode::Seam;
  o.ga_budget = f.budget;
  o.ga_population = f.population;
  o.adaptive.threshold = f.threshold;
  o.adaptive.k_samples = f.samples;
  o.adaptive.rounds = f.rounds;
  o.adaptive.inverted = f.inverted;
  if (!f.model.empty()) o.model = std::make_shared<const qlearn::EmbedParams>(qlearn::load_params(f.model));
  return o;
}

// Opens --out or falls back to stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw FormatError("cannot open " + path + " for writing");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

LatencyMatrix input_matrix(const std::string& matrix_path, const Common& c, std::size_t n) {
  if (!matrix_path.empty()) return load_matrix(matrix_path);
  if (n < 3) throw UsageError("give --matrix or --n >= 3");
  return ringbench::make_matrix(ringbench::parse_dist(c.dist), n, Seed{c.seed});
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string item = text.substr(pos, comma - pos);
    const std::size_t colon = item.find(':');
    try {
      if (colon == std::string::npos) {
        out.push_back(std::stoul(item));
      } else {
        // lo:hi:step
        const std::size_t second = item.find(':', colon + 1);
        if (second == std::string::npos) throw UsageError("size range must be lo:hi:step");
        const std::size_t lo = std::stoul(item.substr(0, colon));
        const std::size_t hi = std::stoul(item.substr(colon + 1, second - colon - 1));
        const std::size_t step = std::stoul(item.substr(second + 1));
        if (step == 0) throw UsageError("size range step must be positive");
        for (std::size_t s = lo; s <= hi; s += step) out.push_back(s);
      }
    } catch (const std::logic_error&) {
      throw UsageError("bad --sizes entry '" + item + "'");
    }
    pos = comma + 1;
  }
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"ringbench: build latency-aware ring overlays and measure their diameters"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ringbench 0.1.0");

  // sweep
  Common sweep_c;
  MethodFlags sweep_f;
  std::string sizes_text = "50:1000:50";
  std::size_t runs = 10;
  std::vector<std::string> methods;
  bool hop = false;
  std::size_t jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "Size sweep over methods, one CSV row per (size, run, method)");
  add_common(sweep, sweep_c);
  add_method_flags(sweep, sweep_f);
  sweep->add_option("--sizes", sizes_text, "Comma list of sizes or lo:hi:step ranges");
  sweep->add_option("--runs", runs, "Runs per size");
  sweep->add_option("--methods", methods, "Methods to run")->delimiter(',')->required();
  sweep->add_flag("--hop-diameter", hop, "Add a hop_diameter column");
  sweep->add_option("--jobs", jobs, "Cells evaluated concurrently");

  // build
  Common build_c;
  MethodFlags build_f;
  std::string build_method;
  std::size_t build_n = 0;
  std::string build_matrix;
  auto* build = app.add_subcommand("build", "Build one topology and write it as an edge list");
  add_common(build, build_c);
  add_method_flags(build, build_f);
  build->add_option("--method", build_method, "Method name")->required();
  build->add_option("--n", build_n, "Node count for a generated matrix");
  build->add_option("--matrix", build_matrix, "Latency matrix CSV instead of a generated one");

  // gen
  Common gen_c;
  std::size_t gen_n = 0;
  auto* gen = app.add_subcommand("gen", "Write a generated latency matrix as CSV");
  add_common(gen, gen_c);
  gen->add_option("--n", gen_n, "Node count")->required();

  // train
  Common train_c;
  qlearn::TrainConfig tc;
  std::string train_log;
  std::size_t progress_every = 100;
  auto* train = app.add_subcommand("train", "Train DGRO parameters and write a checkpoint");
  add_common(train, train_c);
  train->add_option("--n", tc.n_nodes, "Training graph size");
  train->add_option("--k", tc.k_rings, "Rings per node");
  train->add_option("--epochs", tc.epochs, "Training episodes");
  train->add_option("--batch", tc.batch, "Minibatch size");
  train->add_option("--lr", tc.lr, "Learning rate");
  train->add_option("--gamma", tc.gamma, "Discount factor in (0, 1]");
  train->add_option("--alpha", tc.alpha_latency, "Edge-latency reward penalty");
  train->add_option("--max-grad-norm", tc.max_grad_norm, "Gradient clipping norm (0 disables)");
  train->add_option("--replay", tc.replay_capacity, "Replay buffer capacity");
  train->add_option("--embed-dim", tc.embed.p, "Embedding dimension");
  train->add_option("--hidden", tc.embed.h, "Scoring head width");
  train->add_option("--t-embed", tc.embed.t_embed, "Embedding iterations");
  train->add_option("--eval-every", tc.eval_every, "Held-out evaluation period in epochs (0 = off)");
  train->add_option("--log", train_log, "Per-epoch CSV log");
  train->add_option("--progress", progress_every, "Print progress to stderr every this many epochs (0 = quiet)");

  // eval
  Common eval_c;
  std::string eval_model;
  std::string eval_matrix;
  std::size_t eval_n = 0;
  int eval_k = 0;
  std::size_t eval_starts = 10;
  auto* eval = app.add_subcommand("eval", "Greedy construction from several starts with a trained model");
  add_common(eval, eval_c);
  eval->add_option("--model", eval_model, "Checkpoint")->required();
  eval->add_option("--matrix", eval_matrix, "Latency matrix CSV");
  eval->add_option("--n", eval_n, "Node count for a generated matrix");
  eval->add_option("--k", eval_k, "Rings per node (0 = ceil(log2 n))");
  eval->add_option("--starts", eval_starts, "Start nodes tried");

  // adapt
  Common adapt_c;
  MethodFlags adapt_f;
  std::string adapt_topology;
  std::string adapt_matrix;
  std::string adapt_method;
  std::size_t adapt_n = 0;
  auto* adapt = app.add_subcommand("adapt", "Measure, gossip and report the ring-selection decision");
  add_common(adapt, adapt_c);
  add_method_flags(adapt, adapt_f);
  adapt->add_option("--topology", adapt_topology, "Edge-list topology file");
  adapt->add_option("--method", adapt_method, "Build the topology with this method instead");
  adapt->add_option("--matrix", adapt_matrix, "Latency matrix CSV");
  adapt->add_option("--n", adapt_n, "Node count for a generated matrix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (*sweep) {
    ringbench::SweepConfig cfg;
    cfg.sizes = parse_sizes(sizes_text);
    cfg.runs = runs;
    cfg.methods = methods;
    cfg.dist = ringbench::parse_dist(sweep_c.dist);
    cfg.seed = Seed{sweep_c.seed};
    cfg.hop_diameter = hop;
    cfg.jobs = jobs;
    cfg.options = method_options(sweep_f);
    cfg.validate();
    Output out(sweep_c.out);
    ringbench::write_csv_header(out.stream(), hop);
    ringbench::run_sweep(cfg, [&](const ringbench::SweepRow& row) {
      ringbench::write_csv_row(out.stream(), row);
      out.stream().flush();
    });
  } else if (*build) {
    auto opts = method_options(build_f);
    ringbench::check_method(build_method, opts);
    const LatencyMatrix w = input_matrix(build_matrix, build_c, build_n);
    const auto built = ringbench::build_topology(build_method, w, opts, Seed{build_c.seed});
    Output out(build_c.out);
    write_edge_list(out.stream(), built.topology, w);
    std::cerr << "method=" << build_method << " n=" << w.size() << " k=" << built.k
              << " edges=" << built.topology.edge_count()
              << " diameter_ms=" << format_double(diameter(built.topology, w).value)
              << " build_steps=" << built.build_steps << '\n';
    if (built.early_termination) std::cerr << "warning: construction terminated early\n";
  } else if (*gen) {
    if (gen_n < 2) throw UsageError("--n must be >= 2");
    const LatencyMatrix w = ringbench::make_matrix(ringbench::parse_dist(gen_c.dist), gen_n, Seed{gen_c.seed});
    Output out(gen_c.out);
    write_matrix_csv(out.stream(), w);
  } else if (*train) {
    if (train_c.out.empty()) throw UsageError("train needs --out for the checkpoint");
    tc.seed = Seed{train_c.seed};
    const auto dist = ringbench::parse_dist(train_c.dist);
    if (dist.kind == ringbench::DistKind::Gaussian) {
      tc.distribution = qlearn::TrainDistribution::Gaussian;
    } else if (dist.kind != ringbench::DistKind::Uniform) {
      throw UsageError("train supports --dist uniform or gaussian");
    }
    tc.validate();
    std::ofstream log;
    if (!train_log.empty()) {
      log.open(train_log);
      if (!log) throw FormatError("cannot open " + train_log + " for writing");
      log << "epoch,epsilon,episode_diameter,mean_loss,steps,stuck,test_diameter\n";
    }
    const auto result = qlearn::train(tc, [&](const qlearn::EpochLog& e) {
      if (log.is_open()) {
        log << e.epoch << ',' << format_double(e.epsilon) << ',' << format_double(e.episode_diameter) << ','
            << format_double(e.mean_loss) << ',' << e.steps << ',' << (e.stuck ? 1 : 0) << ','
            << (std::isnan(e.test_diameter) ? std::string() : format_double(e.test_diameter)) << '\n';
      }
      if (progress_every && (e.epoch + 1) % progress_every == 0) {
        std::fprintf(stderr, "epoch %zu eps %.2f diameter %.2f loss %.4g\n", e.epoch + 1, e.epsilon,
                     e.episode_diameter, e.mean_loss);
      }
    });
    qlearn::save_params(train_c.out, result.params);
    std::cerr << "wrote " << train_c.out << '\n';
  } else if (*eval) {
    const auto params = qlearn::load_params(eval_model);
    const LatencyMatrix w = input_matrix(eval_matrix, eval_c, eval_n);
    const int k = ringbench::resolve_k(w.size(), eval_k);
    const auto starts = qlearn::pick_starts(w.size(), std::min(eval_starts, w.size()), Seed{eval_c.seed});
    std::optional<qlearn::ConstructResult> chosen;
    double best = kInfinity;
    for (const NodeId s : starts) {
      auto r = qlearn::greedy_construct(w, params, s, DegreeBound(k));
      const double d = diameter(r.topology, w).value;
      std::cerr << "start=" << s << " diameter_ms=" << format_double(d)
                << (r.early_termination ? " early_termination" : "") << '\n';
      if (d < best) {
        best = d;
        chosen = std::move(r);
      }
    }
    if (!eval_c.out.empty()) {
      Output out(eval_c.out);
      write_edge_list(out.stream(), chosen->topology, w);
    }
    std::cout << "best_diameter_ms=" << format_double(best) << " start=" << chosen->start << " k=" << k
              << " starts=" << starts.size() << '\n';
  } else if (*adapt) {
    auto opts = method_options(adapt_f);
    const LatencyMatrix w = input_matrix(adapt_matrix, adapt_c, adapt_n);
    Topology topo;
    if (!adapt_topology.empty()) {
      std::ifstream in(adapt_topology);
      if (!in) throw FormatError("cannot open " + adapt_topology);
      topo = read_edge_list(in);
    } else if (!adapt_method.empty()) {
      topo = ringbench::build_topology(adapt_method, w, opts, Seed{adapt_c.seed}).topology;
    } else {
      throw UsageError("adapt needs --topology or --method");
    }
    if (topo.size() != w.size()) {
      throw InvalidInput("topology has " + std::to_string(topo.size()) + " nodes but the matrix has " +
                         std::to_string(w.size()));
    }
    const auto report = adaptive::assess(topo, w, opts.adaptive, Seed{adapt_c.seed});
    const auto& a = report.aggregate;
    Output out(adapt_c.out);
    out.stream() << "avg_local_ms=" << format_double(a.avg_local) << " avg_global_ms=" << format_double(a.avg_global)
                 << " avg_min_ms=" << format_double(a.avg_min) << " rho="
                 << (std::isnan(report.decision.rho) ? std::string("undefined") : format_double(report.decision.rho))
                 << " decision=" << adaptive::to_string(report.decision.action) << " samples=" << report.k_samples
                 << " rounds=" << report.rounds << " messages=" << a.message_count << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const FormatError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const InvalidInput& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  }
}

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "ringbench/bench.hpp"
#include "ringopt/errors.hpp"
#include "ringopt/latency.hpp"
#include "ringopt/qlearn/params.hpp"

using namespace ringopt;
using namespace ringbench;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("ringbench_test_" + name);
}

int run_cli(const std::string& args, const std::string& stdout_file = "/dev/null") {
  const std::string cmd = std::string(RINGBENCH_EXE) + " " + args + " > " + stdout_file + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

MethodOptions options_with_model() {
  MethodOptions o;
  o.model = std::make_shared<const qlearn::EmbedParams>(
      qlearn::EmbedParams::random(qlearn::EmbedConfig{8, 16, 3}, Seed{1}));
  o.ga_budget = 200;
  o.ga_population = 20;
  o.partitions = 4;
  o.starts = 3;
  return o;
}

}  // namespace

TEST(ParseDist, Variants) {
  EXPECT_EQ(parse_dist("uniform").kind, DistKind::Uniform);
  EXPECT_EQ(parse_dist("gaussian").kind, DistKind::Gaussian);
  const auto site = parse_dist("site:data/x.json");
  EXPECT_EQ(site.kind, DistKind::Site);
  EXPECT_EQ(site.site_file, "data/x.json");
  EXPECT_EQ(parse_dist("two-cluster").inter_site_ms, 100.0);
  EXPECT_EQ(parse_dist("two-cluster:42.5").inter_site_ms, 42.5);
  EXPECT_THROW(parse_dist("pareto"), UsageError);
  EXPECT_THROW(parse_dist("site:"), UsageError);
  EXPECT_THROW(parse_dist("two-cluster:abc"), UsageError);
}

TEST(MakeMatrix, SiteFileRescaledToN) {
  const auto dist = parse_dist(std::string("site:") + RINGOPT_DATA_DIR + "/sites17.json");
  const auto w = make_matrix(dist, 40, Seed{1});
  EXPECT_EQ(w.size(), 40u);
  EXPECT_THROW(make_matrix(dist, 10, Seed{1}), InvalidInput);
  EXPECT_THROW(make_matrix(parse_dist("site:/nonexistent.json"), 20, Seed{1}), FormatError);
}

TEST(ResolveK, LogRule) {
  EXPECT_EQ(resolve_k(1000, 0), 10);
  EXPECT_EQ(resolve_k(20, 0), 5);
  EXPECT_EQ(resolve_k(20, 2), 2);
}

TEST(Methods, UnknownOrMissingModel) {
  EXPECT_THROW(check_method("best-ring", MethodOptions{}), UsageError);
  EXPECT_THROW(check_method("dgro", MethodOptions{}), UsageError);
  EXPECT_NO_THROW(check_method("dgro", options_with_model()));
}

TEST(Methods, EveryMethodBuildsAValidTopology) {
  const auto w = gen_gaussian(24, Seed{3});
  const auto opts = options_with_model();
  for (const auto& m : method_names()) {
    const auto out = build_topology(m, w, opts, Seed{5});
    EXPECT_EQ(out.topology.size(), 24u) << m;
    EXPECT_TRUE(is_connected(out.topology)) << m;
    EXPECT_GT(out.build_steps, 0u) << m;
    if (!m.starts_with("perigee") && !m.starts_with("chord")) {
      EXPECT_TRUE(check_degree(out.topology, DegreeBound(out.k))) << m;
    }
    if (m.ends_with("adaptive")) EXPECT_TRUE(out.adaptive.has_value()) << m;
    EXPECT_EQ(build_topology(m, w, opts, Seed{5}).topology, out.topology) << m;
  }
}

TEST(Methods, SingleRings) {
  const auto w = gen_uniform(10, Seed{1});
  for (const char* m : {"random-ring", "nn-ring"}) {
    const auto out = build_topology(m, w, MethodOptions{}, Seed{1});
    EXPECT_TRUE(oracle::is_hamiltonian_cycle(out.topology));
    EXPECT_EQ(out.k, 1);
  }
}

TEST(Methods, AdaptiveVariantsFollowDecision) {
  const auto w = gen_gaussian(64, Seed{2});
  const auto chord = build_topology("chord-adaptive", w, MethodOptions{}, Seed{4});
  ASSERT_TRUE(chord.adaptive);
  EXPECT_EQ(chord.adaptive->decision.action, adaptive::SwapAction::AddShortestRing);
  EXPECT_EQ(chord.topology, build_topology("chord-nn", w, MethodOptions{}, Seed{4}).topology);

  const auto perigee = build_topology("perigee-adaptive", w, MethodOptions{}, Seed{4});
  ASSERT_TRUE(perigee.adaptive);
  EXPECT_EQ(perigee.adaptive->decision.action, adaptive::SwapAction::AddRandomRing);
  EXPECT_EQ(perigee.topology, build_topology("perigee-random", w, MethodOptions{}, Seed{4}).topology);
}

TEST(Sweep, SingleCell) {
  SweepConfig cfg;
  cfg.sizes = {10};
  cfg.runs = 1;
  cfg.methods = {"random-ring"};
  const auto rows = run_sweep(cfg);
  ASSERT_EQ(rows.size(), 1u);
  std::stringstream out;
  write_csv_header(out, false);
  write_csv_row(out, rows[0]);
  std::string header, line, extra;
  std::getline(out, header);
  std::getline(out, line);
  EXPECT_EQ(header, "size,run,method,k,diameter_ms,build_steps,wall_ms");
  EXPECT_FALSE(std::getline(out, extra));
}

TEST(Sweep, DeterministicAndOrdered) {
  SweepConfig cfg;
  cfg.sizes = {12, 16};
  cfg.runs = 3;
  cfg.methods = {"nn-kring", "random-kring", "chord"};
  cfg.hop_diameter = true;
  const auto a = run_sweep(cfg);
  cfg.jobs = 3;
  const auto b = run_sweep(cfg);
  ASSERT_EQ(a.size(), 18u);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].size, cfg.sizes[i / 9]);
    EXPECT_EQ(a[i].run, (i / 3) % 3);
    EXPECT_EQ(a[i].method, cfg.methods[i % 3]);
    EXPECT_EQ(a[i].size, b[i].size);
    EXPECT_EQ(a[i].method, b[i].method);
    EXPECT_EQ(a[i].diameter_ms, b[i].diameter_ms);
    EXPECT_EQ(a[i].build_steps, b[i].build_steps);
    EXPECT_EQ(a[i].hop_diameter, b[i].hop_diameter);
  }
}

TEST(Sweep, AddingMethodDoesNotPerturbOthers) {
  SweepConfig cfg;
  cfg.sizes = {20};
  cfg.runs = 4;
  cfg.methods = {"random-kring"};
  const auto alone = run_sweep(cfg);
  cfg.methods = {"ga", "random-kring"};
  cfg.options.ga_budget = 120;
  cfg.options.ga_population = 20;
  const auto mixed = run_sweep(cfg);
  for (std::size_t r = 0; r < 4; ++r) EXPECT_EQ(alone[r].diameter_ms, mixed[2 * r + 1].diameter_ms);
}

TEST(Sweep, DiameterMatchesOracle) {
  SweepConfig cfg;
  cfg.sizes = {14};
  cfg.runs = 2;
  cfg.methods = {"mixed-kring", "perigee-nn"};
  for (const auto& row : run_sweep(cfg)) {
    const auto w = make_matrix(cfg.dist, row.size, matrix_seed(cfg.seed, row.size, row.run));
    const auto topo = build_topology(row.method, w, cfg.options, cell_seed(cfg.seed, row.size, row.run, row.method));
    EXPECT_NEAR(row.diameter_ms, oracle::diameter(topo.topology, w), 1e-9);
  }
}

TEST(Sweep, ShortestRingsWinUnderGaussian) {
  SweepConfig cfg;
  cfg.sizes = {300};
  cfg.runs = 10;
  cfg.methods = {"random-kring", "nn-kring"};
  cfg.dist = parse_dist("gaussian");
  const auto rows = run_sweep(cfg);
  int wins = 0;
  for (std::size_t r = 0; r < 10; ++r) {
    if (rows[2 * r + 1].diameter_ms < rows[2 * r].diameter_ms) ++wins;
  }
  EXPECT_GE(wins, 8);
}

TEST(Sweep, Validation) {
  SweepConfig cfg;
  cfg.sizes = {2};
  cfg.methods = {"chord"};
  EXPECT_THROW(cfg.validate(), UsageError);
  cfg.sizes = {10};
  cfg.runs = 0;
  EXPECT_THROW(cfg.validate(), UsageError);
  cfg.runs = 1;
  cfg.methods = {"nope"};
  EXPECT_THROW(cfg.validate(), UsageError);
}

TEST(Csv, RowRoundTrip) {
  SweepRow row;
  row.size = 150;
  row.run = 7;
  row.method = "perigee-random";
  row.k = 8;
  row.diameter_ms = 23.456789012345;
  row.build_steps = 1350;
  row.wall_ms = 1.5;
  row.hop_diameter = 6;
  std::stringstream out;
  write_csv_row(out, row);
  std::string line;
  std::getline(out, line);
  const auto back = parse_csv_row(line);
  EXPECT_EQ(back.size, row.size);
  EXPECT_EQ(back.run, row.run);
  EXPECT_EQ(back.method, row.method);
  EXPECT_EQ(back.k, row.k);
  EXPECT_EQ(back.diameter_ms, row.diameter_ms);
  EXPECT_EQ(back.build_steps, row.build_steps);
  EXPECT_EQ(back.hop_diameter, row.hop_diameter);
  EXPECT_THROW(parse_csv_row("1,2,x"), FormatError);
  EXPECT_THROW(parse_csv_row("1,2,x,3,abc,5,6"), FormatError);
}

TEST(Cli, BuildWritesEdgeList) {
  const auto out = temp_path("edges.txt");
  ASSERT_EQ(run_cli("build --method nn-ring --n 10 --seed 1 --out " + out.string()), 0);
  std::ifstream in(out);
  const auto topo = read_edge_list(in);
  EXPECT_EQ(topo.size(), 10u);
  EXPECT_EQ(topo.edge_count(), 10u);
  EXPECT_TRUE(oracle::is_hamiltonian_cycle(topo));
  std::filesystem::remove(out);
}

TEST(Cli, SweepCsvParsesBack) {
  const auto out = temp_path("sweep.csv");
  ASSERT_EQ(run_cli("sweep --sizes 10,12 --runs 2 --methods random-ring,nn-kring --seed 3 --out " + out.string()), 0);
  std::istringstream in(slurp(out));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "size,run,method,k,diameter_ms,build_steps,wall_ms");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    EXPECT_NO_THROW(parse_csv_row(line));
    ++rows;
  }
  EXPECT_EQ(rows, 8u);
  std::filesystem::remove(out);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli(""), 1);
  EXPECT_EQ(run_cli("build --method best-ring --n 10"), 1);
  EXPECT_EQ(run_cli("build --method nn-ring --n 10 --dist pareto"), 1);
  EXPECT_EQ(run_cli("sweep --methods dgro --sizes 10"), 1);
  EXPECT_EQ(run_cli("build --method nn-ring --matrix /nonexistent/w.csv"), 2);
  EXPECT_EQ(run_cli("eval --model /nonexistent/model.bin --n 10"), 2);
  EXPECT_EQ(run_cli("build --method mixed-kring --n 10 --partitions 9"), 0);
  EXPECT_EQ(run_cli("build --method nn-parallel --n 10 --partitions 9"), 2);
}

TEST(Cli, TrainThenEval) {
  const auto model = temp_path("model.bin");
  const auto log = temp_path("train.csv");
  ASSERT_EQ(run_cli("train --n 10 --k 2 --epochs 5 --batch 4 --embed-dim 4 --hidden 8 --t-embed 2 --progress 0 --out " +
                    model.string() + " --log " + log.string()),
            0);
  std::istringstream in(slurp(log));
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 6u);

  const auto report = temp_path("eval.txt");
  ASSERT_EQ(run_cli("eval --model " + model.string() + " --n 12 --k 2 --starts 10", report.string()), 0);
  EXPECT_NE(slurp(report).find("starts=10"), std::string::npos);
  EXPECT_EQ(run_cli("build --method dgro --model " + model.string() + " --n 12 --k 2"), 0);
  for (const auto& p : {model, log, report}) std::filesystem::remove(p);
}

TEST(Cli, AdaptOnRandomKRingChoosesShortestRing) {
  const auto report = temp_path("adapt.txt");
  ASSERT_EQ(run_cli("adapt --method random-kring --n 100 --dist two-cluster --seed 2", report.string()), 0);
  EXPECT_NE(slurp(report).find("decision=add-shortest-ring"), std::string::npos) << slurp(report);
  ASSERT_EQ(run_cli("adapt --method perigee-nn --n 100 --dist two-cluster --seed 2", report.string()), 0);
  EXPECT_NE(slurp(report).find("decision=add-random-ring"), std::string::npos) << slurp(report);
  std::filesystem::remove(report);
}

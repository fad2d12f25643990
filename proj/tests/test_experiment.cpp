#include <doctest.h>

#include <string>
#include <vector>

#include "ipersea/experiment.hpp"
#include "fixtures.hpp"
#include "worlds.hpp"

using namespace ipersea;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.dataset = "synthetic";
  c.n_boot = 5;
  c.lookups = 80;
  c.pairs = 30;
  c.seed = 11;
  return c;
}

const SocialGraph& small_graph() {
  static const SocialGraph g = [] {
    Rng rng(404);
    return ipersea::testing::random_connected_graph(220, 140, rng);
  }();
  return g;
}

}  // namespace

TEST_CASE("config validation rejects contradictions") {
  ExperimentConfig c = small_config();
  c.n_boot = 0;
  CHECK_THROWS_AS(run_experiment(small_graph(), c), config_error);
  c = small_config();
  c.n_boot = 100000;
  CHECK_THROWS_AS(run_experiment(small_graph(), c), config_error);
  c = small_config();
  c.gn_ratio = -1.0;
  CHECK_THROWS_AS(run_experiment(small_graph(), c), config_error);
  c = small_config();
  c.pairs = 0;
  CHECK_THROWS_AS(run_experiment(small_graph(), c), config_error);
  CHECK_THROWS_AS(system_mode_from("bogus"), config_error);
  CHECK_THROWS_AS(friend_mode_from("bogus"), config_error);
}

TEST_CASE("an attack-free run succeeds on every lookup in both modes") {
  for (SystemMode mode : {SystemMode::kIpersea, SystemMode::kPerseaMajority}) {
    ExperimentConfig c = small_config();
    c.mode = mode;
    const MetricsReport r = run_experiment(small_graph(), c);
    CHECK(r.success_rate == 1.0);
    CHECK(r.fp_rate == 0.0);
    CHECK(r.fn_rate == 0.0);
    CHECK(r.sybils == 0);
  }
}

TEST_CASE("reports are deterministic given config and seed") {
  ExperimentConfig c = small_config();
  c.gn_ratio = 0.8;
  c.friend_mode = FriendMode::kRandom;
  const MetricsReport a = run_experiment(small_graph(), c);
  const MetricsReport b = run_experiment(small_graph(), c);
  std::string row_a, row_b;
  append_csv_row(row_a, a);
  append_csv_row(row_b, b);
  CHECK(row_a == row_b);

  c.seed = 12;
  const MetricsReport other = run_experiment(small_graph(), c);
  std::string row_other;
  append_csv_row(row_other, other);
  CHECK(row_other != row_a);  // the seed actually matters
}

TEST_CASE("csv output carries the pinned schema") {
  CHECK(std::string(csv_header()) ==
        "dataset,mode,friend_mode,gn_ratio,seed,success_rate,fp_rate,fn_rate,"
        "hops_regular,hops_inspection,analytic_path_len,analytic_fp,nodes,edges,"
        "sybils,dropped_nodes\n");
  ExperimentConfig c = small_config();
  const MetricsReport r = run_experiment(small_graph(), c);
  std::string row;
  append_csv_row(row, r);
  // 16 columns, rates with four fractional digits
  CHECK(std::count(row.begin(), row.end(), ',') == 15);
  CHECK(row.find("synthetic,ipersea,trusted,0.0000,11,1.0000,") == 0);
}

TEST_CASE("sweep derives seeds, survives per-run errors and stays in order") {
  CHECK(sweep({}).empty());

  ExperimentConfig base = small_config();
  base.dataset = "does/not/exist.edges";
  auto configs = sweep_configs(base, {0.0, 0.5}, 2);
  REQUIRE(configs.size() == 4);
  CHECK(configs[0].seed == 11);
  CHECK(configs[1].seed == 12);
  CHECK(configs[2].seed == 13);
  CHECK(configs[3].gn_ratio == 0.5);

  const auto reports = sweep(configs);
  REQUIRE(reports.size() == 4);
  for (const auto& r : reports) {
    CHECK(r.failed());  // dataset unreadable: error recorded per row
  }
  const std::string csv = csv_report(reports);
  CHECK(csv.find("-1.0000") != std::string::npos);
}

TEST_CASE("analytic companions ride along in the report") {
  ExperimentConfig c = small_config();
  c.gn_ratio = 0.5;
  const MetricsReport r = run_experiment(small_graph(), c);
  CHECK(r.analytic_path_len >= 1);
  CHECK(r.analytic_fp >= 0.0);
  CHECK(r.edges_per_node == doctest::Approx(mean_degree(small_graph())));
}

TEST_CASE("majority-voting success trends downward as attack edges grow") {
  // fixed topology and seed family; one inversion tolerated for noise
  ExperimentConfig c = small_config();
  c.mode = SystemMode::kPerseaMajority;
  c.lookups = 150;
  c.pairs = 50;
  int inversions = 0;
  double previous = 2.0;
  for (double gn : {0.1, 0.5, 1.0, 1.5}) {
    c.gn_ratio = gn;
    const double rate = run_experiment(small_graph(), c).success_rate;
    if (rate > previous + 1e-9) inversions++;
    previous = rate;
  }
  CHECK(inversions <= 1);
}

TEST_CASE("random-friend campaigns on the reference topology hit the reported rates") {
  std::vector<double> fps, fns;
  for (std::uint64_t seed : {1, 2}) {
    ExperimentConfig c;
    c.dataset = "hamsterster";
    c.gn_ratio = 1.0;
    c.friend_mode = FriendMode::kRandom;
    c.lookups = 30;
    c.pairs = 15;
    c.seed = seed;
    const MetricsReport r = run_experiment(ipersea::testing::ham_graph(), c);
    fps.push_back(r.fp_rate);
    fns.push_back(r.fn_rate);
  }
  const double fp = (fps[0] + fps[1]) / 2, fn = (fns[0] + fns[1]) / 2;
  CHECK(fp >= 0.04);  // 0.09 +- 0.05
  CHECK(fp <= 0.14);
  CHECK(fn >= 0.00);  // 0.04 +- 0.04
  CHECK(fn <= 0.08);
}

TEST_CASE("reports carry the build summary") {
  ExperimentConfig c = small_config();
  c.gn_ratio = 0.5;
  const MetricsReport r = run_experiment(small_graph(), c);
  REQUIRE_FALSE(r.depth_histogram.empty());
  CHECK(r.depth_histogram[0] == c.n_boot);
  std::uint64_t total = 0;
  for (auto d : r.depth_histogram) total += d;
  CHECK(total == r.admitted);
  CHECK(r.status_plus + r.status_minus + r.status_unknown >= r.admitted - c.n_boot);
}

TEST_CASE("configuration defaults match the reference evaluation") {
  const ExperimentConfig c;
  CHECK(c.bits == 31);
  CHECK(c.n_boot == 7);
  CHECK(c.chunk_factor == 0.65);
  CHECK(c.replicas == 7);
  CHECK(c.alpha == 5);
  CHECK(c.beta == 7);
  CHECK(c.bucket_k == 7);
  CHECK(c.sybils_per_edge == 10);
  CHECK(c.per_level == 1);
  CHECK(c.lookups == 1000);
  CHECK(c.colluding);
  CHECK(c.mode == SystemMode::kIpersea);
  CHECK(c.friend_mode == FriendMode::kTrusted);
}

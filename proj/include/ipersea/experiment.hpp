#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "ipersea/adversary.hpp"
#include "ipersea/analytic.hpp"
#include "ipersea/graph.hpp"
#include "ipersea/idspace.hpp"
#include "ipersea/lookup.hpp"
#include "ipersea/rng.hpp"
#include "ipersea/sybil.hpp"
#include "ipersea/types.hpp"
#include "ipersea/world.hpp"

namespace ipersea {

enum class SystemMode : std::uint8_t { kIpersea, kPerseaMajority };

// Which mean-degree definition feeds the analytic models: the social
// graph's 2|E|/|V|, or the bootstrap tree's mean degree plus the
// attack-edge rate. The first is the default; the second is kept because
// the reference results are consistent with some other effective value.
enum class EpMode : std::uint8_t { kGraph, kTree };

struct ExperimentConfig {
  std::string dataset;
  bool directed = false;
  int bits = 31;
  std::uint32_t n_boot = 7;
  double chunk_factor = 0.65;
  std::uint32_t replicas = 7;
  int alpha = 5;
  int beta = 7;
  int bucket_k = 7;
  double gn_ratio = 0.0;
  std::uint32_t sybils_per_edge = 10;
  FriendMode friend_mode = FriendMode::kTrusted;
  std::uint32_t per_level = 1;
  SystemMode mode = SystemMode::kIpersea;
  std::uint32_t lookups = 1000;
  std::uint32_t pairs = 200;
  bool colluding = true;
  int fill_random = -1;  // -1: 2k
  EpMode ep_mode = EpMode::kGraph;
  std::uint64_t seed = 1;
  std::string trace_path;  // when set, measurement lookup traces land here
};

struct MetricsReport {
  ExperimentConfig config;
  std::uint64_t seed = 0;

  double success_rate = 0.0;
  double fp_rate = 0.0;
  double fn_rate = 0.0;
  double hops_regular = 0.0;
  double hops_inspection = 0.0;

  int analytic_path_len = 0;
  double analytic_fp = 0.0;
  double edges_per_node = 0.0;

  std::uint32_t nodes = 0;        // dataset vertices
  std::uint64_t edges = 0;        // dataset edges
  std::uint32_t admitted = 0;     // honest nodes in the tree
  std::uint64_t sybils = 0;
  std::uint64_t attack_edges = 0;
  std::uint64_t dropped_nodes = 0;
  std::vector<std::uint32_t> depth_histogram;  // honest nodes per tree depth

  // status ledger summary after the campaign
  std::uint64_t status_plus = 0;
  std::uint64_t status_minus = 0;
  std::uint64_t status_unknown = 0;

  std::string error;  // non-empty when the run failed

  bool failed() const { return !error.empty(); }
};

inline const char* to_string(SystemMode m) {
  return m == SystemMode::kIpersea ? "ipersea" : "persea_majority";
}
inline const char* to_string(FriendMode m) {
  return m == FriendMode::kTrusted ? "trusted" : "random";
}

inline SystemMode system_mode_from(const std::string& s) {
  if (s == "ipersea") return SystemMode::kIpersea;
  if (s == "persea_majority") return SystemMode::kPerseaMajority;
  throw config_error("unknown mode: " + s + " (expected ipersea|persea_majority)");
}
inline FriendMode friend_mode_from(const std::string& s) {
  if (s == "trusted") return FriendMode::kTrusted;
  if (s == "random") return FriendMode::kRandom;
  throw config_error("unknown friend mode: " + s + " (expected trusted|random)");
}

namespace detail {

// rng stream tags, one per pipeline stage
enum : std::uint64_t {
  kStreamBootstrap = 1,
  kStreamFill,
  kStreamSpawn,
  kStreamFriends,
  kStreamCampaign,
  kStreamPairs,
  kStreamLookups,
  kStreamVotes,
};

}  // namespace detail

// End-to-end seeded pipeline: build the honest network over the social
// graph, join the attackers, select friends and run the inspection
// campaign (iPersea mode), seed random pairs, then measure replicated
// lookups. Everything downstream of (graph, config, seed) is
// deterministic.
inline MetricsReport run_experiment(const SocialGraph& graph,
                                    const ExperimentConfig& config) {
  MetricsReport report;
  report.config = config;
  report.seed = config.seed;
  report.nodes = graph.node_count;
  report.edges = graph.edge_count();

  if (config.n_boot == 0 || config.n_boot > graph.node_count) {
    throw config_error("bootstrap count must be in [1, node count]");
  }
  if (config.gn_ratio < 0.0) throw config_error("g/n ratio must be non-negative");
  if (config.replicas == 0) throw config_error("replica count must be positive");
  if (config.lookups > 0 && config.pairs == 0) {
    throw config_error("measurement lookups need seeded pairs");
  }

  const std::uint64_t seed = config.seed;
  Rng rng_boot = Rng::stream(seed, detail::kStreamBootstrap);
  Rng rng_fill = Rng::stream(seed, detail::kStreamFill);
  Rng rng_spawn = Rng::stream(seed, detail::kStreamSpawn);
  Rng rng_friends = Rng::stream(seed, detail::kStreamFriends);
  Rng rng_campaign = Rng::stream(seed, detail::kStreamCampaign);
  Rng rng_pairs = Rng::stream(seed, detail::kStreamPairs);
  Rng rng_lookups = Rng::stream(seed, detail::kStreamLookups);
  Rng rng_votes = Rng::stream(seed, detail::kStreamVotes);

  BootstrapTree tree =
      build_network(graph, config.n_boot, config.bits, config.chunk_factor, rng_boot);
  report.dropped_nodes = tree.dropped;

  WorldParams params;
  params.bits = config.bits;
  params.bucket_k = config.bucket_k;
  params.alpha = config.alpha;
  params.beta = config.beta;
  params.replicas = config.replicas;
  params.fill_random = config.fill_random;
  World world = make_world(std::move(tree), params);
  report.admitted = world.size();
  for (const auto& node : world.tree.nodes) {
    if (node.depth >= report.depth_histogram.size()) {
      report.depth_histogram.resize(node.depth + 1, 0);
    }
    report.depth_histogram[node.depth]++;
  }
  fill_routing_tables(world, rng_fill);

  if (config.gn_ratio > 0.0) {
    AdversaryPolicy policy;
    policy.attack_edges =
        static_cast<std::uint64_t>(config.gn_ratio * world.size() + 0.5);
    policy.sybils_per_edge = config.sybils_per_edge;
    policy.colluding_values = config.colluding;
    // attackers hold honest-table slots at the attack-edge share of edges
    policy.table_overwrite_rate =
        std::min(0.9, static_cast<double>(policy.attack_edges) /
                          (2.0 * static_cast<double>(graph.edge_count())));
    const SpawnReport spawn = spawn_sybils(world, policy, rng_spawn);
    report.attack_edges = spawn.attack_edges_placed;
    report.sybils = spawn.sybils_created;
  }

  if (config.mode == SystemMode::kIpersea) {
    const auto friend_sets = select_all_friends(world, graph, config.friend_mode,
                                                config.per_level, rng_friends);
    const CampaignResult campaign =
        run_inspection_campaign(world, friend_sets, rng_campaign);
    report.fp_rate = campaign.fp_rate();
    report.fn_rate = campaign.fn_rate();
    report.hops_inspection = campaign.mean_inspection_hops();
    for (NodeIndex i = 0; i < world.size(); ++i) {
      if (world.tree.nodes[i].parent < 0) continue;
      switch (world.child_status[i]) {
        case NodeStatus::kHonest: report.status_plus++; break;
        case NodeStatus::kMalicious: report.status_minus++; break;
        case NodeStatus::kUnknown: report.status_unknown++; break;
      }
    }
  }

  ResolveMemo memo(world.size());
  NodeFilter filter;
  if (config.mode == SystemMode::kIpersea) {
    filter = make_status_filter(world, memo);
  }

  // ground truth: the seeded pair registry, held by the harness only
  const std::uint64_t space = id_space_size(config.bits);
  const std::uint32_t honest_n = world.honest_count();
  std::vector<std::pair<NodeId, Value>> registry;
  registry.reserve(config.pairs);
  for (std::uint32_t i = 0; i < config.pairs; ++i) {
    const NodeId key = rng_pairs.below(space);
    const Value value{rng_pairs.next(), false};
    const NodeIndex initiator = static_cast<NodeIndex>(rng_pairs.below(honest_n));
    replicated_put(world, initiator, key, value, filter);
    registry.emplace_back(key, value);
  }

  std::uint64_t successes = 0;
  std::uint64_t hop_sum = 0, hop_lookups = 0;
  std::string traces;
  if (!config.trace_path.empty()) {
    traces = "run,key,replica,outcome,hops\n";
  }
  for (std::uint32_t i = 0; i < config.lookups; ++i) {
    const auto& [key, truth] = registry[rng_lookups.below(registry.size())];
    const NodeIndex initiator = static_cast<NodeIndex>(rng_lookups.below(honest_n));
    const auto replies = replicated_get(world, initiator, key, filter);

    // every replica lookup costs its rounds, found or not
    for (std::size_t rep = 0; rep < replies.size(); ++rep) {
      const auto& r = replies[rep];
      hop_sum += static_cast<std::uint64_t>(r.hops);
      hop_lookups++;
      if (!config.trace_path.empty()) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%llu,%llu,%zu,%s,%d\n",
                      static_cast<unsigned long long>(seed),
                      static_cast<unsigned long long>(key), rep,
                      r.outcome == LookupOutcome::kFound ? "found" : "stalled",
                      r.hops);
        traces += buf;
      }
    }

    bool success = false;
    if (config.mode == SystemMode::kIpersea) {
      for (const auto& r : replies) {
        if (!r.value) continue;
        // values are accepted only from targets that resolve honest; the
        // filter already keeps attackers off the path, this re-checks the
        // final hop
        if (r.target != kNoNode && !resolve_status(world, r.target, memo)) continue;
        if (*r.value == truth) {
          success = true;
          break;
        }
      }
    } else {
      std::vector<Value> returned;
      for (const auto& r : replies) {
        if (r.value) returned.push_back(*r.value);
      }
      const auto vote = majority_vote(returned, rng_votes);
      success = vote && *vote == truth;
    }
    if (success) successes++;
  }
  report.success_rate =
      config.lookups ? static_cast<double>(successes) / config.lookups : 0.0;
  report.hops_regular =
      hop_lookups ? static_cast<double>(hop_sum) / hop_lookups : 0.0;

  if (!config.trace_path.empty()) {
    std::ofstream out(config.trace_path);
    if (!out) throw config_error("cannot write trace file: " + config.trace_path);
    out << traces;
  }

  // analytic companions for the same inputs
  AnalyticInputs inputs;
  inputs.edges_per_node = config.ep_mode == EpMode::kGraph
                              ? mean_degree(graph)
                              : 2.0 * (world.honest_count() - config.n_boot) /
                                        world.honest_count() +
                                    config.gn_ratio;
  inputs.attack_per_node = config.gn_ratio;
  inputs.alpha = config.alpha;
  inputs.beta = config.beta;
  inputs.friends_per_level = static_cast<int>(config.per_level);
  report.edges_per_node = inputs.edges_per_node;
  try {
    report.analytic_path_len = analytic_path_length(inputs).hops;
    report.analytic_fp = config.friend_mode == FriendMode::kRandom
                             ? analytic_fp_random(inputs)
                             : analytic_fp_trusted(inputs);
  } catch (const std::domain_error&) {
    report.analytic_path_len = -1;
    report.analytic_fp = -1.0;
  }
  return report;
}

inline MetricsReport run_experiment(const ExperimentConfig& config) {
  const SocialGraph graph = load_edge_list(config.dataset, config.directed);
  return run_experiment(graph, config);
}

// --- sweeps and CSV --------------------------------------------------------

// Per-run errors are recorded in the report (sentinel metrics) and the
// sweep continues.
inline std::vector<MetricsReport> sweep(const std::vector<ExperimentConfig>& configs) {
  std::vector<MetricsReport> reports;
  reports.reserve(configs.size());
  for (const auto& config : configs) {
    try {
      reports.push_back(run_experiment(config));
    } catch (const std::exception& e) {
      MetricsReport failed;
      failed.config = config;
      failed.seed = config.seed;
      failed.error = e.what();
      reports.push_back(std::move(failed));
    }
  }
  return reports;
}

// Ratio sweep over one dataset: seeds are derived from the master seed and
// the run index, `runs_per_ratio` runs per ratio.
inline std::vector<ExperimentConfig> sweep_configs(const ExperimentConfig& base,
                                                   const std::vector<double>& ratios,
                                                   std::uint32_t runs_per_ratio) {
  std::vector<ExperimentConfig> configs;
  std::uint64_t index = 0;
  for (double ratio : ratios) {
    for (std::uint32_t s = 0; s < runs_per_ratio; ++s, ++index) {
      ExperimentConfig c = base;
      c.gn_ratio = ratio;
      c.seed = base.seed + index;
      configs.push_back(std::move(c));
    }
  }
  return configs;
}

inline const char* csv_header() {
  return "dataset,mode,friend_mode,gn_ratio,seed,success_rate,fp_rate,fn_rate,"
         "hops_regular,hops_inspection,analytic_path_len,analytic_fp,nodes,edges,"
         "sybils,dropped_nodes\n";
}

inline void append_csv_row(std::string& out, const MetricsReport& r) {
  char buf[512];
  const double sentinel = -1.0;
  const bool bad = r.failed();
  std::snprintf(buf, sizeof(buf),
                "%s,%s,%s,%.4f,%llu,%.4f,%.4f,%.4f,%.4f,%.4f,%d,%.4f,%lu,%llu,%llu,%llu\n",
                r.config.dataset.c_str(), to_string(r.config.mode),
                to_string(r.config.friend_mode), r.config.gn_ratio,
                static_cast<unsigned long long>(r.seed),
                bad ? sentinel : r.success_rate, bad ? sentinel : r.fp_rate,
                bad ? sentinel : r.fn_rate, bad ? sentinel : r.hops_regular,
                bad ? sentinel : r.hops_inspection, bad ? -1 : r.analytic_path_len,
                bad ? sentinel : r.analytic_fp, static_cast<unsigned long>(r.nodes),
                static_cast<unsigned long long>(r.edges),
                static_cast<unsigned long long>(r.sybils),
                static_cast<unsigned long long>(r.dropped_nodes));
  out += buf;
}

inline std::string csv_report(const std::vector<MetricsReport>& reports) {
  std::string out = csv_header();
  for (const auto& r : reports) append_csv_row(out, r);
  return out;
}

}  // namespace ipersea

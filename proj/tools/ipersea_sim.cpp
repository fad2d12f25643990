// Command-line front end for the simulator: single runs, g/n sweeps, the
// closed-form models and dataset statistics, all emitting the shared CSV
// schema.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ipersea/ipersea.hpp"

namespace {

using namespace ipersea;

struct CliConfig {
  ExperimentConfig experiment;
  std::string mode = "ipersea";
  std::string friends = "trusted";
  std::string ep_mode = "graph";
  std::string out;
  std::string config_file;
  std::vector<double> ratios{0.10, 0.50, 0.80, 1.0, 1.25, 1.50};
  std::uint32_t runs_per_ratio = 5;
  bool simulate = false;
  CLI::App* cmd = nullptr;
};

void add_config_options(CLI::App* cmd, CliConfig& cli) {
  auto& c = cli.experiment;
  cli.cmd = cmd;
  cmd->add_option("--dataset", c.dataset, "edge-list dataset file");
  cmd->add_flag("--directed", c.directed, "treat edges as directed");
  cmd->add_option("--bits", c.bits, "ID-space width in bits");
  cmd->add_option("--n-boot", c.n_boot, "bootstrap node count");
  cmd->add_option("--chunk-factor", c.chunk_factor, "sub-chunk carving exponent");
  cmd->add_option("--replicas", c.replicas, "replication factor R");
  cmd->add_option("--alpha", c.alpha, "lookup fan-out alpha");
  cmd->add_option("--beta", c.beta, "reply fan-out beta");
  cmd->add_option("--bucket-k", c.bucket_k, "k-bucket capacity");
  cmd->add_option("--gn-ratio", c.gn_ratio, "attack edges per honest node");
  cmd->add_option("--sybils-per-edge", c.sybils_per_edge, "Sybils joined per attack edge");
  cmd->add_option("--mode", cli.mode, "system mode: ipersea|persea_majority");
  cmd->add_option("--friends", cli.friends, "collaborative friends: trusted|random");
  cmd->add_option("--per-level", c.per_level, "friends per ancestor level");
  cmd->add_option("--lookups", c.lookups, "measurement lookups per run");
  cmd->add_option("--pairs", c.pairs, "seeded (key,value) pairs per run");
  cmd->add_option("--colluding", c.colluding,
                  "attackers fabricate one shared wrong value per key");
  cmd->add_option("--fill-random", c.fill_random,
                  "random table entries per node (-1: 2k)");
  cmd->add_option("--ep-mode", cli.ep_mode,
                  "mean-degree source for the models: graph|tree");
  cmd->add_option("--seed", c.seed, "master seed");
  cmd->add_option("--traces", c.trace_path, "write per-replica lookup traces here");
  cmd->add_option("--out", cli.out, "output CSV path (default: stdout)");
  cmd->add_option("--config", cli.config_file,
                  "key=value file supplying defaults (flags override)");
}

// Plain key=value defaults; explicitly given flags win.
void apply_config_file(CliConfig& cli) {
  if (cli.config_file.empty()) return;
  std::ifstream in(cli.config_file);
  if (!in) throw config_error("cannot open config file: " + cli.config_file);

  auto overridden = [&](const std::string& flag) {
    const CLI::Option* opt = cli.cmd->get_option_no_throw(flag);
    return opt != nullptr && opt->count() > 0;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw config_error("config line " + std::to_string(line_no) +
                         ": expected key=value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string flag = "--" + key;
    if (overridden(flag)) continue;

    auto& c = cli.experiment;
    if (key == "dataset") c.dataset = value;
    else if (key == "directed") c.directed = value == "true" || value == "1";
    else if (key == "bits") c.bits = std::stoi(value);
    else if (key == "n-boot") c.n_boot = std::stoul(value);
    else if (key == "chunk-factor") c.chunk_factor = std::stod(value);
    else if (key == "replicas") c.replicas = std::stoul(value);
    else if (key == "alpha") c.alpha = std::stoi(value);
    else if (key == "beta") c.beta = std::stoi(value);
    else if (key == "bucket-k") c.bucket_k = std::stoi(value);
    else if (key == "gn-ratio") c.gn_ratio = std::stod(value);
    else if (key == "sybils-per-edge") c.sybils_per_edge = std::stoul(value);
    else if (key == "mode") cli.mode = value;
    else if (key == "friends") cli.friends = value;
    else if (key == "per-level") c.per_level = std::stoul(value);
    else if (key == "lookups") c.lookups = std::stoul(value);
    else if (key == "pairs") c.pairs = std::stoul(value);
    else if (key == "colluding") c.colluding = value == "true" || value == "1";
    else if (key == "fill-random") c.fill_random = std::stoi(value);
    else if (key == "ep-mode") cli.ep_mode = value;
    else if (key == "seed") c.seed = std::stoull(value);
    else if (key == "traces") c.trace_path = value;
    else if (key == "out") cli.out = value;
    else if (key == "ratios" || key == "runs-per-ratio") {
      if (key == "runs-per-ratio") cli.runs_per_ratio = std::stoul(value);
      // ratios in files: comma-separated
      if (key == "ratios") {
        cli.ratios.clear();
        std::size_t pos = 0;
        while (pos < value.size()) {
          const auto comma = value.find(',', pos);
          cli.ratios.push_back(std::stod(value.substr(pos, comma - pos)));
          if (comma == std::string::npos) break;
          pos = comma + 1;
        }
      }
    } else {
      throw config_error("config line " + std::to_string(line_no) +
                         ": unknown key '" + key + "'");
    }
  }
}

void finalize(CliConfig& cli) {
  apply_config_file(cli);
  if (cli.experiment.dataset.empty()) {
    throw config_error("a dataset is required (--dataset or config file)");
  }
  cli.experiment.mode = system_mode_from(cli.mode);
  cli.experiment.friend_mode = friend_mode_from(cli.friends);
  if (cli.ep_mode == "graph") {
    cli.experiment.ep_mode = EpMode::kGraph;
  } else if (cli.ep_mode == "tree") {
    cli.experiment.ep_mode = EpMode::kTree;
  } else {
    throw config_error("unknown ep mode: " + cli.ep_mode + " (expected graph|tree)");
  }
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw config_error("cannot write output file: " + path);
  out << text;
}

void print_summary(const MetricsReport& r) {
  std::fprintf(stderr,
               "%s %s/%s g/n=%.2f seed=%llu | success %.4f fp %.4f fn %.4f | "
               "hops %.2f insp %.2f | admitted %u sybils %llu dropped %llu | "
               "statuses +%llu -%llu ?%llu\n",
               r.config.dataset.c_str(), to_string(r.config.mode),
               to_string(r.config.friend_mode), r.config.gn_ratio,
               static_cast<unsigned long long>(r.seed), r.success_rate, r.fp_rate,
               r.fn_rate, r.hops_regular, r.hops_inspection, r.admitted,
               static_cast<unsigned long long>(r.sybils),
               static_cast<unsigned long long>(r.dropped_nodes),
               static_cast<unsigned long long>(r.status_plus),
               static_cast<unsigned long long>(r.status_minus),
               static_cast<unsigned long long>(r.status_unknown));
  std::fprintf(stderr, "  tree depths:");
  for (std::size_t d = 0; d < r.depth_histogram.size(); ++d) {
    std::fprintf(stderr, " %zu:%u", d, r.depth_histogram[d]);
  }
  std::fprintf(stderr, "\n");
}

int cmd_run(CliConfig& cli) {
  finalize(cli);
  const MetricsReport report = run_experiment(cli.experiment);
  print_summary(report);
  emit(csv_report({report}), cli.out);
  return 0;
}

int cmd_sweep(CliConfig& cli) {
  finalize(cli);
  const auto configs = sweep_configs(cli.experiment, cli.ratios, cli.runs_per_ratio);
  const auto reports = sweep(configs);
  for (const auto& r : reports) {
    if (r.failed()) {
      std::fprintf(stderr, "run seed=%llu failed: %s\n",
                   static_cast<unsigned long long>(r.seed), r.error.c_str());
    } else {
      print_summary(r);
    }
  }
  emit(csv_report(reports), cli.out);
  return 0;
}

int cmd_analyze(CliConfig& cli) {
  finalize(cli);
  const SocialGraph graph =
      load_edge_list(cli.experiment.dataset, cli.experiment.directed);

  AnalyticInputs inputs;
  inputs.edges_per_node = mean_degree(graph);
  inputs.attack_per_node = cli.experiment.gn_ratio;
  inputs.alpha = cli.experiment.alpha;
  inputs.beta = cli.experiment.beta;
  inputs.friends_per_level = static_cast<int>(cli.experiment.per_level);

  std::string csv =
      "dataset,gn_ratio,e_p,analytic_path_len,analytic_fp_trusted,analytic_fp_random,"
      "sim_hops_regular,sim_fp_trusted,sim_fp_random\n";
  char buf[320];

  double sim_hops = -1.0, sim_fp_trusted = -1.0, sim_fp_random = -1.0;
  if (cli.simulate) {
    ExperimentConfig c = cli.experiment;
    c.mode = SystemMode::kIpersea;
    c.friend_mode = FriendMode::kTrusted;
    const MetricsReport trusted = run_experiment(graph, c);
    c.friend_mode = FriendMode::kRandom;
    const MetricsReport random_run = run_experiment(graph, c);
    sim_hops = trusted.hops_regular;
    sim_fp_trusted = trusted.fp_rate;
    sim_fp_random = random_run.fp_rate;
  }

  const auto path = analytic_path_length(inputs);
  std::snprintf(buf, sizeof(buf), "%s,%.4f,%.4f,%d,%.4f,%.4f,%.4f,%.4f,%.4f\n",
                cli.experiment.dataset.c_str(), inputs.attack_per_node,
                inputs.edges_per_node, path.hops, analytic_fp_trusted(inputs),
                analytic_fp_random(inputs), sim_hops, sim_fp_trusted, sim_fp_random);
  csv += buf;
  emit(csv, cli.out);
  return 0;
}

int cmd_stats(CliConfig& cli) {
  const SocialGraph graph =
      load_edge_list(cli.experiment.dataset, cli.experiment.directed);
  const GraphStats stats = graph_stats(graph);
  std::printf("dataset %s\nnodes %u\nedges %llu\nmean_degree %.4f\nclustering %.4f\n",
              cli.experiment.dataset.c_str(), stats.node_count,
              static_cast<unsigned long long>(stats.edge_count), stats.mean_degree,
              stats.clustering);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sybil-resistant DHT simulator with inspection-lookup detection"};
  app.require_subcommand(1);

  CliConfig run_cli, sweep_cli, analyze_cli, stats_cli;

  CLI::App* run = app.add_subcommand("run", "one seeded experiment");
  add_config_options(run, run_cli);

  CLI::App* sw = app.add_subcommand("sweep", "g/n ratio sweep, one CSV row per run");
  add_config_options(sw, sweep_cli);
  sw->add_option("--ratios", sweep_cli.ratios, "g/n ratios to sweep")->delimiter(',');
  sw->add_option("--runs-per-ratio", sweep_cli.runs_per_ratio,
                 "seeded runs per ratio (seeds derive from the master seed)");

  CLI::App* an = app.add_subcommand("analyze", "closed-form model evaluation");
  add_config_options(an, analyze_cli);
  an->add_flag("--simulate", analyze_cli.simulate,
               "also run the simulation for comparison columns");

  CLI::App* st = app.add_subcommand("stats", "dataset topology statistics");
  st->add_option("--dataset", stats_cli.experiment.dataset, "edge-list dataset file")
      ->required();
  st->add_flag("--directed", stats_cli.experiment.directed, "treat edges as directed");

  try {
    app.parse(argc, argv);
    if (run->parsed()) return cmd_run(run_cli);
    if (sw->parsed()) return cmd_sweep(sweep_cli);
    if (an->parsed()) return cmd_analyze(analyze_cli);
    if (st->parsed()) return cmd_stats(stats_cli);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

#pragma once

// Test fixtures. The reference topologies (hamsterster, wiki-Vote) are
// represented by deterministic synthetic stand-ins with the same vertex
// and edge counts and a matching clustering coefficient, built with a
// scale-free growth process plus triad closure. Point the environment
// variables IPERSEA_HAMSTERSTER / IPERSEA_WIKIVOTE at real edge-list files
// to run against the originals instead.

#include <cstdint>
#include <cstdlib>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ipersea/graph.hpp"
#include "ipersea/rng.hpp"

namespace ipersea::testing {

// Scale-free edges: a seed clique, then each joiner attaches a batch of
// edges, each either degree-biased or closing a triad on the previous
// target. Edge total is hit exactly.
inline std::vector<std::pair<std::uint32_t, std::uint32_t>> synthetic_edges(
    std::uint32_t n, std::uint64_t target_edges, double p_triad, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::vector<std::vector<std::uint32_t>> adj(n);
  std::vector<std::uint32_t> endpoints;  // degree-biased sampling pool

  // seed clique larger than any join batch, so every batch can be placed
  const std::uint32_t clique =
      std::max<std::uint32_t>(8, static_cast<std::uint32_t>(2 * target_edges / n) + 3);
  auto add_edge = [&](std::uint32_t u, std::uint32_t v) {
    edges.emplace_back(u, v);
    adj[u].push_back(v);
    adj[v].push_back(u);
    endpoints.push_back(u);
    endpoints.push_back(v);
  };
  auto connected = [&](std::uint32_t u, std::uint32_t v) {
    if (adj[u].size() > adj[v].size()) std::swap(u, v);
    for (std::uint32_t x : adj[u]) {
      if (x == v) return true;
    }
    return false;
  };

  for (std::uint32_t i = 0; i < clique; ++i) {
    for (std::uint32_t j = i + 1; j < clique; ++j) add_edge(i, j);
  }

  const std::uint64_t seed_edges = edges.size();
  const std::uint32_t joins = n - clique;
  const std::uint64_t remaining = target_edges - seed_edges;
  const std::uint64_t base = remaining / joins;
  const std::uint64_t extra = remaining % joins;

  for (std::uint32_t v = clique; v < n; ++v) {
    const std::uint64_t batch = base + ((v - clique) < extra ? 1 : 0);
    std::uint32_t prev_target = 0;
    bool have_prev = false;
    for (std::uint64_t e = 0; e < batch; ++e) {
      std::uint32_t target = v;
      for (int attempt = 0; attempt < 64; ++attempt) {
        std::uint32_t candidate;
        if (have_prev && !adj[prev_target].empty() && rng.real01() < p_triad) {
          candidate = adj[prev_target][rng.below(adj[prev_target].size())];
        } else {
          candidate = endpoints[rng.below(endpoints.size())];
        }
        if (candidate != v && !connected(v, candidate)) {
          target = candidate;
          break;
        }
      }
      if (target == v) {
        // dense corner: first non-neighbor by scan keeps the count exact
        for (std::uint32_t c = 0; c < v; ++c) {
          if (c != v && !connected(v, c)) {
            target = c;
            break;
          }
        }
      }
      add_edge(v, target);
      prev_target = target;
      have_prev = true;
    }
  }
  return edges;
}

inline SocialGraph graph_from_edges(
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edge_list,
    bool directed = false) {
  std::string text;
  text.reserve(edge_list.size() * 12);
  for (auto [u, v] : edge_list) {
    text += std::to_string(u);
    text += ' ';
    text += std::to_string(v);
    text += '\n';
  }
  return parse_edge_list(text, directed);
}

// hamsterster scale: 2426 vertices, 16631 edges, clustering about 0.08
inline const SocialGraph& ham_graph() {
  static const SocialGraph g = [] {
    if (const char* path = std::getenv("IPERSEA_HAMSTERSTER")) {
      return load_edge_list(path, false);
    }
    return graph_from_edges(synthetic_edges(2426, 16631, 0.22, 20250808));
  }();
  return g;
}

// wiki-Vote scale: 7115 vertices, 103689 directed edges
inline const SocialGraph& wiki_graph() {
  static const SocialGraph g = [] {
    if (const char* path = std::getenv("IPERSEA_WIKIVOTE")) {
      return load_edge_list(path, true);
    }
    auto edges = synthetic_edges(7115, 103689, 0.9, 20250811);
    Rng rng(7);
    for (auto& [u, v] : edges) {
      if (rng.below(2)) std::swap(u, v);
    }
    return graph_from_edges(edges, true);
  }();
  return g;
}

// Connected random graph for small-network lookup tests: a random tree
// plus extra random edges.
inline SocialGraph random_connected_graph(std::uint32_t n, std::uint32_t extra_edges,
                                          Rng& rng) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  for (std::uint32_t v = 1; v < n; ++v) {
    const auto u = static_cast<std::uint32_t>(rng.below(v));
    edges.emplace_back(u, v);
    seen.insert({std::min(u, v), std::max(u, v)});
  }
  for (std::uint32_t e = 0; e < extra_edges; ++e) {
    const auto u = static_cast<std::uint32_t>(rng.below(n));
    const auto v = static_cast<std::uint32_t>(rng.below(n));
    if (u == v) continue;
    if (!seen.insert({std::min(u, v), std::max(u, v)}).second) continue;
    edges.emplace_back(u, v);
  }
  return graph_from_edges(edges);
}

}  // namespace ipersea::testing

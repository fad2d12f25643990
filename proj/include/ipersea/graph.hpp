#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ipersea/types.hpp"

namespace ipersea {

// Social-network topology after ingestion: vertices remapped to a dense
// 0-based range, self-loops dropped, duplicate edges merged. For
// undirected graphs (u,v) is stored with u < v.
struct SocialGraph {
  bool directed = false;
  std::uint32_t node_count = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  // Dense index -> label from the input file, kept for debugging output.
  std::vector<std::uint64_t> original_labels;

  std::uint64_t edge_count() const { return edges.size(); }

  // Out-neighbors for directed graphs, all neighbors otherwise. Sorted.
  std::vector<std::vector<std::uint32_t>> out_adjacency() const {
    std::vector<std::vector<std::uint32_t>> adj(node_count);
    for (auto [u, v] : edges) {
      adj[u].push_back(v);
      if (!directed) adj[v].push_back(u);
    }
    for (auto& n : adj) std::sort(n.begin(), n.end());
    return adj;
  }

  // Neighbors ignoring direction, deduplicated. Sorted.
  std::vector<std::vector<std::uint32_t>> symmetric_adjacency() const {
    std::vector<std::vector<std::uint32_t>> adj(node_count);
    for (auto [u, v] : edges) {
      adj[u].push_back(v);
      adj[v].push_back(u);
    }
    for (auto& n : adj) {
      std::sort(n.begin(), n.end());
      n.erase(std::unique(n.begin(), n.end()), n.end());
    }
    return adj;
  }
};

struct GraphStats {
  double mean_degree = 0.0;
  double clustering = 0.0;
  std::uint32_t node_count = 0;
  std::uint64_t edge_count = 0;
};

namespace detail {

inline bool parse_u64(std::string_view token, std::uint64_t& out) {
  const char* first = token.data();
  const char* last = first + token.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

}  // namespace detail

// One edge per line, two whitespace-separated non-negative integer vertex
// IDs; '#' and '%' lines are comments. Trailing columns (weights,
// timestamps in KONECT exports) are ignored.
inline SocialGraph parse_edge_list(std::istream& in, bool directed) {
  SocialGraph g;
  g.directed = directed;

  std::vector<std::pair<std::uint64_t, std::uint64_t>> raw_edges;
  std::vector<std::uint64_t> labels;

  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv(line);
    // strip leading whitespace and a possible trailing '\r'
    while (!sv.empty() && (sv.front() == ' ' || sv.front() == '\t')) sv.remove_prefix(1);
    while (!sv.empty() && (sv.back() == '\r' || sv.back() == ' ' || sv.back() == '\t')) sv.remove_suffix(1);
    if (sv.empty() || sv.front() == '#' || sv.front() == '%') continue;

    std::uint64_t raw[2];
    std::size_t pos = 0;
    for (int field = 0; field < 2; ++field) {
      while (pos < sv.size() && (sv[pos] == ' ' || sv[pos] == '\t')) ++pos;
      std::size_t start = pos;
      while (pos < sv.size() && sv[pos] != ' ' && sv[pos] != '\t') ++pos;
      if (start == pos || !detail::parse_u64(sv.substr(start, pos - start), raw[field])) {
        throw parse_error("edge list line " + std::to_string(line_no) +
                          ": expected two non-negative integers, got '" + line + "'");
      }
    }
    raw_edges.emplace_back(raw[0], raw[1]);
    labels.push_back(raw[0]);
    labels.push_back(raw[1]);
  }

  // canonical remap: dense IDs follow numeric label order, so the mapping
  // depends on the content only, never on line order
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  g.node_count = static_cast<std::uint32_t>(labels.size());
  g.original_labels = labels;
  auto vertex_of = [&](std::uint64_t label) {
    return static_cast<std::uint32_t>(
        std::lower_bound(labels.begin(), labels.end(), label) - labels.begin());
  };

  g.edges.reserve(raw_edges.size());
  for (auto [a, b] : raw_edges) {
    const std::uint32_t u = vertex_of(a);
    const std::uint32_t v = vertex_of(b);
    if (u == v) continue;  // self-loop
    if (!directed && u > v) {
      g.edges.emplace_back(v, u);
    } else {
      g.edges.emplace_back(u, v);
    }
  }

  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());

  if (g.edges.empty()) {
    throw empty_input_error("edge list holds no usable edges");
  }
  return g;
}

inline SocialGraph parse_edge_list(const std::string& text, bool directed) {
  std::istringstream in(text);
  return parse_edge_list(in, directed);
}

inline SocialGraph load_edge_list(const std::string& path, bool directed) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open dataset file: " + path);
  return parse_edge_list(in, directed);
}

// Canonical text form; parsing it again yields an identical graph.
inline std::string serialize_edge_list(const SocialGraph& g) {
  std::string out;
  out.reserve(g.edges.size() * 12);
  for (auto [u, v] : g.edges) {
    out += std::to_string(u);
    out += ' ';
    out += std::to_string(v);
    out += '\n';
  }
  return out;
}

// Mean of the per-vertex local clustering coefficients; vertices of degree
// below two contribute zero. Directed graphs are symmetrized first.
inline double clustering_coefficient(const SocialGraph& g) {
  const auto adj = g.symmetric_adjacency();
  double total = 0.0;
  for (std::uint32_t v = 0; v < g.node_count; ++v) {
    const auto& nv = adj[v];
    const std::size_t d = nv.size();
    if (d < 2) continue;
    // links among neighbors, counted once per ordered neighbor pair
    std::uint64_t links2 = 0;
    for (std::uint32_t u : nv) {
      const auto& nu = adj[u];
      std::size_t i = 0, j = 0;
      while (i < nv.size() && j < nu.size()) {
        if (nv[i] < nu[j]) ++i;
        else if (nv[i] > nu[j]) ++j;
        else { ++links2; ++i; ++j; }
      }
    }
    total += static_cast<double>(links2) / (static_cast<double>(d) * (d - 1));
  }
  return total / g.node_count;
}

// Average edges per node: 2|E|/|V|, with directed graphs symmetrized
// (mutual links merge into one edge).
inline double mean_degree(const SocialGraph& g) {
  std::uint64_t undirected_edges;
  if (!g.directed) {
    undirected_edges = g.edge_count();
  } else {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> sym;
    sym.reserve(g.edges.size());
    for (auto [u, v] : g.edges) sym.emplace_back(std::min(u, v), std::max(u, v));
    std::sort(sym.begin(), sym.end());
    sym.erase(std::unique(sym.begin(), sym.end()), sym.end());
    undirected_edges = sym.size();
  }
  return 2.0 * static_cast<double>(undirected_edges) / g.node_count;
}

inline GraphStats graph_stats(const SocialGraph& g) {
  return GraphStats{mean_degree(g), clustering_coefficient(g), g.node_count,
                    g.edge_count()};
}

}  // namespace ipersea

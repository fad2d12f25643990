#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ipersea/graph.hpp"
#include "ipersea/rng.hpp"
#include "ipersea/types.hpp"

namespace ipersea {

// Contiguous ID range [start, start + length).
struct Chunk {
  NodeId start = 0;
  std::uint64_t length = 0;

  std::uint64_t end() const { return start + length; }
  bool contains(NodeId id) const { return id >= start && id < end(); }
  bool contains(const Chunk& other) const {
    return other.start >= start && other.end() <= end();
  }
};

// One link of an ID certificate chain. Signatures are modeled as an
// unforgeable record: a chain is valid iff every granted chunk nests
// inside its issuer's chunk and the walk ends at a bootstrap node.
struct IdCertificate {
  NodeId subject = 0;
  Chunk granted;
  NodeId issuer = 0;
  std::int32_t issuer_cert = -1;  // index into the chain, -1 for roots
  bool bootstrap_root = false;
};

struct TreeNode {
  NodeId id = 0;
  std::int32_t parent = -1;
  std::vector<NodeIndex> children;
  Chunk granted;                    // full range this node controls
  std::uint64_t next_unallocated;   // next carvable id inside granted
  std::uint16_t depth = 0;
  bool honest = true;
  std::int64_t graph_vertex = -1;   // social vertex, -1 for attackers

  bool is_root() const { return parent < 0; }
  std::uint64_t unallocated() const { return granted.end() - next_unallocated; }
};

// Invitation forest rooted at the bootstrap nodes. Indices are assigned in
// admission order, so roots occupy [0, bootstrap_count).
struct BootstrapTree {
  int bits = 31;
  double chunk_factor = 0.65;
  std::uint32_t bootstrap_count = 0;
  std::vector<TreeNode> nodes;
  std::vector<NodeIndex> vertex_to_node;  // kNoNode for dropped vertices
  std::uint64_t dropped = 0;

  std::uint32_t size() const { return static_cast<std::uint32_t>(nodes.size()); }
};

inline std::vector<Chunk> allocate_bootstrap_chunks(int bits, std::uint32_t n_boot) {
  if (n_boot == 0) throw std::invalid_argument("bootstrap count must be positive");
  const std::uint64_t space = id_space_size(bits);
  if (space < n_boot) throw std::invalid_argument("ID space smaller than bootstrap count");
  const std::uint64_t stride = space / n_boot;
  std::vector<Chunk> chunks(n_boot);
  for (std::uint32_t i = 0; i < n_boot; ++i) {
    chunks[i].start = i * stride;
    chunks[i].length = (i + 1 == n_boot) ? space - chunks[i].start : stride;
  }
  return chunks;
}

// Nominal sub-chunk size for a parent whose original chunk held
// `original_length` IDs.
inline std::uint64_t subchunk_size(std::uint64_t original_length, double chunk_factor) {
  if (original_length <= 1) return 1;
  const double s = std::floor(std::pow(static_cast<double>(original_length), chunk_factor));
  if (s < 1.0) return 1;
  return static_cast<std::uint64_t>(s);
}

// Carves the next sub-chunk out of `remaining`. The nominal size comes from
// the parent's original chunk length and is capped by what is left. Fails
// once fewer than two IDs remain (a child needs its own ID plus something
// to distribute).
inline std::optional<std::pair<Chunk, Chunk>> carve_subchunk(
    const Chunk& remaining, std::uint64_t original_length, double chunk_factor) {
  if (remaining.length < 2) return std::nullopt;
  const std::uint64_t s =
      std::min(subchunk_size(original_length, chunk_factor), remaining.length);
  Chunk granted{remaining.start, s};
  Chunk rest{remaining.start + s, remaining.length - s};
  return std::make_pair(granted, rest);
}

inline std::optional<std::pair<Chunk, Chunk>> carve_subchunk(const Chunk& chunk,
                                                             double chunk_factor) {
  return carve_subchunk(chunk, chunk.length, chunk_factor);
}

// Admits a child under `parent`: the child takes the first ID of the carved
// sub-chunk and control over the rest of it. Returns kNoNode when the
// parent's chunk is exhausted.
inline NodeIndex admit_child(BootstrapTree& tree, NodeIndex parent, bool honest,
                             std::int64_t graph_vertex) {
  TreeNode& p = tree.nodes[parent];
  Chunk remaining{p.next_unallocated, p.granted.end() - p.next_unallocated};
  auto carved = carve_subchunk(remaining, p.granted.length, tree.chunk_factor);
  if (!carved) return kNoNode;

  const auto [granted, rest] = *carved;
  p.next_unallocated = rest.start;

  TreeNode child;
  child.id = granted.start;
  child.parent = static_cast<std::int32_t>(parent);
  child.granted = granted;
  child.next_unallocated = granted.start + 1;
  child.depth = static_cast<std::uint16_t>(p.depth + 1);
  child.honest = honest;
  child.graph_vertex = graph_vertex;

  const NodeIndex idx = tree.size();
  tree.nodes.push_back(std::move(child));
  tree.nodes[parent].children.push_back(idx);
  return idx;
}

// Certificate chain for a node, leaf first, ending at its bootstrap root.
inline std::vector<IdCertificate> certificate_chain(const BootstrapTree& tree,
                                                    NodeIndex node) {
  std::vector<IdCertificate> chain;
  std::int32_t cur = static_cast<std::int32_t>(node);
  while (cur >= 0) {
    const TreeNode& n = tree.nodes[cur];
    IdCertificate cert;
    cert.subject = n.id;
    cert.granted = n.granted;
    cert.issuer = n.is_root() ? n.id : tree.nodes[n.parent].id;
    cert.bootstrap_root = n.is_root();
    cert.issuer_cert = n.is_root() ? -1 : static_cast<std::int32_t>(chain.size() + 1);
    chain.push_back(cert);
    cur = n.parent;
  }
  return chain;
}

// True iff every link's chunk nests inside its issuer's chunk, every
// subject sits inside its own chunk, and the chain ends at a bootstrap
// node.
inline bool verify_certificate_chain(std::span<const IdCertificate> chain) {
  if (chain.empty()) return false;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const IdCertificate& cert = chain[i];
    if (!cert.granted.contains(cert.subject)) return false;
    if (cert.bootstrap_root) {
      return cert.issuer_cert < 0 && cert.issuer == cert.subject;
    }
    const std::int32_t up = cert.issuer_cert;
    if (up < 0 || static_cast<std::size_t>(up) >= chain.size()) return false;
    const IdCertificate& parent = chain[up];
    if (cert.issuer != parent.subject) return false;
    if (!parent.granted.contains(cert.granted)) return false;
    if (static_cast<std::size_t>(up) != i + 1) return false;  // chain must walk upward
  }
  return false;  // never reached a bootstrap root
}

inline bool verify_certificate_chain(const BootstrapTree& tree, NodeIndex node) {
  const auto chain = certificate_chain(tree, node);
  return verify_certificate_chain(std::span<const IdCertificate>(chain));
}

// Builds the honest network from explicitly chosen bootstrap vertices: a
// breadth-first search over social edges admits each reachable vertex
// under its discoverer. A vertex whose discoverer has an exhausted chunk
// stays unadmitted until another neighbor reaches it; vertices never
// reached are dropped and counted.
inline BootstrapTree build_network(const SocialGraph& g,
                                   const std::vector<std::uint32_t>& bootstrap,
                                   int bits, double chunk_factor) {
  const auto n_boot = static_cast<std::uint32_t>(bootstrap.size());
  if (n_boot > g.node_count) {
    throw std::invalid_argument("more bootstrap nodes than graph vertices");
  }
  BootstrapTree tree;
  tree.bits = bits;
  tree.chunk_factor = chunk_factor;
  tree.bootstrap_count = n_boot;
  tree.vertex_to_node.assign(g.node_count, kNoNode);

  const auto chunks = allocate_bootstrap_chunks(bits, n_boot);
  for (std::uint32_t i = 0; i < n_boot; ++i) {
    TreeNode root;
    root.id = chunks[i].start;
    root.granted = chunks[i];
    root.next_unallocated = chunks[i].start + 1;
    root.graph_vertex = bootstrap[i];
    tree.nodes.push_back(std::move(root));
    tree.vertex_to_node[bootstrap[i]] = i;
  }

  const auto adj = g.out_adjacency();
  std::deque<NodeIndex> queue;
  for (std::uint32_t i = 0; i < n_boot; ++i) queue.push_back(i);

  while (!queue.empty()) {
    const NodeIndex cur = queue.front();
    queue.pop_front();
    const auto vertex = static_cast<std::uint32_t>(tree.nodes[cur].graph_vertex);
    for (std::uint32_t nb : adj[vertex]) {
      if (tree.vertex_to_node[nb] != kNoNode) continue;
      const NodeIndex child = admit_child(tree, cur, true, nb);
      if (child == kNoNode) continue;  // exhausted; a later discoverer may admit nb
      tree.vertex_to_node[nb] = child;
      queue.push_back(child);
    }
  }

  for (std::uint32_t v = 0; v < g.node_count; ++v) {
    if (tree.vertex_to_node[v] == kNoNode) tree.dropped++;
  }
  return tree;
}

// Same, with the n_boot bootstrap vertices chosen uniformly at random.
inline BootstrapTree build_network(const SocialGraph& g, std::uint32_t n_boot,
                                   int bits, double chunk_factor, Rng& rng) {
  if (n_boot > g.node_count) {
    throw std::invalid_argument("more bootstrap nodes than graph vertices");
  }
  std::vector<std::uint32_t> pool(g.node_count);
  for (std::uint32_t i = 0; i < g.node_count; ++i) pool[i] = i;
  std::vector<std::uint32_t> bootstrap;
  bootstrap.reserve(n_boot);
  for (std::uint32_t i = 0; i < n_boot; ++i) {
    const std::uint64_t j = i + rng.below(pool.size() - i);
    std::swap(pool[i], pool[j]);
    bootstrap.push_back(pool[i]);
  }
  return build_network(g, bootstrap, bits, chunk_factor);
}

// --- replica regions -------------------------------------------------

// The ring is split into R virtual regions; boundaries are spread so no
// two region lengths differ by more than one ID.
inline std::uint64_t region_start(std::uint32_t region, std::uint32_t count, int bits) {
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(region) << bits) / count);
}

inline std::uint32_t region_of(NodeId id, std::uint32_t count, int bits) {
  std::uint32_t r = static_cast<std::uint32_t>(
      (static_cast<unsigned __int128>(id) * count) >> bits);
  if (r >= count) r = count - 1;
  while (r + 1 < count && id >= region_start(r + 1, count, bits)) ++r;
  while (r > 0 && id < region_start(r, count, bits)) --r;
  return r;
}

// Replica keys for `key`: one per virtual region, evenly spread so that
// consecutive ring gaps differ by at most one.
inline std::vector<NodeId> replica_keys(NodeId key, std::uint32_t replicas, int bits) {
  if (replicas == 0) throw std::invalid_argument("replica count must be positive");
  const std::uint64_t mask = id_space_size(bits) - 1;
  std::vector<NodeId> keys(replicas);
  for (std::uint32_t i = 0; i < replicas; ++i) {
    keys[i] = (key + region_start(i, replicas, bits)) & mask;
  }
  return keys;
}

}  // namespace ipersea

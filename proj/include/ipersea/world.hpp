#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ipersea/dht.hpp"
#include "ipersea/idspace.hpp"
#include "ipersea/rng.hpp"
#include "ipersea/types.hpp"

namespace ipersea {

struct WorldParams {
  int bits = 31;
  int bucket_k = 7;
  int alpha = 5;
  int beta = 7;
  std::uint32_t replicas = 7;
  // Random table-fill attempts per node on top of the structural entries;
  // -1 means 2*k.
  int fill_random = -1;
};

// Full simulation state: the bootstrap tree, per-node routing tables,
// stored pairs, attacker bookkeeping and the per-child status records.
// Immutable during lookup batches.
struct World {
  WorldParams params;
  BootstrapTree tree;
  std::vector<RoutingTable> tables;

  // id -> node lookups; rebuilt whenever nodes are added
  std::vector<NodeId> sorted_ids;
  std::vector<NodeIndex> sorted_nodes;  // parallel to sorted_ids

  // adversary state (filled by spawn_sybils)
  std::vector<std::uint8_t> attacker;        // per node
  std::vector<NodeId> attacker_ids;          // sorted
  std::vector<std::pair<NodeIndex, NodeIndex>> attack_edges;  // (victim, entry)
  bool colluding_values = true;

  // status recorded for each node by its parent ('+'/'-'/unknown)
  std::vector<NodeStatus> child_status;

  // per-holder stored pairs
  std::vector<std::unordered_map<NodeId, Value>> storage;

  std::uint32_t size() const { return tree.size(); }
  NodeId id_of(NodeIndex n) const { return tree.nodes[n].id; }
  bool is_attacker(NodeIndex n) const { return attacker[n] != 0; }
  bool is_honest(NodeIndex n) const { return attacker[n] == 0; }

  std::uint32_t honest_count() const {
    return size() - static_cast<std::uint32_t>(attacker_ids.size());
  }

  NodeIndex node_at(NodeId id) const {
    const auto it = std::lower_bound(sorted_ids.begin(), sorted_ids.end(), id);
    if (it == sorted_ids.end() || *it != id) return kNoNode;
    return sorted_nodes[it - sorted_ids.begin()];
  }

  std::uint32_t region_of_id(NodeId id) const {
    return region_of(id, params.replicas, params.bits);
  }

  void reindex() {
    const std::uint32_t n = size();
    std::vector<std::pair<NodeId, NodeIndex>> pairs(n);
    for (std::uint32_t i = 0; i < n; ++i) pairs[i] = {tree.nodes[i].id, i};
    std::sort(pairs.begin(), pairs.end());
    sorted_ids.resize(n);
    sorted_nodes.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      sorted_ids[i] = pairs[i].first;
      sorted_nodes[i] = pairs[i].second;
    }
    attacker.resize(n, 0);
    child_status.resize(n, NodeStatus::kUnknown);
    storage.resize(n);
  }
};

inline World make_world(BootstrapTree tree, const WorldParams& params) {
  World w;
  w.params = params;
  w.params.bits = tree.bits;
  if (w.params.fill_random < 0) w.params.fill_random = 2 * params.bucket_k;
  w.tree = std::move(tree);
  w.tables.resize(w.tree.size());
  for (std::uint32_t i = 0; i < w.tree.size(); ++i) {
    w.tables[i] = RoutingTable(w.tree.nodes[i].id, w.params.bits, w.params.bucket_k);
  }
  w.reindex();
  return w;
}

// Ground-truth owner of a key: the XOR-closest node whose ID lies in the
// key's virtual region; kNoNode when the region holds no node.
inline NodeIndex owner_of(const World& w, NodeId key) {
  const std::uint32_t r = w.region_of_id(key);
  const std::uint64_t lo = region_start(r, w.params.replicas, w.params.bits);
  const std::uint64_t hi = r + 1 == w.params.replicas
                               ? id_space_size(w.params.bits)
                               : region_start(r + 1, w.params.replicas, w.params.bits);
  const auto best =
      xor_min_in_range(std::span<const NodeId>(w.sorted_ids), key, lo, hi, w.params.bits);
  if (!best) return kNoNode;
  return w.node_at(*best);
}

namespace detail {

// Value block [lo, hi) covered by bucket `prefix_len` of `owner`.
inline std::pair<std::uint64_t, std::uint64_t> bucket_block(NodeId owner, int prefix_len,
                                                            int bits) {
  const int s = bits - 1 - prefix_len;  // differing bit position
  const std::uint64_t bit = std::uint64_t{1} << s;
  const std::uint64_t lo = (owner ^ bit) & ~(bit - 1);
  return {lo, lo + bit};
}

}  // namespace detail

// Populates honest routing tables. Every node gets its bootstrap-tree
// neighbors; every bucket gets one random representative of each virtual
// region its range intersects (this keeps greedy descent from skipping
// sparsely populated corners of the ring); and `fill_random` uniformly
// sampled admitted nodes round out the table.
inline void fill_routing_tables(World& w, Rng& rng) {
  const std::uint32_t n = w.size();
  const int bits = w.params.bits;
  const std::uint32_t regions = w.params.replicas;
  const std::span<const NodeId> ids(w.sorted_ids);

  for (std::uint32_t i = 0; i < n; ++i) {
    RoutingTable& table = w.tables[i];
    const TreeNode& node = w.tree.nodes[i];

    if (node.parent >= 0) {
      bucket_insert(table, make_peer(w.tree.nodes[node.parent].id));
    }
    for (NodeIndex c : node.children) {
      bucket_insert(table, make_peer(w.tree.nodes[c].id));
    }

    for (int bucket = 0; bucket < bits; ++bucket) {
      const auto [lo, hi] = detail::bucket_block(node.id, bucket, bits);
      for (std::uint32_t r = 0; r < regions; ++r) {
        const std::uint64_t rs =
            std::max<std::uint64_t>(region_start(r, regions, bits), lo);
        const std::uint64_t re = std::min<std::uint64_t>(
            r + 1 == regions ? id_space_size(bits) : region_start(r + 1, regions, bits),
            hi);
        if (rs >= re) continue;
        const auto [j0, j1] = detail::value_range(ids, rs, re);
        if (j0 == j1) continue;
        bucket_insert(table, make_peer(w.sorted_ids[j0 + rng.below(j1 - j0)]));
      }
    }

    for (int t = 0; t < w.params.fill_random; ++t) {
      const NodeId pick = w.sorted_ids[rng.below(n)];
      if (pick == node.id) continue;
      bucket_insert(table, make_peer(pick));
    }
  }
}

}  // namespace ipersea

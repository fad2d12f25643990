#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "ipersea/rng.hpp"
#include "ipersea/types.hpp"
#include "ipersea/world.hpp"

namespace ipersea {

// Attack model: g attack edges against uniformly sampled honest victims,
// each admitting a chain/branch of Sybils confined to the victim's chunk.
// Attackers share one directory of all attacker IDs (their k-buckets hold
// only malicious peers), answer gets with a wrong value, and promote their
// own children with '+'.
struct AdversaryPolicy {
  std::uint64_t attack_edges = 0;
  std::uint32_t sybils_per_edge = 10;
  bool colluding_values = true;
  // Share of honest routing-table entries the attackers capture, normally
  // the attack-edge share of all edges (a_h/e_p). Captured slots are
  // rewritten with attacker IDs legitimate for the same bucket.
  double table_overwrite_rate = 0.0;
};

struct SpawnReport {
  std::uint64_t attack_edges_placed = 0;
  std::uint64_t sybils_created = 0;
  std::uint64_t skipped_edges = 0;
  std::uint64_t shortfall = 0;  // descendants that no chunk could hold
};

inline SpawnReport spawn_sybils(World& w, const AdversaryPolicy& policy, Rng& rng) {
  SpawnReport report;
  w.colluding_values = policy.colluding_values;
  const std::uint32_t honest_n = w.size();
  if (policy.attack_edges == 0) return report;

  for (std::uint64_t edge = 0; edge < policy.attack_edges; ++edge) {
    // victims sampled with replacement; an exhausted victim is resampled a
    // bounded number of times, then the edge is skipped
    NodeIndex entry = kNoNode;
    NodeIndex victim = kNoNode;
    for (int attempt = 0; attempt < 16 && entry == kNoNode; ++attempt) {
      victim = static_cast<NodeIndex>(rng.below(honest_n));
      entry = admit_child(w.tree, victim, false, -1);
    }
    if (entry == kNoNode) {
      report.skipped_edges++;
      continue;
    }
    report.attack_edges_placed++;
    report.sybils_created++;
    w.attack_edges.emplace_back(victim, entry);

    std::vector<NodeIndex> members{entry};
    for (std::uint32_t s = 1; s < policy.sybils_per_edge; ++s) {
      NodeIndex child = kNoNode;
      for (std::size_t attempt = 0; attempt < 4 * members.size() && child == kNoNode;
           ++attempt) {
        const NodeIndex parent = members[rng.below(members.size())];
        child = admit_child(w.tree, parent, false, -1);
      }
      if (child == kNoNode) {
        report.shortfall += policy.sybils_per_edge - s;
        break;
      }
      members.push_back(child);
      report.sybils_created++;
    }
  }

  // index the new nodes, then wire attacker state
  w.tables.resize(w.tree.size());
  w.reindex();
  for (std::uint32_t i = honest_n; i < w.size(); ++i) {
    w.attacker[i] = 1;
    w.attacker_ids.push_back(w.tree.nodes[i].id);
  }
  std::sort(w.attacker_ids.begin(), w.attacker_ids.end());

  // a malicious parent promotes its children with '+' without inspecting
  for (std::uint32_t i = honest_n; i < w.size(); ++i) {
    for (NodeIndex c : w.tree.nodes[i].children) {
      w.child_status[c] = NodeStatus::kHonest;
    }
  }

  // victims learn about their invited child like any other tree neighbor
  for (const auto& [victim, entry] : w.attack_edges) {
    bucket_insert(w.tables[victim], make_peer(w.tree.nodes[entry].id));
  }

  // attackers intercept routing traffic and claim table slots: each honest
  // entry falls to an attacker from the same bucket range at the
  // attack-edge rate
  if (policy.table_overwrite_rate > 0.0 && !w.attacker_ids.empty()) {
    const std::span<const NodeId> directory(w.attacker_ids);
    for (NodeIndex i = 0; i < honest_n; ++i) {
      RoutingTable& table = w.tables[i];
      for (int b = 0; b < table.bits; ++b) {
        auto& bucket = table.buckets[b];
        if (bucket.empty()) continue;
        const auto [lo, hi] = detail::bucket_block(table.owner, b, table.bits);
        const auto [a0, a1] = detail::value_range(directory, lo, hi);
        if (a0 == a1) continue;  // no attacker holds an ID for this bucket
        for (auto& entry : bucket) {
          if (rng.real01() >= policy.table_overwrite_rate) continue;
          const NodeId pick = w.attacker_ids[a0 + rng.below(a1 - a0)];
          if (pick != entry.id && table.contains(pick)) continue;
          entry = make_peer(pick);
        }
      }
    }
  }
  return report;
}

// Routing reply of an attacker: up to beta attacker IDs XOR-closest to the
// key, drawn from the shared directory. Never contains an honest ID.
inline std::vector<NodeId> attacker_route_response(const World& w, NodeId key,
                                                   std::size_t beta) {
  return xor_closest(std::span<const NodeId>(w.attacker_ids), key, beta,
                     w.params.bits);
}

// Value reply of an attacker: a deterministic wrong value for the key.
// Colluding attackers fabricate one shared value per key (the worst case
// for majority voting); otherwise each attacker fabricates its own.
inline Value attacker_value_response(const World& w, NodeIndex attacker, NodeId key) {
  std::uint64_t sm = key ^ 0x5851f42d4c957f2dULL;
  std::uint64_t payload = splitmix64(sm);
  if (!w.colluding_values) {
    std::uint64_t mix = w.id_of(attacker);
    payload ^= splitmix64(mix);
  }
  return Value{payload, true};
}

// A malicious collaborative friend reports success iff the inspected node
// is malicious, no matter what the lookup did.
inline bool lying_friend_report(const World& w, NodeIndex friend_node,
                                NodeIndex inspected, bool true_outcome) {
  if (!w.is_attacker(friend_node)) return true_outcome;
  return w.is_attacker(inspected);
}

}  // namespace ipersea

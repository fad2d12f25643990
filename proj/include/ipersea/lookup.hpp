#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <unordered_set>
#include <vector>

#include "ipersea/adversary.hpp"
#include "ipersea/rng.hpp"
#include "ipersea/types.hpp"
#include "ipersea/world.hpp"

namespace ipersea {

enum class LookupOutcome : std::uint8_t { kFound, kStalled };

// Candidate ordering for a replica lookup. Nodes inside the key's virtual
// region always rank ahead of outsiders; within a class plain XOR distance
// decides. Keeping the region first is what lets a lookup settle on the
// region's owner instead of a nearer ID just across the boundary.
struct LookupRank {
  bool out_region = true;
  std::uint64_t dist = ~std::uint64_t{0};

  friend auto operator<=>(const LookupRank&, const LookupRank&) = default;
};

using NodeFilter = std::function<bool(NodeIndex)>;

struct LookupTrace {
  NodeIndex initiator = kNoNode;
  NodeId key = 0;
  LookupOutcome outcome = LookupOutcome::kStalled;
  int hops = 0;                                  // intermediate query rounds
  NodeIndex best_contacted = kNoNode;            // rank-minimal queried node
  std::vector<std::vector<NodeIndex>> rounds;    // queried nodes per round
  std::vector<LookupRank> best_per_round;        // best known rank after each round
};

struct LookupOptions {
  NodeFilter filter;                         // empty: accept every candidate
  std::optional<NodeIndex> forced_first;     // stage the first hop (inspection)
  bool seed_from_initiator = true;
  // Inspection initiators know the exact target ID and stop the moment it
  // is contacted. A regular initiator cannot recognize the owner, so it
  // keeps iterating until no returned node improves the best rank.
  bool recognize_target = false;
  int max_rounds = 64;
};

inline LookupRank lookup_rank(const World& w, NodeId id, NodeId key,
                              std::uint32_t key_region) {
  return LookupRank{w.region_of_id(id) != key_region, xor_distance(id, key)};
}

// Reply of an honest node to a lookup: up to beta entries of its table,
// region-first XOR order toward the key.
inline std::vector<NodeId> honest_route_response(const World& w, NodeIndex responder,
                                                 NodeId key, std::size_t beta) {
  const std::uint32_t key_region = w.region_of_id(key);
  std::vector<std::pair<LookupRank, NodeId>> entries;
  entries.reserve(64);
  for (const auto& bucket : w.tables[responder].buckets) {
    for (const auto& rec : bucket) {
      entries.emplace_back(lookup_rank(w, rec.id, key, key_region), rec.id);
    }
  }
  const std::size_t take = std::min(beta, entries.size());
  std::partial_sort(entries.begin(), entries.begin() + take, entries.end());
  std::vector<NodeId> out(take);
  for (std::size_t i = 0; i < take; ++i) out[i] = entries[i].second;
  return out;
}

inline std::vector<NodeId> route_response(const World& w, NodeIndex responder,
                                          NodeId key, std::size_t beta) {
  if (w.is_attacker(responder)) return attacker_route_response(w, key, beta);
  return honest_route_response(w, responder, key, beta);
}

// Replicated-lookup iteration. Round one queries the alpha rank-best
// entries of the initiator's own table; every queried node answers with
// beta candidates per its honesty policy; the next round queries the alpha
// rank-best of the nodes just returned (never revisiting anyone). Rounds
// continue until the target is recognized (inspection lookups only) or a
// round returns nothing that improves on the best rank seen so far. The
// hop count is the number of query rounds.
inline LookupTrace iterative_lookup(const World& w, NodeIndex initiator, NodeId key,
                                    const LookupOptions& opt = {}) {
  if (initiator >= w.size()) throw std::invalid_argument("unknown lookup initiator");
  const std::size_t alpha = static_cast<std::size_t>(w.params.alpha);
  const std::size_t beta = static_cast<std::size_t>(w.params.beta);
  const std::uint32_t key_region = w.region_of_id(key);
  const NodeIndex owner = owner_of(w, key);

  LookupTrace trace;
  trace.initiator = initiator;
  trace.key = key;

  if (owner == initiator) {
    trace.outcome = LookupOutcome::kFound;
    trace.best_contacted = initiator;
    trace.hops = 0;
    return trace;
  }

  struct Cand {
    LookupRank rank;
    NodeIndex node;
  };
  std::unordered_set<NodeIndex> seen;  // queried or already a candidate
  std::vector<Cand> fresh;             // candidates for the next round

  LookupRank best_known{true, ~std::uint64_t{0}};
  const auto admit = [&](NodeIndex idx) -> bool {
    if (idx == initiator || idx >= w.size()) return false;
    if (!seen.insert(idx).second) return false;
    if (opt.filter && !opt.filter(idx)) return false;
    const LookupRank rank = lookup_rank(w, w.id_of(idx), key, key_region);
    fresh.push_back({rank, idx});
    return rank < best_known;
  };

  if (opt.forced_first) {
    seen.insert(*opt.forced_first);
    fresh.push_back({lookup_rank(w, w.id_of(*opt.forced_first), key, key_region),
                     *opt.forced_first});
  }
  if (opt.seed_from_initiator) {
    for (const auto& bucket : w.tables[initiator].buckets) {
      for (const auto& rec : bucket) {
        const NodeIndex idx = w.node_at(rec.id);
        if (idx == kNoNode || idx == initiator) continue;
        if (opt.filter && !opt.filter(idx)) continue;
        if (!seen.insert(idx).second) continue;
        fresh.push_back({lookup_rank(w, rec.id, key, key_region), idx});
      }
    }
  }
  for (const auto& c : fresh) best_known = std::min(best_known, c.rank);

  LookupRank best_contacted_rank{true, ~std::uint64_t{0}};
  bool owner_contacted = false;
  while (!fresh.empty() && static_cast<int>(trace.rounds.size()) < opt.max_rounds) {
    // alpha best of the candidates returned last round
    std::sort(fresh.begin(), fresh.end(), [&](const Cand& a, const Cand& b) {
      if (a.rank != b.rank) return a.rank < b.rank;
      return w.id_of(a.node) < w.id_of(b.node);
    });
    std::vector<Cand> batch(fresh.begin(),
                            fresh.begin() + std::min(alpha, fresh.size()));
    fresh.clear();

    trace.rounds.emplace_back();
    auto& round = trace.rounds.back();
    bool improved = false;
    bool contacted_this_round = false;

    for (const Cand& c : batch) {
      round.push_back(c.node);
      if (c.rank < best_contacted_rank) {
        best_contacted_rank = c.rank;
        trace.best_contacted = c.node;
      }
      if (c.node == owner) {
        owner_contacted = true;
        contacted_this_round = true;
        if (opt.recognize_target) break;
      }
      for (NodeId id : route_response(w, c.node, key, beta)) {
        const NodeIndex idx = w.node_at(id);
        if (idx == kNoNode) continue;
        if (admit(idx)) improved = true;
      }
    }

    for (const auto& c : fresh) best_known = std::min(best_known, c.rank);
    trace.best_per_round.push_back(best_known);
    if (opt.recognize_target && contacted_this_round) break;
    if (!improved && !(opt.forced_first && trace.rounds.size() == 1)) break;
  }

  trace.outcome = owner_contacted ? LookupOutcome::kFound : LookupOutcome::kStalled;
  trace.hops = static_cast<int>(trace.rounds.size());
  return trace;
}

// --- replicated store / retrieve ---------------------------------------

struct ReplicaOutcome {
  NodeId replica_key = 0;
  LookupOutcome outcome = LookupOutcome::kStalled;
  NodeIndex target = kNoNode;  // node the operation settled on
  int hops = 0;
};

struct ReplicaValue {
  NodeId replica_key = 0;
  LookupOutcome outcome = LookupOutcome::kStalled;
  NodeIndex target = kNoNode;
  std::optional<Value> value;
  int hops = 0;
};

// One lookup per replica key; the pair is stored at each lookup's settled
// node (honest nodes accept, attackers fabricate later anyway).
inline std::vector<ReplicaOutcome> replicated_put(World& w, NodeIndex initiator,
                                                  NodeId key, const Value& value,
                                                  const NodeFilter& filter = {}) {
  std::vector<ReplicaOutcome> outcomes;
  for (NodeId rk : replica_keys(key, w.params.replicas, w.params.bits)) {
    LookupOptions opt;
    opt.filter = filter;
    const LookupTrace trace = iterative_lookup(w, initiator, rk, opt);
    const NodeIndex target =
        trace.outcome == LookupOutcome::kFound ? owner_of(w, rk) : trace.best_contacted;
    if (target != kNoNode && w.is_honest(target)) {
      w.storage[target][key] = value;
    }
    outcomes.push_back({rk, trace.outcome, target, trace.hops});
  }
  return outcomes;
}

// One lookup per replica key; collects whatever the settled node serves.
// Honest holders return the stored value or nothing, attackers answer with
// their fabricated value, stalled replicas contribute nothing.
inline std::vector<ReplicaValue> replicated_get(const World& w, NodeIndex initiator,
                                                NodeId key,
                                                const NodeFilter& filter = {}) {
  std::vector<ReplicaValue> results;
  for (NodeId rk : replica_keys(key, w.params.replicas, w.params.bits)) {
    LookupOptions opt;
    opt.filter = filter;
    const LookupTrace trace = iterative_lookup(w, initiator, rk, opt);
    ReplicaValue rv;
    rv.replica_key = rk;
    rv.outcome = trace.outcome;
    rv.hops = trace.hops;
    rv.target =
        trace.outcome == LookupOutcome::kFound ? owner_of(w, rk) : trace.best_contacted;
    if (rv.target != kNoNode) {
      if (w.is_attacker(rv.target)) {
        rv.value = attacker_value_response(w, rv.target, key);
      } else {
        const auto& held = w.storage[rv.target];
        if (const auto it = held.find(key); it != held.end()) rv.value = it->second;
      }
    }
    results.push_back(rv);
  }
  return results;
}

// Persea-baseline vote: the modal value wins; exact ties are resolved by a
// uniform pick from the tied set. An empty result list yields nothing and
// counts as a failed lookup.
inline std::optional<Value> majority_vote(std::span<const Value> results, Rng& rng) {
  if (results.empty()) return std::nullopt;
  std::map<Value, std::uint32_t> counts;
  for (const Value& v : results) counts[v]++;
  std::uint32_t best = 0;
  for (const auto& [v, c] : counts) best = std::max(best, c);
  std::vector<Value> tied;
  for (const auto& [v, c] : counts) {
    if (c == best) tied.push_back(v);
  }
  return tied[rng.below(tied.size())];
}

}  // namespace ipersea

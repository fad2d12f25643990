#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ipersea/adversary.hpp"
#include "ipersea/graph.hpp"
#include "ipersea/lookup.hpp"
#include "ipersea/rng.hpp"
#include "ipersea/types.hpp"
#include "ipersea/world.hpp"

namespace ipersea {

enum class FriendMode : std::uint8_t { kTrusted, kRandom };

// Collaborative friends of a node, one batch per upper layer of its
// ancestor chain.
struct FriendSet {
  FriendMode mode = FriendMode::kTrusted;
  std::vector<std::pair<std::uint16_t, NodeIndex>> friends;  // (level, node)

  bool empty() const { return friends.empty(); }
  std::size_t size() const { return friends.size(); }
};

// Statuses one parent holds for its direct children.
struct StatusLedger {
  NodeIndex parent = kNoNode;
  std::vector<std::pair<NodeIndex, NodeStatus>> children;
};

inline StatusLedger ledger_of(const World& w, NodeIndex parent) {
  StatusLedger ledger;
  ledger.parent = parent;
  for (NodeIndex c : w.tree.nodes[parent].children) {
    ledger.children.emplace_back(c, w.child_status[c]);
  }
  return ledger;
}

// A '-' recorded by an honest parent is final; anything else may upgrade.
inline void record_status(World& w, NodeIndex child, NodeStatus status) {
  if (w.child_status[child] == NodeStatus::kMalicious) return;
  w.child_status[child] = status;
}

// Samples collaborative friends. Trusted ancestors suggest honest nodes
// from their own subtrees; irresponsible ancestors suggest a peer reached
// over a uniformly random edge of a uniformly random honest node, so a
// suggestion is malicious roughly with the attack-edge share of all edges.
class FriendSelector {
 public:
  FriendSelector(const World& w, const SocialGraph& g) : world_(w), graph_(g) {
    build_tour();
  }

  FriendSet select(NodeIndex node, FriendMode mode, std::uint32_t per_level,
                   Rng& rng) const {
    FriendSet set;
    set.mode = mode;
    std::uint16_t level = 0;
    std::int32_t ancestor = world_.tree.nodes[node].parent;
    while (ancestor >= 0) {
      ++level;
      for (std::uint32_t i = 0; i < per_level; ++i) {
        const NodeIndex f = mode == FriendMode::kTrusted
                                ? trusted_suggestion(static_cast<NodeIndex>(ancestor),
                                                     node, rng)
                                : random_suggestion(node, rng);
        if (f != kNoNode) set.friends.emplace_back(level, f);
      }
      ancestor = world_.tree.nodes[ancestor].parent;
    }
    return set;
  }

 private:
  void build_tour() {
    const std::uint32_t n = world_.size();
    tin_.assign(n, 0);
    tout_.assign(n, 0);
    std::uint32_t clock = 0;
    // iterative DFS over the forest, children in stored order
    std::vector<std::pair<NodeIndex, std::size_t>> stack;
    for (std::uint32_t root = 0; root < world_.tree.bootstrap_count; ++root) {
      stack.emplace_back(root, 0);
      tin_[root] = clock++;
      while (!stack.empty()) {
        auto& [cur, next_child] = stack.back();
        const auto& children = world_.tree.nodes[cur].children;
        if (next_child < children.size()) {
          const NodeIndex c = children[next_child++];
          tin_[c] = clock++;
          stack.emplace_back(c, 0);
        } else {
          tout_[cur] = clock;
          stack.pop_back();
        }
      }
    }
    // honest nodes ordered by tour entry: a subtree is a contiguous slice
    honest_by_tin_.clear();
    for (std::uint32_t i = 0; i < n; ++i) {
      if (world_.is_honest(i)) honest_by_tin_.push_back(i);
    }
    std::sort(honest_by_tin_.begin(), honest_by_tin_.end(),
              [&](NodeIndex a, NodeIndex b) { return tin_[a] < tin_[b]; });
  }

  NodeIndex trusted_suggestion(NodeIndex ancestor, NodeIndex requester, Rng& rng) const {
    const auto begin = std::lower_bound(
        honest_by_tin_.begin(), honest_by_tin_.end(), tin_[ancestor],
        [&](NodeIndex n, std::uint32_t t) { return tin_[n] < t; });
    const auto end = std::lower_bound(
        honest_by_tin_.begin(), honest_by_tin_.end(), tout_[ancestor],
        [&](NodeIndex n, std::uint32_t t) { return tin_[n] < t; });
    const std::size_t count = static_cast<std::size_t>(end - begin);
    if (count == 0) return kNoNode;
    for (int attempt = 0; attempt < 8; ++attempt) {
      const NodeIndex pick = *(begin + rng.below(count));
      if (pick != requester) return pick;
    }
    return kNoNode;
  }

  NodeIndex random_suggestion(NodeIndex requester, Rng& rng) const {
    const std::uint64_t social_slots = 2 * graph_.edge_count();
    const std::uint64_t slots = social_slots + world_.attack_edges.size();
    if (slots == 0) return kNoNode;
    for (int attempt = 0; attempt < 32; ++attempt) {
      const std::uint64_t r = rng.below(slots);
      NodeIndex pick = kNoNode;
      if (r < social_slots) {
        const auto& e = graph_.edges[r >> 1];
        const std::uint32_t vertex = (r & 1) ? e.first : e.second;
        pick = world_.tree.vertex_to_node[vertex];
      } else {
        pick = world_.attack_edges[r - social_slots].second;
      }
      if (pick != kNoNode && pick != requester) return pick;
    }
    return kNoNode;
  }

  const World& world_;
  const SocialGraph& graph_;
  std::vector<std::uint32_t> tin_, tout_;
  std::vector<NodeIndex> honest_by_tin_;
};

inline FriendSet select_friends(const World& w, const SocialGraph& g, NodeIndex node,
                                FriendMode mode, std::uint32_t per_level, Rng& rng) {
  return FriendSelector(w, g).select(node, mode, per_level, rng);
}

// --- inspection lookups -------------------------------------------------

enum class InspectionRole : std::uint8_t { kIntermediate, kTarget };

struct InspectionResult {
  bool deferred = false;
  NodeStatus status = NodeStatus::kUnknown;
  InspectionRole role = InspectionRole::kIntermediate;
  bool true_outcome = false;  // what the lookup actually did
  int hops = 0;
};

// Stages a lookup from friend F through forced first hop C toward a random
// honest sibling target T (a route from C to T always exists through the
// parent, so failing to reach T is on C). C answers exactly as in a
// regular lookup; the child is '+' iff the lookup reaches T. A lying
// friend reports per the attack model instead.
inline InspectionResult inspect_intermediate(const World& w, NodeIndex parent,
                                             NodeIndex child, const FriendSet& friends,
                                             Rng& rng) {
  InspectionResult res;
  res.role = InspectionRole::kIntermediate;

  if (friends.empty()) {
    res.deferred = true;
    return res;
  }
  const NodeIndex f = friends.friends[rng.below(friends.size())].second;
  // the friend itself is no use as the target: reaching it would say
  // nothing about C
  std::vector<NodeIndex> siblings;
  for (NodeIndex c : w.tree.nodes[parent].children) {
    if (c != child && c != f && w.is_honest(c)) siblings.push_back(c);
  }
  if (siblings.empty()) {
    res.deferred = true;
    return res;
  }
  const NodeIndex target = siblings[rng.below(siblings.size())];

  LookupOptions opt;
  opt.forced_first = child;
  opt.seed_from_initiator = false;
  opt.recognize_target = true;  // the friend knows exactly whom to reach
  const LookupTrace trace = iterative_lookup(w, f, w.id_of(target), opt);

  res.true_outcome = trace.outcome == LookupOutcome::kFound;
  // intermediates contacted before the round that reached the target
  res.hops = res.true_outcome ? std::max(trace.hops - 1, 1) : trace.hops;
  const bool reported = lying_friend_report(w, f, child, res.true_outcome);
  res.status = reported ? NodeStatus::kHonest : NodeStatus::kMalicious;
  return res;
}

// Friend F1 stores a pair keyed by C's own ID at C; friend F2 later asks C
// for it. '+' iff the served value matches. Honest targets always match,
// which is why this role is free of false positives.
inline InspectionResult inspect_target(World& w, [[maybe_unused]] NodeIndex parent,
                                       NodeIndex child, const FriendSet& friends,
                                       Rng& rng) {
  InspectionResult res;
  res.role = InspectionRole::kTarget;
  if (friends.empty()) {
    res.deferred = true;
    return res;
  }
  (void)friends.friends[rng.below(friends.size())];  // F1: roles drawn independently
  const NodeIndex f2 = friends.friends[rng.below(friends.size())].second;

  const NodeId key = w.id_of(child);
  const Value planted{rng.next(), false};
  if (w.is_honest(child)) {
    w.storage[child][key] = planted;
  }

  Value served;
  if (w.is_attacker(child)) {
    served = attacker_value_response(w, child, key);
  } else {
    served = w.storage[child][key];
  }
  res.true_outcome = served == planted;
  const bool reported = lying_friend_report(w, f2, child, res.true_outcome);
  res.status = reported ? NodeStatus::kHonest : NodeStatus::kMalicious;
  return res;
}

// --- campaign -------------------------------------------------------------

enum class RoleMode : std::uint8_t { kUniform, kTargetOnly, kIntermediateOnly };

struct CampaignResult {
  std::uint64_t honest_inspected = 0;
  std::uint64_t false_positives = 0;
  std::uint64_t malicious_inspected = 0;
  std::uint64_t false_negatives = 0;
  std::uint64_t deferred = 0;
  std::uint64_t lookup_hop_sum = 0;
  std::uint64_t lookups_with_hops = 0;

  double fp_rate() const {
    return honest_inspected ? static_cast<double>(false_positives) / honest_inspected : 0.0;
  }
  double fn_rate() const {
    return malicious_inspected ? static_cast<double>(false_negatives) / malicious_inspected
                               : 0.0;
  }
  double mean_inspection_hops() const {
    return lookups_with_hops ? static_cast<double>(lookup_hop_sum) / lookups_with_hops
                             : 0.0;
  }
};

inline std::vector<FriendSet> select_all_friends(const World& w, const SocialGraph& g,
                                                 FriendMode mode, std::uint32_t per_level,
                                                 Rng& rng) {
  FriendSelector selector(w, g);
  std::vector<FriendSet> sets(w.size());
  for (std::uint32_t i = 0; i < w.size(); ++i) {
    if (!w.is_honest(i)) continue;
    if (w.tree.nodes[i].children.empty()) continue;  // only parents inspect
    sets[i] = selector.select(i, mode, per_level, rng);
  }
  return sets;
}

// Every honest parent inspects each direct child exactly once, role drawn
// uniformly; a child without siblings falls back to the target role so no
// child escapes inspection. Bootstrap parents, which have no ancestors to
// ask, use their fellow bootstrap nodes as friends.
inline CampaignResult run_inspection_campaign(World& w,
                                              const std::vector<FriendSet>& friend_sets,
                                              Rng& rng,
                                              RoleMode role_mode = RoleMode::kUniform) {
  CampaignResult result;
  const std::uint32_t n = w.size();

  FriendSet bootstrap_pool;
  for (std::uint32_t r = 0; r < w.tree.bootstrap_count; ++r) {
    bootstrap_pool.friends.emplace_back(0, r);
  }

  for (NodeIndex parent = 0; parent < n; ++parent) {
    if (!w.is_honest(parent)) continue;
    const auto& children = w.tree.nodes[parent].children;
    if (children.empty()) continue;

    const FriendSet* friends = &friend_sets[parent];
    FriendSet root_friends;
    if (friends->empty()) {
      if (w.tree.nodes[parent].is_root() && w.tree.bootstrap_count > 1) {
        root_friends.mode = friend_sets[parent].mode;
        for (const auto& [lvl, f] : bootstrap_pool.friends) {
          if (f != parent) root_friends.friends.emplace_back(lvl, f);
        }
      } else if (w.tree.nodes[parent].parent >= 0) {
        root_friends.friends.emplace_back(
            1, static_cast<NodeIndex>(w.tree.nodes[parent].parent));
      } else {
        root_friends.friends.emplace_back(0, parent);  // sole bootstrap node
      }
      friends = &root_friends;
    }

    for (NodeIndex child : children) {
      InspectionRole role = InspectionRole::kTarget;
      switch (role_mode) {
        case RoleMode::kUniform:
          role = rng.below(2) == 0 ? InspectionRole::kIntermediate
                                   : InspectionRole::kTarget;
          break;
        case RoleMode::kTargetOnly:
          role = InspectionRole::kTarget;
          break;
        case RoleMode::kIntermediateOnly:
          role = InspectionRole::kIntermediate;
          break;
      }

      InspectionResult res = role == InspectionRole::kIntermediate
                                 ? inspect_intermediate(w, parent, child, *friends, rng)
                                 : inspect_target(w, parent, child, *friends, rng);
      if (res.deferred && role_mode == RoleMode::kUniform) {
        // no eligible sibling target: the target role still applies
        res = inspect_target(w, parent, child, *friends, rng);
      }
      if (res.deferred) {
        result.deferred++;
        continue;
      }
      record_status(w, child, res.status);
      if (w.is_honest(child)) {
        result.honest_inspected++;
        if (res.status == NodeStatus::kMalicious) result.false_positives++;
      } else {
        result.malicious_inspected++;
        if (res.status == NodeStatus::kHonest) result.false_negatives++;
      }
      if (res.role == InspectionRole::kIntermediate && res.true_outcome) {
        result.lookup_hop_sum += static_cast<std::uint64_t>(res.hops);
        result.lookups_with_hops++;
      }
    }
  }
  return result;
}

// --- ancestor-walk filtering ---------------------------------------------

// Per-initiator verdict cache; entries only ever go unknown -> verdict.
struct StatusCache {
  std::unordered_map<NodeIndex, bool> verdicts;  // true = honest
};

// Walks candidate -> parent -> ... -> bootstrap, reading the status each
// parent recorded for the current node. Any '-' condemns the candidate;
// reaching the bootstrap layer clears it. Unknown statuses pass (optimistic
// default).
inline bool resolve_status(const World& w, NodeIndex candidate, StatusCache& cache) {
  if (const auto it = cache.verdicts.find(candidate); it != cache.verdicts.end()) {
    return it->second;
  }
  bool honest = true;
  std::int32_t cur = static_cast<std::int32_t>(candidate);
  while (cur >= 0) {
    if (w.child_status[cur] == NodeStatus::kMalicious && w.tree.nodes[cur].parent >= 0) {
      honest = false;
      break;
    }
    cur = w.tree.nodes[cur].parent;
  }
  cache.verdicts.emplace(candidate, honest);
  return honest;
}

// Shared memo for measurement batches; verdicts are initiator-independent
// once the campaign is over, so one memo serves every initiator.
struct ResolveMemo {
  std::vector<std::int8_t> verdict;  // -1 unknown, 0 malicious, 1 honest

  explicit ResolveMemo(std::uint32_t n) : verdict(n, -1) {}
};

inline bool resolve_status(const World& w, NodeIndex candidate, ResolveMemo& memo) {
  std::vector<NodeIndex> path;
  std::int32_t cur = static_cast<std::int32_t>(candidate);
  std::int8_t result = 1;
  while (cur >= 0) {
    if (memo.verdict[cur] >= 0) {
      result = memo.verdict[cur];
      break;
    }
    path.push_back(static_cast<NodeIndex>(cur));
    if (w.child_status[cur] == NodeStatus::kMalicious && w.tree.nodes[cur].parent >= 0) {
      result = 0;
      break;
    }
    cur = w.tree.nodes[cur].parent;
  }
  for (NodeIndex n : path) memo.verdict[n] = result;
  return result == 1;
}

inline NodeFilter make_status_filter(const World& w, ResolveMemo& memo) {
  return [&w, &memo](NodeIndex n) { return resolve_status(w, n, memo); };
}

}  // namespace ipersea

#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "ipersea/idspace.hpp"
#include "ipersea/rng.hpp"
#include "ipersea/types.hpp"

namespace ipersea {

inline std::uint64_t xor_distance(NodeId a, NodeId b) { return a ^ b; }

// Shared-prefix length of two distinct b-bit IDs; equals the 0-based bucket
// index, so bucket i holds peers agreeing with the owner on the first i
// bits and differing at bit i+1 (1-indexed: first i-1 bits shared, b-th bit
// different).
inline int shared_prefix_length(NodeId a, NodeId b, int bits) {
  const std::uint64_t d = xor_distance(a, b);
  return std::countl_zero(d << (64 - bits));
}

struct PeerRecord {
  NodeId id = 0;
  std::uint32_t address = 0;  // opaque placeholder
  std::uint32_t pubkey = 0;   // opaque placeholder

  friend bool operator==(const PeerRecord&, const PeerRecord&) = default;
};

inline PeerRecord make_peer(NodeId id) {
  std::uint64_t sm = id;
  const std::uint64_t a = splitmix64(sm);
  return PeerRecord{id, static_cast<std::uint32_t>(a),
                    static_cast<std::uint32_t>(a >> 32)};
}

// Per-node routing state: `bits` k-buckets. A full bucket refuses
// newcomers; there is no eviction since churn is out of scope.
struct RoutingTable {
  NodeId owner = 0;
  int bits = 31;
  int k = 7;
  std::vector<std::vector<PeerRecord>> buckets;

  RoutingTable() = default;
  RoutingTable(NodeId owner_id, int id_bits, int bucket_size)
      : owner(owner_id), bits(id_bits), k(bucket_size), buckets(id_bits) {}

  int bucket_of(NodeId peer) const { return shared_prefix_length(owner, peer, bits); }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& b : buckets) n += b.size();
    return n;
  }

  bool contains(NodeId id) const {
    if (id == owner) return false;
    for (const auto& rec : buckets[bucket_of(id)]) {
      if (rec.id == id) return true;
    }
    return false;
  }
};

// Places the peer in the bucket selected by shared-prefix length. Returns
// false when the bucket is full or the peer is already present; inserting
// the owner's own ID is an error.
inline bool bucket_insert(RoutingTable& table, const PeerRecord& peer) {
  if (peer.id == table.owner) {
    throw std::invalid_argument("cannot insert owner into its own routing table");
  }
  auto& bucket = table.buckets[table.bucket_of(peer.id)];
  for (const auto& rec : bucket) {
    if (rec.id == peer.id) return false;
  }
  if (bucket.size() >= static_cast<std::size_t>(table.k)) return false;
  bucket.push_back(peer);
  return true;
}

// Up to `count` records sorted ascending by XOR distance to the key; ties
// (impossible for distinct IDs, kept for safety) break toward smaller ID.
inline std::vector<PeerRecord> closest_peers(const RoutingTable& table, NodeId key,
                                             std::size_t count) {
  std::vector<PeerRecord> all;
  all.reserve(table.size());
  for (const auto& bucket : table.buckets) {
    all.insert(all.end(), bucket.begin(), bucket.end());
  }
  std::sort(all.begin(), all.end(), [key](const PeerRecord& a, const PeerRecord& b) {
    const std::uint64_t da = xor_distance(a.id, key);
    const std::uint64_t db = xor_distance(b.id, key);
    return da != db ? da < db : a.id < b.id;
  });
  if (all.size() > count) all.resize(count);
  return all;
}

// --- XOR search over a sorted ID array --------------------------------

namespace detail {

inline std::pair<std::size_t, std::size_t> value_range(std::span<const NodeId> sorted,
                                                       std::uint64_t lo,
                                                       std::uint64_t hi) {
  const auto first = std::lower_bound(sorted.begin(), sorted.end(), lo);
  const auto last = std::lower_bound(sorted.begin(), sorted.end(), hi);
  return {static_cast<std::size_t>(first - sorted.begin()),
          static_cast<std::size_t>(last - sorted.begin())};
}

}  // namespace detail

// XOR-closest ID to `key` among sorted IDs restricted to [lo, hi). Descends
// the implicit binary trie, preferring the branch that matches the key.
inline std::optional<NodeId> xor_min_in_range(std::span<const NodeId> sorted, NodeId key,
                                              std::uint64_t lo, std::uint64_t hi,
                                              int bits) {
  auto [i0, i1] = detail::value_range(sorted, lo, hi);
  if (i0 == i1) return std::nullopt;
  std::uint64_t prefix = 0;
  for (int bit = bits - 1; bit >= 0; --bit) {
    const std::uint64_t want = prefix | (key & (std::uint64_t{1} << bit));
    const std::uint64_t mid = want + (std::uint64_t{1} << bit);
    // candidates whose prefix matches the key's next bit
    const auto lo_val = std::max<std::uint64_t>(want, lo);
    const auto hi_val = std::min<std::uint64_t>(mid, hi);
    std::size_t j0 = i0, j1 = i1;
    if (lo_val < hi_val) {
      j0 = std::lower_bound(sorted.begin() + i0, sorted.begin() + i1, lo_val) -
           sorted.begin();
      j1 = std::lower_bound(sorted.begin() + i0, sorted.begin() + i1, hi_val) -
           sorted.begin();
    } else {
      j0 = j1 = i0;
    }
    if (j0 != j1) {
      i0 = j0;
      i1 = j1;
      prefix = want;
    } else {
      prefix = want ^ (std::uint64_t{1} << bit);
    }
  }
  return sorted[i0];
}

// The `count` XOR-closest IDs to `key`, ascending by distance. Exact: walks
// the implicit trie ranges in order of their distance lower bound, emitting
// ranges only once fully descended (the bound is then the exact distance).
inline std::vector<NodeId> xor_closest(std::span<const NodeId> sorted, NodeId key,
                                       std::size_t count, int bits) {
  std::vector<NodeId> out;
  if (sorted.empty() || count == 0) return out;

  struct Range {
    std::uint64_t bound;  // XOR lower bound of the subtree
    std::uint32_t i0, i1;
    std::int8_t bit;
  };
  auto cmp = [](const Range& a, const Range& b) { return a.bound > b.bound; };
  std::vector<Range> heap;
  auto push = [&](Range r) {
    heap.push_back(r);
    std::push_heap(heap.begin(), heap.end(), cmp);
  };
  push({0, 0, static_cast<std::uint32_t>(sorted.size()),
        static_cast<std::int8_t>(bits - 1)});

  while (!heap.empty() && out.size() < count) {
    std::pop_heap(heap.begin(), heap.end(), cmp);
    const Range r = heap.back();
    heap.pop_back();

    if (r.bit < 0) {
      // fully descended: every member equals the same value, bound is exact
      for (std::uint32_t i = r.i0; i < r.i1 && out.size() < count; ++i) {
        out.push_back(sorted[i]);
      }
      continue;
    }

    // split by the current bit; the half matching the key keeps the bound,
    // the other half's bound gains this bit
    const std::uint64_t bitmask = std::uint64_t{1} << r.bit;
    const std::uint64_t prefix = sorted[r.i0] & ~((bitmask << 1) - 1);
    const std::uint32_t split = static_cast<std::uint32_t>(
        std::lower_bound(sorted.begin() + r.i0, sorted.begin() + r.i1, prefix | bitmask) -
        sorted.begin());
    const bool key_bit = (key & bitmask) != 0;
    const Range low{r.bound | (key_bit ? bitmask : 0), r.i0, split,
                    static_cast<std::int8_t>(r.bit - 1)};
    const Range high{r.bound | (key_bit ? 0 : bitmask), split, r.i1,
                     static_cast<std::int8_t>(r.bit - 1)};
    if (low.i0 != low.i1) push(low);
    if (high.i0 != high.i1) push(high);
  }
  return out;
}

}  // namespace ipersea

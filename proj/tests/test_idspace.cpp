#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "ipersea/idspace.hpp"
#include "support/bigint.hpp"
#include "support/fixtures.hpp"

using namespace ipersea;

TEST_CASE("bootstrap chunks split the space evenly") {
  const auto two = allocate_bootstrap_chunks(4, 2);
  REQUIRE(two.size() == 2);
  CHECK(two[0].start == 0);
  CHECK(two[0].length == 8);
  CHECK(two[1].start == 8);
  CHECK(two[1].length == 8);

  const auto seven = allocate_bootstrap_chunks(31, 7);
  CHECK(seven[1].start - seven[0].start == 306783378);
  CHECK(seven[6].end() == id_space_size(31));

  const auto one = allocate_bootstrap_chunks(4, 1);
  CHECK(one[0].start == 0);
  CHECK(one[0].length == 16);

  CHECK_THROWS_AS(allocate_bootstrap_chunks(4, 0), std::invalid_argument);
}

TEST_CASE("sub-chunk sizing follows the chunk factor") {
  CHECK(subchunk_size(16, 0.65) == 6);
  CHECK(subchunk_size(2, 0.65) == 1);
  CHECK(subchunk_size(2, 0.1) == 1);

  // exact integer oracle: 0.65 = 13/20, so floor(S^0.65) brackets as
  // s^20 <= S^13 < (s+1)^20
  const std::uint64_t S = std::uint64_t{1} << 28;
  const std::uint64_t impl = subchunk_size(S, 0.65);
  const std::uint64_t exact = testing::exact_pow_13_20(S, impl);
  CHECK(exact == 301124);
  CHECK(impl >= exact - 1);
  CHECK(impl <= exact + 1);

  for (std::uint64_t probe : {16ull, 301ull, 65536ull, 306783378ull}) {
    const std::uint64_t got = subchunk_size(probe, 0.65);
    const std::uint64_t want = testing::exact_pow_13_20(probe, got);
    CHECK(got >= want - 1);
    CHECK(got <= want + 1);
  }
}

TEST_CASE("carving takes sequential sub-chunks and exhausts cleanly") {
  const Chunk whole{0, 16};
  auto first = carve_subchunk(Chunk{1, 15}, 16, 0.65);
  REQUIRE(first);
  CHECK(first->first.start == 1);
  CHECK(first->first.length == 6);
  CHECK(first->second.start == 7);

  auto second = carve_subchunk(first->second, 16, 0.65);
  REQUIRE(second);
  CHECK(second->first.start == 7);
  CHECK(second->first.length == 6);

  auto third = carve_subchunk(second->second, 16, 0.65);
  REQUIRE(third);
  CHECK(third->first.length == 3);  // capped by what is left
  CHECK(third->second.length == 0);

  CHECK_FALSE(carve_subchunk(third->second, 16, 0.65));
  CHECK_FALSE(carve_subchunk(Chunk{5, 1}, 16, 0.65));
  CHECK(carve_subchunk(whole, 0.65));
}

namespace {

BootstrapTree tiny_tree() {
  BootstrapTree tree;
  tree.bits = 4;
  tree.chunk_factor = 0.65;
  tree.bootstrap_count = 1;
  TreeNode root;
  root.id = 0;
  root.granted = Chunk{0, 16};
  root.next_unallocated = 1;
  tree.nodes.push_back(root);
  return tree;
}

}  // namespace

TEST_CASE("admit_child grants the first sub-chunk ID and the rest of it") {
  BootstrapTree tree = tiny_tree();
  const NodeIndex c1 = admit_child(tree, 0, true, -1);
  REQUIRE(c1 != kNoNode);
  CHECK(tree.nodes[c1].id == 1);
  CHECK(tree.nodes[c1].granted.start == 1);
  CHECK(tree.nodes[c1].granted.length == 6);
  CHECK(tree.nodes[c1].depth == 1);

  const NodeIndex c2 = admit_child(tree, 0, true, -1);
  REQUIRE(c2 != kNoNode);
  CHECK(tree.nodes[c2].id == 7);
  CHECK(tree.nodes[c2].granted.start == 7);
  CHECK(tree.nodes[c2].granted.length == 6);

  const NodeIndex c3 = admit_child(tree, 0, true, -1);
  REQUIRE(c3 != kNoNode);
  CHECK(tree.nodes[c3].granted.length == 3);

  CHECK(admit_child(tree, 0, true, -1) == kNoNode);  // exhausted
}

TEST_CASE("certificate chains from valid builds verify; forged ones fail") {
  BootstrapTree tree = tiny_tree();
  CHECK(verify_certificate_chain(tree, 0));  // bootstrap: chain of one

  const NodeIndex c1 = admit_child(tree, 0, true, -1);
  const NodeIndex g1 = admit_child(tree, c1, true, -1);
  REQUIRE(g1 != kNoNode);
  CHECK(verify_certificate_chain(tree, c1));
  CHECK(verify_certificate_chain(tree, g1));

  auto chain = certificate_chain(tree, g1);
  auto forged = chain;
  forged[0].granted = Chunk{8, 6};  // outside the issuer's chunk
  CHECK_FALSE(verify_certificate_chain(std::span<const IdCertificate>(forged)));

  auto truncated = chain;
  truncated.pop_back();  // never reaches a bootstrap node
  CHECK_FALSE(verify_certificate_chain(std::span<const IdCertificate>(truncated)));
}

TEST_CASE("every certificate in a randomized build verifies") {
  Rng rng(7);
  const SocialGraph g = testing::random_connected_graph(120, 160, rng);
  Rng build_rng(11);
  const BootstrapTree tree = build_network(g, 3, 20, 0.65, build_rng);
  for (NodeIndex i = 0; i < tree.size(); ++i) {
    CHECK(verify_certificate_chain(tree, i));
  }
}

TEST_CASE("children of one parent hold disjoint nested chunks") {
  Rng rng(21);
  const SocialGraph g = testing::random_connected_graph(200, 260, rng);
  Rng build_rng(5);
  const BootstrapTree tree = build_network(g, 4, 24, 0.65, build_rng);
  for (NodeIndex p = 0; p < tree.size(); ++p) {
    const auto& children = tree.nodes[p].children;
    std::uint64_t cursor = tree.nodes[p].granted.start + 1;
    for (NodeIndex c : children) {
      const Chunk& chunk = tree.nodes[c].granted;
      CHECK(tree.nodes[p].granted.contains(chunk));
      CHECK(chunk.start >= cursor);  // sequential carving => disjoint
      cursor = chunk.end();
    }
  }
}

TEST_CASE("build over a path graph admits the forced chain") {
  const SocialGraph g = parse_edge_list(std::string("0 1\n1 2\n"), false);
  const BootstrapTree tree = build_network(g, std::vector<std::uint32_t>{0}, 8, 0.65);
  REQUIRE(tree.size() == 3);
  CHECK(tree.dropped == 0);
  const NodeIndex n1 = tree.vertex_to_node[1];
  const NodeIndex n2 = tree.vertex_to_node[2];
  CHECK(tree.nodes[n1].parent == 0);
  CHECK(tree.nodes[n2].parent == static_cast<std::int32_t>(n1));
}

TEST_CASE("build admits nearly all of a connected network") {
  Rng build_rng(31337);
  const BootstrapTree tree =
      build_network(testing::ham_graph(), 7, 31, 0.65, build_rng);
  CHECK(tree.bootstrap_count == 7);
  std::uint32_t roots = 0;
  for (const auto& n : tree.nodes) roots += n.is_root() ? 1 : 0;
  CHECK(roots == 7);
  CHECK(tree.size() >= 2426 * 99 / 100);
  // IDs are globally unique
  std::set<NodeId> ids;
  for (const auto& n : tree.nodes) ids.insert(n.id);
  CHECK(ids.size() == tree.size());
}

TEST_CASE("build rejects more bootstrap nodes than vertices") {
  const SocialGraph g = parse_edge_list(std::string("0 1\n"), false);
  Rng rng(1);
  CHECK_THROWS_AS(build_network(g, 3, 8, 0.65, rng), std::invalid_argument);
}

TEST_CASE("replica keys spread evenly over the ring") {
  CHECK(replica_keys(0, 4, 4) == std::vector<NodeId>{0, 4, 8, 12});
  CHECK(replica_keys(9, 1, 4) == std::vector<NodeId>{9});

  const auto keys = replica_keys(5, 7, 31);
  CHECK(keys[0] == 5);
  CHECK(keys[1] == 306783383);
  CHECK(keys[2] == 613566761);

  CHECK_THROWS_AS(replica_keys(0, 0, 4), std::invalid_argument);
}

TEST_CASE("consecutive ring gaps of replica keys differ by at most one") {
  Rng rng(123);
  for (int trial = 0; trial < 200; ++trial) {
    const NodeId key = rng.below(id_space_size(31));
    auto keys = replica_keys(key, 7, 31);
    std::sort(keys.begin(), keys.end());
    std::vector<std::uint64_t> gaps;
    for (std::size_t i = 0; i + 1 < keys.size(); ++i) gaps.push_back(keys[i + 1] - keys[i]);
    gaps.push_back(id_space_size(31) - keys.back() + keys.front());
    const auto [lo, hi] = std::minmax_element(gaps.begin(), gaps.end());
    CHECK(*hi - *lo <= 1);
  }
}

TEST_CASE("regions partition the ring and locate every id") {
  for (int bits : {16, 31}) {
    for (std::uint32_t r = 1; r <= 9; ++r) {
      CHECK(region_start(0, r, bits) == 0);
      Rng rng(r * 1000 + bits);
      for (int i = 0; i < 100; ++i) {
        const NodeId id = rng.below(id_space_size(bits));
        const std::uint32_t reg = region_of(id, r, bits);
        CHECK(id >= region_start(reg, r, bits));
        if (reg + 1 < r) CHECK(id < region_start(reg + 1, r, bits));
      }
    }
  }
}

#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace ipersea {

// Node IDs live in a b-bit space (b <= 63); the width is carried by the
// tree/world that owns the IDs, not by the value itself.
using NodeId = std::uint64_t;

// Dense index of a node inside a BootstrapTree / World.
using NodeIndex = std::uint32_t;

inline constexpr NodeIndex kNoNode = std::numeric_limits<NodeIndex>::max();

inline constexpr std::uint64_t id_space_size(int bits) {
  return std::uint64_t{1} << bits;
}

// Status a parent records for a direct child after an inspection.
enum class NodeStatus : std::uint8_t {
  kUnknown = 0,
  kHonest,     // '+'
  kMalicious,  // '-'
};

inline char status_symbol(NodeStatus s) {
  switch (s) {
    case NodeStatus::kHonest: return '+';
    case NodeStatus::kMalicious: return '-';
    default: return '?';
  }
}

// Stored payloads are opaque tokens. A poisoned token is what attackers
// serve instead of the stored value; it can never compare equal to a real
// one, which is what makes wrongness checkable by the harness.
struct Value {
  std::uint64_t payload = 0;
  bool poisoned = false;

  friend bool operator==(const Value&, const Value&) = default;
  friend auto operator<=>(const Value&, const Value&) = default;
};

class parse_error : public std::runtime_error {
 public:
  explicit parse_error(const std::string& what) : std::runtime_error(what) {}
};

class empty_input_error : public parse_error {
 public:
  explicit empty_input_error(const std::string& what) : parse_error(what) {}
};

class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ipersea

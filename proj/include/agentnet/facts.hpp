#pragma once

#include <map>
#include <memory>
#include <string>

#include "agentnet/core.hpp"

namespace agentnet {

/// Per-agent versioned knowledge base. Values are immutable once written, so
/// copying the store is a cheap, consistent snapshot.
class facts_store {
public:
  struct entry {
    std::shared_ptr<const datum> value;
    std::uint64_t version = 0;
    tick updated_at = 0;
  };

  /// Returns the new version: previous + 1, or 1 for a new key.
  std::uint64_t write(const std::string& key, datum value, tick now);

  const datum* get(const std::string& key) const;

  /// Value or `fallback` when absent.
  datum value_or(const std::string& key, datum fallback) const;

  bool contains(const std::string& key) const {
    return entries_.count(key) > 0;
  }

  std::uint64_t version(const std::string& key) const;

  const std::map<std::string, entry>& entries() const noexcept {
    return entries_;
  }

  std::uint64_t total_writes() const noexcept {
    return writes_;
  }

  datum to_datum() const;

  /// Values only (no versions), as exported to the knowledge plane.
  datum values() const;

  static facts_store from_values(const datum& values, tick now);

private:
  std::map<std::string, entry> entries_;
  std::uint64_t writes_ = 0;
};

} // namespace agentnet

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "groups.hpp"

namespace umrow {

// Disk cache of computed matrix groups, keyed by (ring-spec hash, n,
// generator-set tag). Entry layout (version 1, little-endian):
//   magic "UMRC", u8 version, u8 n, u8 wide, u8 pad,
//   u64 ring_hash, u64 element_count, u64 generator_count,
//   elements (count x u64, or count x 2*u64 when wide),
//   generators (count x n*n u16 entries).
// Loaded entries hold a shared advisory lock for the lifetime of the
// cache object, so a concurrent gc never evicts entries in use.
class GroupCache {
public:
  explicit GroupCache(std::string dir);
  ~GroupCache();
  GroupCache(const GroupCache&) = delete;
  GroupCache& operator=(const GroupCache&) = delete;

  bool enabled() const { return !dir_.empty(); }
  std::string path_for(std::uint64_t ring_hash, int n, const std::string& tag) const;

  std::optional<MatGroup> load(RingPtr ring, int n, const std::string& tag);
  void store(const MatGroup& group, const std::string& tag);

  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }

private:
  std::string dir_;
  std::vector<int> held_locks_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

struct GcReport {
  std::size_t scanned = 0;
  std::size_t evicted = 0;
  std::size_t skipped_in_use = 0;
  std::uint64_t bytes_before = 0;
  std::uint64_t bytes_after = 0;
  std::vector<std::string> errors;
};

// Least-recently-used eviction down to max_bytes. Entries whose advisory
// lock cannot be taken are in use by a running job and are never evicted.
GcReport cache_gc(const std::string& dir, std::uint64_t max_bytes);

}  // namespace umrow

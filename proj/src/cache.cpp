#include "umrow/cache.hpp"

#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>
#include <utime.h>

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;

namespace umrow {

namespace {

constexpr char kMagic[4] = {'U', 'M', 'R', 'C'};
constexpr std::uint8_t kVersion = 1;

template <class T>
void put(std::string& buf, T v) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  buf.append(bytes, sizeof(T));
}

template <class T>
bool take(const std::string& buf, std::size_t& off, T& v) {
  if (off + sizeof(T) > buf.size()) return false;
  std::memcpy(&v, buf.data() + off, sizeof(T));
  off += sizeof(T);
  return true;
}

}  // namespace

GroupCache::GroupCache(std::string dir) : dir_(std::move(dir)) {
  if (!dir_.empty()) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) dir_.clear();
  }
}

GroupCache::~GroupCache() {
  for (int fd : held_locks_) {
    flock(fd, LOCK_UN);
    close(fd);
  }
}

std::string GroupCache::path_for(std::uint64_t ring_hash, int n,
                                 const std::string& tag) const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)ring_hash);
  return dir_ + "/" + buf + "_n" + std::to_string(n) + "_" + tag + ".umrc";
}

std::optional<MatGroup> GroupCache::load(RingPtr ring, int n, const std::string& tag) {
  if (!enabled()) return std::nullopt;
  std::string path = path_for(ring->spec_hash(), n, tag);
  int fd = open(path.c_str(), O_RDONLY);
  if (fd < 0) {
    misses_++;
    return std::nullopt;
  }
  if (flock(fd, LOCK_SH | LOCK_NB) != 0) {
    close(fd);
    misses_++;
    return std::nullopt;
  }
  std::ifstream in(path, std::ios::binary);
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  in.close();

  std::size_t off = 0;
  auto bail = [&]() -> std::optional<MatGroup> {
    flock(fd, LOCK_UN);
    close(fd);
    misses_++;
    return std::nullopt;
  };
  if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0) return bail();
  off = 4;
  std::uint8_t version = 0, nn = 0, wide = 0, pad = 0;
  std::uint64_t rhash = 0, count = 0, gcount = 0;
  if (!take(buf, off, version) || version != kVersion) return bail();
  if (!take(buf, off, nn) || nn != std::uint8_t(n)) return bail();
  if (!take(buf, off, wide) || !take(buf, off, pad)) return bail();
  if (!take(buf, off, rhash) || rhash != ring->spec_hash()) return bail();
  if (!take(buf, off, count) || !take(buf, off, gcount)) return bail();

  MatGroup g;
  g.ring = ring;
  g.n = n;
  g.packer = MatPacker(*ring, n);
  g.wide = wide != 0;
  if (g.wide) {
    g.elements128.resize(count);
    for (std::uint64_t i = 0; i < count; i++) {
      if (!take(buf, off, g.elements128[i].lo) || !take(buf, off, g.elements128[i].hi))
        return bail();
    }
  } else {
    g.elements.resize(count);
    for (std::uint64_t i = 0; i < count; i++)
      if (!take(buf, off, g.elements[i])) return bail();
  }
  for (std::uint64_t i = 0; i < gcount; i++) {
    Mat m;
    m.ring = ring.get();
    m.n = std::uint8_t(n);
    for (int k = 0; k < n * n; k++)
      if (!take(buf, off, m.e[k])) return bail();
    g.generators.push_back(m);
  }

  // keep the shared lock so gc cannot evict while this process runs
  held_locks_.push_back(fd);
  utime(path.c_str(), nullptr);  // LRU touch
  hits_++;
  return g;
}

void GroupCache::store(const MatGroup& group, const std::string& tag) {
  if (!enabled() || group.budget_exceeded) return;
  std::string buf;
  buf.append(kMagic, 4);
  put(buf, kVersion);
  put(buf, std::uint8_t(group.n));
  put(buf, std::uint8_t(group.wide ? 1 : 0));
  put(buf, std::uint8_t(0));
  put(buf, group.ring->spec_hash());
  put(buf, std::uint64_t(group.size()));
  put(buf, std::uint64_t(group.generators.size()));
  if (group.wide)
    for (const Key128& k : group.elements128) {
      put(buf, k.lo);
      put(buf, k.hi);
    }
  else
    for (std::uint64_t k : group.elements) put(buf, k);
  for (const Mat& m : group.generators)
    for (int k = 0; k < group.n * group.n; k++) put(buf, m.e[k]);

  std::string path = path_for(group.ring->spec_hash(), group.n, tag);
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(buf.data(), std::streamsize(buf.size()));
    if (!out.good()) {
      std::error_code ec;
      fs::remove(tmp, ec);
      return;
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
}

GcReport cache_gc(const std::string& dir, std::uint64_t max_bytes) {
  GcReport rep;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    rep.errors.push_back("cache directory does not exist: " + dir);
    return rep;
  }
  struct Entry {
    fs::path path;
    std::uint64_t size;
    std::time_t mtime;
  };
  std::vector<Entry> entries;
  for (const auto& de : fs::directory_iterator(dir, ec)) {
    if (!de.is_regular_file() || de.path().extension() != ".umrc") continue;
    struct stat st {};
    if (stat(de.path().c_str(), &st) != 0) continue;
    entries.push_back({de.path(), std::uint64_t(st.st_size), st.st_mtime});
    rep.bytes_before += std::uint64_t(st.st_size);
  }
  rep.scanned = entries.size();
  rep.bytes_after = rep.bytes_before;
  if (rep.bytes_before <= max_bytes) return rep;

  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.mtime != b.mtime) return a.mtime < b.mtime;  // oldest first
    return a.path.native() < b.path.native();
  });
  for (const Entry& e : entries) {
    if (rep.bytes_after <= max_bytes) break;
    int fd = open(e.path.c_str(), O_RDONLY);
    if (fd < 0) {
      rep.errors.push_back("open failed: " + e.path.string() + ": " +
                           std::strerror(errno));
      continue;
    }
    if (flock(fd, LOCK_EX | LOCK_NB) != 0) {
      close(fd);
      rep.skipped_in_use++;
      continue;  // referenced by a running job
    }
    std::error_code rec;
    if (fs::remove(e.path, rec)) {
      rep.evicted++;
      rep.bytes_after -= e.size;
    } else {
      rep.errors.push_back("remove failed: " + e.path.string() + ": " + rec.message());
    }
    flock(fd, LOCK_UN);
    close(fd);
  }
  return rep;
}

}  // namespace umrow

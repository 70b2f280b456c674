#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace recbench {

using Index = std::int32_t;

/// Error type for all contract violations (bad inputs, broken invariants,
/// malformed files). Message text is part of the public contract for the
/// cases documented on each operation.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(msg); }

inline void require(bool cond, const std::string& msg) {
  if (!cond) fail(msg);
}

// ---------------------------------------------------------------------------
// Hashing / deterministic RNG helpers

/// splitmix64 finalizer; used to derive independent streams from (seed, tag)
/// pairs so results do not depend on evaluation order.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ mix64(b));
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix64(mix64(a, b), c);
}

/// Uniform double in [0,1) from a hashed 64-bit value.
inline double hashToUnit(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

/// FNV-1a over bytes; cache keys and snapshot hashes.
inline std::uint64_t fnv1a(const void* data, std::size_t n,
                           std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a(const std::string& s,
                           std::uint64_t h = 0xcbf29ce484222325ULL) {
  return fnv1a(s.data(), s.size(), h);
}

std::string hexHash(std::uint64_t h);

// ---------------------------------------------------------------------------
// Parallel helpers

/// Number of worker threads used by parallelFor. Defaults to the hardware
/// concurrency; settable once by the CLI (--jobs).
unsigned workerCount();
void setWorkerCount(unsigned n);

/// Runs fn(i) for i in [begin, end) across the worker threads. Blocks until
/// all chunks finish. fn must not touch overlapping mutable state across i.
void parallelFor(Index begin, Index end, const std::function<void(Index)>& fn);

}  // namespace recbench

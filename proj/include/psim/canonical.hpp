#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace psim {

using json = nlohmann::json;

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

std::string hex64(std::uint64_t v);

// Collapses whitespace runs into a single space and trims both ends.
std::string normalize_ws(std::string_view s);

// Recursively normalizes string whitespace. Object keys are already sorted by
// nlohmann::json's std::map storage, so dump() of the result is canonical.
json canonicalize(const json& j);

std::string canonical_dump(const json& j);

// splitmix64 step; used for counter-based random streams.
std::uint64_t splitmix64(std::uint64_t x);

// Uniform double in [0, 1) from 53 high bits.
inline double unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Counter-based generator: the whole state is (seed, cursor).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed = 0, std::uint64_t cursor = 0)
      : seed_(seed), cursor_(cursor) {}

  std::uint64_t next() { return splitmix64(seed_ ^ splitmix64(cursor_++)); }
  double uniform() { return unit_interval(next()); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t cursor() const { return cursor_; }

 private:
  std::uint64_t seed_;
  std::uint64_t cursor_;
};

}  // namespace psim

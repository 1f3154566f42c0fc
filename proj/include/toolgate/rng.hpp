#pragma once

#include <cstdint>
#include <string_view>

namespace toolgate {

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Order-sensitive hash of a seed and labelled coordinates. Used to derive
// independent per-(trace, step, attempt) streams so that injection stays
// stable under unrelated trace edits.
class StreamKey {
 public:
  explicit StreamKey(std::uint64_t seed) : state_(mix64(seed)) {}

  StreamKey& add(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    state_ = mix64(state_ ^ h ^ (text.size() << 1));
    return *this;
  }

  StreamKey& add(std::int64_t value) {
    state_ = mix64(state_ ^ mix64(static_cast<std::uint64_t>(value) + 0x51ed27ULL));
    return *this;
  }

  std::uint64_t value() const { return state_; }

 private:
  std::uint64_t state_;
};

// Portable generator; the standard distributions are implementation-defined,
// so all draws go through uniform()/below().
class Rng {
 public:
  explicit Rng(std::uint64_t state) : state_(state) {}
  explicit Rng(const StreamKey& key) : state_(key.value()) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Unbiased integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = (~std::uint64_t{0} / n) * n;
    std::uint64_t draw = next_u64();
    while (draw >= limit) draw = next_u64();
    return draw % n;
  }

 private:
  std::uint64_t state_;
};

template <typename... Parts>
Rng make_stream(std::uint64_t seed, const Parts&... parts) {
  StreamKey key(seed);
  (key.add(parts), ...);
  return Rng(key);
}

}  // namespace toolgate

#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>

namespace commlab {

// SplitMix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Keyed counter generator: word i of stream (key, id) is a fixed function of
// (key, id, i), so any sub-stream can be regenerated independently.
class CoinStream {
 public:
  using result_type = std::uint64_t;

  CoinStream() = default;
  CoinStream(std::uint64_t key, std::uint64_t id) : key_(mix64(key ^ mix64(id + 0x5851f42d4c957f2dULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64() { return mix64(key_ + 0xda942042e4dd58b5ULL * ++counter_); }

  // Uniform in [0, bound), bound >= 1, by rejection.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("CoinStream::below: empty range");
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % bound;
  }

  bool bit() { return next_u64() & 1; }

  // Independent child stream; does not advance this one.
  CoinStream derive(std::uint64_t label) const { return CoinStream(key_, label); }

  std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace commlab

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace hdc {

inline constexpr std::uint64_t kDefaultSeed = 42;

// SplitMix64 finalizer; used to derive well-separated child seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a, 64 bit.
constexpr std::uint64_t fnv1a(std::string_view text,
                              std::uint64_t hash = 0xcbf29ce484222325ULL) noexcept {
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

// Child seed for a named sub-stream of `seed`. Streams keyed by distinct
// (tag, key) pairs are independent of each other, so adding a key never
// shifts the draws of another.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag,
                                    std::string_view key = {}) noexcept {
  std::uint64_t h = mix64(seed ^ fnv1a(tag));
  h = mix64(h ^ fnv1a(key, fnv1a("/", h)));
  return h;
}

// Deterministic bit stream. mt19937_64 output is fixed by the standard and
// bounded draws avoid std::uniform_int_distribution, whose algorithm is
// implementation defined, so streams are identical across toolchains.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound). Lemire's multiply-and-reject method.
  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Child source for a named sub-stream.
  RandomSource fork(std::string_view tag, std::string_view key = {}) const {
    return RandomSource(derive_seed(seed_, tag, key));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// Fisher-Yates with the portable bounded draw.
template <class RandomIt>
void shuffle(RandomIt first, RandomIt last, RandomSource& rng) {
  const auto n = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t i = n; i > 1; --i) {
    const auto j = rng.below(i);
    using std::swap;
    swap(first[i - 1], first[j]);
  }
}

}  // namespace hdc

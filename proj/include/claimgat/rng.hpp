#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace claimgat {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

// Deterministic, platform-independent random stream. All randomness in the
// project flows from one root seed; substreams are derived by name/index so
// that toggling one consumer does not reshuffle another.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(detail::splitmix64(seed)) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() {
    state_ = detail::splitmix64(state_);
    return state_;
  }

  // Uniform in [lo, hi), 53-bit resolution.
  double uniform(double lo = 0.0, double hi = 1.0) {
    double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
  }

  // Uniform integer in [lo, hi], inclusive. Rejection sampling, no modulo bias.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return lo + static_cast<std::int64_t>(next_u64());  // full range
    std::uint64_t limit = (~std::uint64_t{0} / span) * span;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % span);
  }

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Named substream, derived from this stream's seed (not its position).
  Rng split(std::string_view tag) const { return Rng(detail::splitmix64(seed_ ^ detail::fnv1a(tag))); }

  Rng split(std::uint64_t index) const {
    return Rng(detail::splitmix64(seed_ ^ detail::splitmix64(index + 0x51ed270b0a1ULL)));
  }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

// Deterministic per-token hash vector, used by random-embedding mode.
inline std::uint64_t token_stream_seed(std::string_view token, std::uint64_t seed) {
  return detail::splitmix64(seed ^ detail::fnv1a(token));
}

}  // namespace claimgat

#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace raftmatch {

// SplitMix64 step. Used both as the generator core and as a hash for
// deriving independent substreams from (seed, tag) pairs, so that every
// random decision in a run is reproducible from the single config seed.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t hash_combine(uint64_t a, uint64_t b) {
  return splitmix64(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

inline uint64_t hash_str(std::string_view s) {
  // FNV-1a
  uint64_t h = 1469598103934665603ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

inline uint64_t derive_seed(uint64_t seed, std::string_view tag) {
  return hash_combine(seed, hash_str(tag));
}

inline uint64_t derive_seed(uint64_t seed, std::string_view tag, uint64_t a) {
  return hash_combine(derive_seed(seed, tag), a);
}

inline uint64_t derive_seed(uint64_t seed, std::string_view tag, uint64_t a,
                            uint64_t b) {
  return hash_combine(derive_seed(seed, tag, a), b);
}

// Deterministic RNG with hand-rolled distributions. The std:: distributions
// are implementation-defined, which would break byte-identical artifacts
// across toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(splitmix64(seed ^ 0x5bf0f5e2f2ddc0a1ULL)) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // inclusive bounds
  int uniform_int(int lo, int hi) {
    uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next_u64() % span);
  }

  double normal() {
    // Box-Muller, one sample per call (no cached spare)
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  double normal(double mu, double sigma) { return mu + sigma * normal(); }

  // independent substream; advancing the child does not disturb the parent
  Rng split(uint64_t tag) { return Rng(hash_combine(next_u64(), tag)); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    // Fisher-Yates, pinned (std::shuffle ordering is implementation-defined)
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = next_u64() % i;
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct values from {0, .., n-1}, order randomized
  std::vector<int> sample_without_replacement(int n, int k) {
    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    std::vector<int> out;
    out.reserve(k);
    for (int i = 0; i < k; ++i) {
      int j = i + static_cast<int>(next_u64() % static_cast<uint64_t>(n - i));
      std::swap(pool[i], pool[j]);
      out.push_back(pool[i]);
    }
    return out;
  }

 private:
  uint64_t state_;
};

}  // namespace raftmatch

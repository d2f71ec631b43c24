#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace osa {

// splitmix64 finalizer; used for deriving independent stream seeds.
inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t hash_combine(uint64_t h, uint64_t v) { return mix64(h ^ mix64(v)); }

inline uint64_t hash_combine(uint64_t h, std::string_view s) {
  // FNV-1a over the bytes, then mixed in.
  uint64_t f = 1469598103934665603ULL;
  for (unsigned char c : s) {
    f ^= c;
    f *= 1099511628211ULL;
  }
  return hash_combine(h, f);
}

// Deterministic RNG stream. Thin wrapper over mt19937_64 with bounded-int and
// unit-real helpers implemented here so draws do not depend on the standard
// library's unspecified distribution algorithms.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t u64() { return gen_(); }

  // Uniform integer in [0, n). n > 0.
  int uniform_int(int n) {
    // Rejection to avoid modulo bias.
    const uint64_t bound = ~uint64_t{0} - (~uint64_t{0} % static_cast<uint64_t>(n));
    uint64_t v = gen_();
    while (v >= bound) v = gen_();
    return static_cast<int>(v % static_cast<uint64_t>(n));
  }

  // Uniform real in [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Index drawn proportionally to the (non-negative, not necessarily
  // normalized) weights. Total weight must be positive.
  int categorical(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform() * total;
    double acc = 0.0;
    for (size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return static_cast<int>(i);
    }
    // Floating point slack: fall through to the last positive weight.
    for (size_t i = weights.size(); i-- > 0;)
      if (weights[i] > 0.0) return static_cast<int>(i);
    return static_cast<int>(weights.size()) - 1;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_int(static_cast<int>(i))]);
  }

 private:
  std::mt19937_64 gen_;
};

// Named substream derivation: games, agents and cells get independent
// deterministic streams so adding a cell never perturbs another.
class StreamId {
 public:
  explicit StreamId(uint64_t base) : h_(mix64(base)) {}
  StreamId with(std::string_view tag) const { return StreamId(hash_combine(h_, tag), 0); }
  StreamId with(uint64_t v) const { return StreamId(hash_combine(h_, v), 0); }
  uint64_t seed() const { return h_; }
  Rng rng() const { return Rng(h_); }

 private:
  StreamId(uint64_t h, int) : h_(h) {}
  uint64_t h_;
};

}  // namespace osa

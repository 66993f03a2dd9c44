#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace apml {

using Rng = std::mt19937_64;

// Derives an independent stream for a keyed subtask so that per-sample
// generation can run in parallel without changing results.
inline Rng sub_rng(uint64_t seed, uint64_t key) {
  std::seed_seq seq{seed, key, uint64_t{0x9e3779b97f4a7c15ULL}};
  return Rng(seq);
}

// Uniform in [0, n). Deterministic across platforms, unlike
// std::uniform_int_distribution.
inline uint64_t rand_below(Rng& rng, uint64_t n) {
  // Rejection sampling over the top of the range to avoid modulo bias.
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % n;
}

inline bool rand_bool(Rng& rng, double p_true) {
  // 53-bit uniform double in [0,1).
  const double u = (rng() >> 11) * 0x1.0p-53;
  return u < p_true;
}

inline double rand_unit(Rng& rng) { return (rng() >> 11) * 0x1.0p-53; }

template <typename T>
void shuffle_inplace(Rng& rng, std::vector<T>& v) {
  for (size_t i = v.size(); i > 1; --i) {
    size_t j = rand_below(rng, i);
    std::swap(v[i - 1], v[j]);
  }
}

// k distinct values from [0, n), in selection order.
inline std::vector<uint64_t> sample_distinct(Rng& rng, uint64_t n, size_t k) {
  std::vector<uint64_t> out;
  out.reserve(k);
  while (out.size() < k) {
    uint64_t v = rand_below(rng, n);
    bool seen = false;
    for (uint64_t u : out)
      if (u == v) {
        seen = true;
        break;
      }
    if (!seen) out.push_back(v);
  }
  return out;
}

}  // namespace apml

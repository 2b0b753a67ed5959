#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace tsfd {

// splitmix64. Standard-library engines and distributions are not pinned down
// by the standard, so every stochastic piece of the project draws from this
// generator to keep outputs byte-identical across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // [0, 1)
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Unbiased integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = (UINT64_MAX / n) * n;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

  // k distinct indices from [0, n), ascending. Partial Fisher-Yates.
  std::vector<int> sample_indices(int n, int k) {
    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    for (int i = 0; i < k; ++i) {
      const int j = i + static_cast<int>(below(static_cast<std::uint64_t>(n - i)));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
  }

 private:
  std::uint64_t state_;
};

// Counter-derived per-sample seed: sample i's stream is independent of how
// many workers run and in which order samples are processed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter) {
  Rng r(master ^ (0xd1342543de82ef95ULL * (counter + 1)));
  r.next_u64();
  return r.next_u64();
}

}  // namespace tsfd

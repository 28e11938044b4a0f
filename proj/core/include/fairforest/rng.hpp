#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace fairforest {

// Deterministic, platform-independent RNG. All randomized behaviour in this
// project (fold shuffles, bootstrap draws, feature subsampling, fixtures)
// goes through this type so that results are reproducible bit-for-bit from
// a seed, independent of the standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // warm up so that small seeds diverge immediately
    next();
    next();
  }

  // splitmix64
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform integer in [0, n), n > 0
  std::uint64_t bounded(std::uint64_t n) {
    // widening-multiply range reduction (Lemire), without the rejection
    // step; the bias is < 2^-53 for the n used here and the mapping is
    // fully deterministic
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
    return static_cast<std::uint64_t>(m >> 64);
  }

  // uniform double in [0, 1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // standard normal via Box-Muller
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(bounded(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  // k distinct values from [0, n), in ascending order
  std::vector<std::int32_t> sample_without_replacement(std::int32_t n, std::int32_t k);

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

inline std::vector<std::int32_t> Rng::sample_without_replacement(std::int32_t n, std::int32_t k) {
  if (k >= n) {
    std::vector<std::int32_t> all(static_cast<std::size_t>(n));
    for (std::int32_t i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    return all;
  }
  // partial Fisher-Yates over an index pool
  std::vector<std::int32_t> pool(static_cast<std::size_t>(n));
  for (std::int32_t i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  std::vector<std::int32_t> out;
  out.reserve(static_cast<std::size_t>(k));
  for (std::int32_t i = 0; i < k; ++i) {
    std::size_t j = static_cast<std::size_t>(i) +
                    static_cast<std::size_t>(bounded(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    out.push_back(pool[static_cast<std::size_t>(i)]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Combines a base seed with a stream index into an independent sub-seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed ^ (stream + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace fairforest

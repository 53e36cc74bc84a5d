#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace fse {

// SplitMix64 generator. std::mt19937 would do, but the standard leaves the
// *distributions* implementation-defined, and reproducible artifacts need the
// same stream on every platform. All sampling here is spelled out explicitly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n). Rejection sampling, unbiased.
  std::uint64_t bounded(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Uniform double in [0, 1) with 53 bits of entropy.
  double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller.
  double gaussian() {
    double u1 = uniform01();
    double u2 = uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Derives an independent child stream, e.g. one per labeled pair, so that
  // work distributed across pairs is order-independent.
  Rng derive(std::string_view label) const {
    std::uint64_t h = 0xcbf29ce484222325ull ^ state_;
    for (unsigned char c : label) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
    Rng child(h);
    child.next_u64();  // decorrelate from raw hash
    return child;
  }

  Rng derive(std::uint64_t salt) const {
    Rng child(state_ ^ (salt * 0x9e3779b97f4a7c15ull + 0x165667b19e3779f9ull));
    child.next_u64();
    return child;
  }

 private:
  std::uint64_t state_;
};

}  // namespace fse

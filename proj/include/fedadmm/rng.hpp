#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace fedadmm {

inline std::uint64_t splitmix64(std::uint64_t& s) {
  s += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// xoshiro256** seeded through splitmix64. Every consumer opens its own
// (seed, stream, index) instance, so draws do not depend on evaluation order
// anywhere else in the program. Distributions are implemented here instead of
// <random> because libstdc++/libc++ disagree on the latter's output.
class Rng {
 public:
  enum Stream : std::uint64_t {
    ShardSizes = 1,
    Samples = 2,
    Shuffle = 3,
    Selection = 4,
    Delays = 5,
    DelayMeans = 6,
    Planted = 7,
    Probe = 8,
    Instance = 9,
  };

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t index = 0) {
    std::uint64_t s = seed;
    (void)splitmix64(s);
    s ^= 0xA0761D6478BD642FULL * (stream + 1);
    (void)splitmix64(s);
    s ^= 0xE7037ED1A0B428DBULL * (index + 1);
    for (auto& w : state_) w = splitmix64(s);
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // uniform in [0, 1), 53 bits
  double u01() { return double(next() >> 11) * 0x1.0p-53; }

  // uniform in [0, n), unbiased
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t reject_below = (-n) % n;
    for (;;) {
      std::uint64_t r = next();
      if (r >= reject_below) return r % n;
    }
  }

  long uniform_int(long lo, long hi) {  // inclusive bounds
    return lo + long(bounded(std::uint64_t(hi - lo) + 1));
  }

  double uniform_range(double a, double b) { return a + (b - a) * u01(); }

  double normal() {
    double u1 = 1.0 - u01();  // (0, 1], keeps the log finite
    double u2 = u01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  // ratio-of-normals construction, integer df
  double student_t(int df) {
    double z = normal();
    double chi2 = 0.0;
    for (int j = 0; j < df; ++j) {
      double w = normal();
      chi2 += w * w;
    }
    return z / std::sqrt(chi2 / double(df));
  }

  double exponential(double mean) { return -mean * std::log(1.0 - u01()); }

  template <class V>
  void shuffle(V& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = std::size_t(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // first `count` entries of a partial Fisher-Yates pass, returned sorted
  std::vector<int> sample_without_replacement(int m, int count) {
    std::vector<int> idx(m);
    for (int i = 0; i < m; ++i) idx[i] = i;
    for (int j = 0; j < count; ++j) {
      int r = int(uniform_int(j, m - 1));
      std::swap(idx[j], idx[r]);
    }
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    return idx;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t state_[4];
};

}  // namespace fedadmm

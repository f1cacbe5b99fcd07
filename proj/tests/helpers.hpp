#pragma once

#include <functional>

#include "fedadmm/model.hpp"
#include "fedadmm/rng.hpp"

namespace testutil {

using fedadmm::ClientShard;
using fedadmm::Rng;
using fedadmm::Vec;

inline ClientShard random_shard(std::uint64_t seed, long rows, long n, bool binary_labels = false) {
  Rng rng(seed, Rng::Samples);
  ClientShard s;
  s.features.resize(rows, n);
  s.labels.resize(rows);
  for (long t = 0; t < rows; ++t) {
    for (long j = 0; j < n; ++j) s.features(t, j) = rng.normal();
    s.labels[t] = binary_labels ? double(rng.u01() < 0.5) : rng.normal();
  }
  return s;
}

inline Vec random_vec(std::uint64_t seed, long n, double scale = 1.0) {
  Rng rng(seed, Rng::Probe);
  Vec v(n);
  for (long j = 0; j < n; ++j) v[j] = scale * rng.normal();
  return v;
}

// central differences, step tuned for ~1e-10 truncation on unit-scale losses
inline Vec central_diff(const std::function<double(const Vec&)>& f, const Vec& x,
                        double h = 1e-6) {
  Vec g(x.size());
  Vec p = x;
  for (long j = 0; j < x.size(); ++j) {
    const double keep = p[j];
    p[j] = keep + h;
    const double up = f(p);
    p[j] = keep - h;
    const double dn = f(p);
    p[j] = keep;
    g[j] = (up - dn) / (2.0 * h);
  }
  return g;
}

inline double rel_diff(const Vec& a, const Vec& b) {
  return (a - b).norm() / (1.0 + a.norm());
}

}  // namespace testutil

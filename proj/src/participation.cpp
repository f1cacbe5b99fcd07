#include "fedadmm/participation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedadmm/rng.hpp"

namespace fedadmm {

void SelectionPlan::validate() const {
  if (m < 1) throw Error("selection plan needs m >= 1");
  switch (policy) {
    case SelectionPolicy::UniformRho:
      if (!(rho > 0.0) || rho > 1.0) throw Error("rho must lie in (0, 1]");
      break;
    case SelectionPolicy::CoverSchedule:
      if (s0 < 1 || s0 > m) throw Error("cover window must satisfy 1 <= s0 <= m");
      break;
    case SelectionPolicy::Straggler:
      if (m0 < 1 || m0 > m) throw Error("straggler plan needs 1 <= m0 <= m");
      if (delays.means.empty()) {
        if (!(delays.mean_min > 0.0) || delays.mean_max < delays.mean_min)
          throw Error("bad delay mean range");
      } else if (int(delays.means.size()) != m) {
        throw Error("explicit delay means must list all m clients");
      } else {
        for (double mu : delays.means)
          if (!(mu > 0.0)) throw Error("delay means must be positive");
      }
      break;
  }
}

int SelectionPlan::omega_size() const {
  // tiny slack so fractions like 0.7 * 10 do not round below the intended count
  int count = int(std::floor(rho * double(m) + 1e-9));
  return std::max(count, 1);
}

std::vector<double> straggler_means(const SelectionPlan& plan) {
  if (!plan.delays.means.empty()) return plan.delays.means;
  Rng rng(plan.seed, Rng::DelayMeans);
  std::vector<double> means(plan.m);
  for (int i = 0; i < plan.m; ++i)
    means[i] = rng.uniform_range(plan.delays.mean_min, plan.delays.mean_max);
  return means;
}

std::vector<int> smallest_delays(const std::vector<double>& delays, int m0) {
  std::vector<int> idx(delays.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return delays[a] < delays[b]; });
  idx.resize(m0);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<int> next_omega(const SelectionPlan& plan, long tau) {
  plan.validate();
  if (tau < 1) throw Error("rounds are 1-based");

  switch (plan.policy) {
    case SelectionPolicy::UniformRho: {
      Rng rng(plan.seed, Rng::Selection, std::uint64_t(tau));
      return rng.sample_without_replacement(plan.m, plan.omega_size());
    }
    case SelectionPolicy::CoverSchedule: {
      // near-equal contiguous blocks rotated every round; any s0 consecutive
      // rounds jointly touch every client
      long w = (tau - 1) % plan.s0;
      long lo = w * long(plan.m) / plan.s0;
      long hi = (w + 1) * long(plan.m) / plan.s0;
      std::vector<int> out;
      out.reserve(hi - lo);
      for (long i = lo; i < hi; ++i) out.push_back(int(i));
      return out;
    }
    case SelectionPolicy::Straggler: {
      std::vector<double> means = straggler_means(plan);
      Rng rng(plan.seed, Rng::Delays, std::uint64_t(tau));
      std::vector<double> delay(plan.m);
      for (int i = 0; i < plan.m; ++i) delay[i] = rng.exponential(means[i]);
      return smallest_delays(delay, plan.m0);
    }
  }
  throw Error("unreachable");
}

bool verify_cover(const std::vector<std::vector<int>>& omegas, int s0, int m) {
  if (s0 < 1 || m < 1) throw Error("verify_cover needs s0 >= 1 and m >= 1");
  if (omegas.size() % std::size_t(s0) != 0)
    throw Error("round count must be a multiple of s0");
  std::vector<char> seen(m);
  for (std::size_t w = 0; w < omegas.size(); w += s0) {
    std::fill(seen.begin(), seen.end(), 0);
    for (int j = 0; j < s0; ++j)
      for (int i : omegas[w + j]) {
        if (i < 0 || i >= m) throw Error("client index out of range");
        seen[i] = 1;
      }
    if (std::count(seen.begin(), seen.end(), char(1)) != m) return false;
  }
  return true;
}

double cover_probability(int m, int s0, const std::vector<double>& sizes) {
  if (m < 1 || s0 < 1) throw Error("cover probability needs m >= 1 and s0 >= 1");
  if (int(sizes.size()) != s0) throw Error("need one round size per window slot");
  double miss = 1.0;
  for (double sz : sizes) {
    if (!(sz >= 1.0) || sz > double(m)) throw Error("round sizes must lie in [1, m]");
    miss *= 1.0 - sz / double(m);
  }
  return 1.0 - miss;
}

}  // namespace fedadmm

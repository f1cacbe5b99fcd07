#pragma once

#include <cstdint>
#include <vector>

#include "fedadmm/types.hpp"

namespace fedadmm {

enum class SelectionPolicy { UniformRho, CoverSchedule, Straggler };

struct DelaySpec {
  // per-round response delays are exponential with per-client means;
  // means come from `means` when given, otherwise drawn once from [mean_min, mean_max]
  double mean_min = 0.5;
  double mean_max = 1.5;
  std::vector<double> means;
};

struct SelectionPlan {
  SelectionPolicy policy = SelectionPolicy::UniformRho;
  int m = 0;
  double rho = 1.0;  // UniformRho participation fraction
  int s0 = 1;        // CoverSchedule window length
  int m0 = 0;        // Straggler: fastest responders kept per round
  std::uint64_t seed = 0;
  DelaySpec delays;

  void validate() const;
  int omega_size() const;  // UniformRho draw count, floor(rho m) clamped to >= 1
};

struct RoundClock {
  long k0 = 1;
  long tau(long k) const { return (k + k0 - 1) / k0; }  // ceil(k / k0)
  bool is_aggregation(long k) const { return k % k0 == 0; }
};

// participants for round tau >= 1, ascending indices; pure in (plan, tau)
std::vector<int> next_omega(const SelectionPlan& plan, long tau);

// m0 smallest delays, ties broken by client index
std::vector<int> smallest_delays(const std::vector<double>& delays, int m0);

std::vector<double> straggler_means(const SelectionPlan& plan);

// every aligned window of s0 consecutive rounds must jointly touch all m clients
bool verify_cover(const std::vector<std::vector<int>>& omegas, int s0, int m);

// chance a fixed client appears at least once across s0 independent uniform rounds
double cover_probability(int m, int s0, const std::vector<double>& sizes);

}  // namespace fedadmm

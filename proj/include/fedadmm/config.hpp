#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "fedadmm/types.hpp"

namespace fedadmm {

// flat key-value run configuration, schema_version 1; unknown keys are rejected
struct RunConfig {
  // data
  std::string dataset = "synthetic";  // synthetic | libsvm | dir
  std::string libsvm_path;
  std::string dataset_dir;
  std::string model = "linreg";  // linreg | logreg
  double lambda = 1e-3;          // logreg l2 penalty
  int m = 10;
  int n = 20;
  int d_min = 50;
  int d_max = 150;
  bool planted = false;
  std::uint64_t seed = 1;

  // algorithm
  std::string algorithm = "fedadmm";
  long k0 = 10;
  std::string policy = "uniform";  // uniform | cover | straggler
  double rho = 0.5;
  int s0 = 5;
  int m0 = 0;
  std::string sigma_rule = "paper_experiment";  // paper_experiment | theory | explicit
  std::vector<double> sigma_values;
  std::string init_mode = "experiment";  // experiment | algorithm
  double eps0 = -1.0;                    // < 0 selects k0^2
  double nu = 0.95;
  long kappa_max = 10000;

  // reference methods
  double gamma = 0.0;
  double mu_prox = 0.1;
  double alpha_mix = 0.5;
  double mu_pers = 1e-3;
  int inner_steps = 5;
  double inner_lr = 0.0;
  double f_ref = std::numeric_limits<double>::quiet_NaN();

  // stopping
  double eps_tol = -1.0;  // < 0 selects 1e-3 linreg / 1e-7 logreg
  long max_iters = 1000000;

  // io / execution
  std::string out_dir;
  int workers = 0;  // 0 selects hardware concurrency

  // sweep grids
  std::vector<int> grid_n, grid_m;
  std::vector<double> grid_rho;
  std::vector<long> grid_k0;
  std::vector<std::string> algorithms;
  int instances = 1;
};

RunConfig parse_config_text(const std::string& json_text);
RunConfig load_config(const std::string& path);
std::string config_to_json(const RunConfig& rc);  // full echo, documented key order

void validate_config(const RunConfig& rc);

}  // namespace fedadmm

#pragma once

#include <Eigen/Dense>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace fedadmm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

// thrown when the proximal inner loop hits its iteration cap
struct InnerSolveError : Error {
  double best_residual_sq;
  long iters;
  InnerSolveError(const std::string& msg, double best, long it)
      : Error(msg), best_residual_sq(best), iters(it) {}
};

// shortest decimal form that round-trips a double
inline std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace fedadmm

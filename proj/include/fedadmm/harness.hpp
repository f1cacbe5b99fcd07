#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fedadmm/baselines.hpp"
#include "fedadmm/config.hpp"

namespace fedadmm {

struct StoppingConfig {
  double eps_tol = 1e-3;
  double grad0_sq = 0.0;  // squared gradient norm at the zero vector
  long max_iters = 1000000;
};

double stopping_threshold(const StoppingConfig& cfg, long n, long m, long d);
bool stopping_met(double grad_sq, const StoppingConfig& cfg, long n, long m, long d);

// objective gap rule for the reference methods, checked against the admm run
bool baseline_stopping_met(double f_value, double f_ref);

// communication rounds consumed by k iterations: ceil(2k / k0)
long cr_count(long k, long k0);

struct TraceRecord {
  long k = 0;
  long tau = 0;
  long cr_cumulative = 0;
  double f_global = 0.0;
  double grad_norm_sq = 0.0;
  double lyapunov = 0.0;  // admm only, NaN otherwise
  long inner_iters_total = 0;
  double wall_ms = 0.0;
};

enum class RunStatus { StoppedByGradient, StoppedByGap, IterationCap };
const char* run_status_name(RunStatus s);

struct RunResult {
  Algorithm algorithm = Algorithm::FedADMM;
  RunStatus status = RunStatus::IterationCap;
  std::vector<TraceRecord> trace;
  Vec final_x;
  long final_k = 0;
  long final_tau = 0;
  long cr = 0;
  double f_final = 0.0;
  double grad_sq_final = 0.0;
  double f_ref = 0.0;  // admm records its own converged value here
  double wall_ms_total = 0.0;
  long inner_iters_total = 0;
  StationarityResiduals residuals;  // admm only
};

// full pipeline for one configuration: data, engine, stopping, optional trace
// files under rc.out_dir (trace.csv + summary.json)
RunResult run_experiment(const RunConfig& rc);

// same but over an already built dataset, so sweeps reuse instances
RunResult run_on_dataset(const RunConfig& rc, const FederatedDataset& data,
                         std::optional<double> f_ref_override = {});

struct SweepRow {
  int n = 0;
  int m = 0;
  double rho = 0.0;
  long k0 = 0;
  std::string algorithm;
  double median_cr = 0.0;
  double median_wall_ms = 0.0;
  int instances_ok = 0;
};

// grid x instances x algorithms; instances run on a worker pool, medians use
// the lower-median rule, rows come back in canonical grid order
std::vector<SweepRow> median_sweep(const RunConfig& rc);

double lower_median(std::vector<double> values);

void write_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace,
                     const std::string& algorithm = "");
void write_summary_json(const std::string& path, const RunResult& res, const RunConfig& rc);
void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);
void write_sweep_json(const std::string& path, const std::vector<SweepRow>& rows);

// aligned text table from a sweep summary CSV or a run summary JSON
std::string render_report(const std::string& path);

FederatedDataset build_dataset(const RunConfig& rc);

}  // namespace fedadmm

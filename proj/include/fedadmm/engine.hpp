#pragma once

#include <functional>
#include <vector>

#include "fedadmm/data.hpp"
#include "fedadmm/participation.hpp"

namespace fedadmm {

struct InnerSolverConfig {
  long kappa_max = 10000;  // proximal inner-loop iteration cap
  double rho = 2.0;        // contraction target used by kappa_bound
  double s = 0.0;          // certified curvature lower bound; 0 is always valid for convex losses
};

struct ClientState {
  Vec x, pi, z;
  double eps = 0.0;    // inexactness budget, shrinks by nu on every selection
  double sigma = 0.0;  // proximal weight
  double nu = 0.0;
  double alpha = 0.0;
  double r = 0.0;  // local gradient Lipschitz bound
  long last_selected_tau = -1;

  // caches valid for the current x
  Vec grad;
  double loss = 0.0;
};

// ExperimentSpec zeroes everything; AlgorithmSpec starts the duals at -alpha_i grad_i(x0)
// so the first aggregate already satisfies the consensus identity
enum class InitMode { ExperimentSpec, AlgorithmSpec };

enum class SigmaRule { PaperExperiment, Theory, Explicit };

struct EngineConfig {
  InitMode init = InitMode::ExperimentSpec;
  SigmaRule sigma_rule = SigmaRule::PaperExperiment;
  std::vector<double> sigma_explicit;
  double eps0 = -1.0;  // <= 0 selects k0^2
  double nu = 0.95;
  InnerSolverConfig inner;
};

struct StationarityResiduals {
  double grad_max = 0.0;       // max_i |alpha_i grad f_i(x_i) + pi_i|
  double consensus_max = 0.0;  // max_i |x_i - x|
  double dual_sum_norm = 0.0;  // |sum_i pi_i|
};

struct StepDiag {
  long k = 0;
  long tau = 0;  // round index after this step
  bool aggregated = false;
  bool stopped = false;
  long cr = 0;  // cumulative communication rounds
  double f_global = 0.0;
  double grad_norm_sq = 0.0;
  double lyapunov = 0.0;  // merit value after this step
  double descent_lhs = 0.0;
  double descent_rhs = 0.0;  // sum_i sigma_i/10 (|dx|^2 + |dx_i|^2)
  double agg_identity_rel = 0.0;
  double max_phi_excess = 0.0;  // max_i |alpha grad + pi|^2 - eps_i over selected
  long inner_iters = 0;
  int avg_count = 0;
  double wall_ms = 0.0;
};

struct InnerResult {
  Vec x;
  long iters = 0;  // recursion applications performed, >= 1
  double residual_sq = 0.0;
  Vec grad;  // local gradient at the returned iterate
};

// fixed-point recursion v <- (alpha r v + sigma xbar - (alpha grad f(v) + pi)) / (alpha r + sigma),
// stopped at the first iterate whose squared optimality residual is within eps
InnerResult local_solve_inexact(const ClientShard& shard, const ModelKind& kind, double alpha,
                                double r, double sigma, const Vec& pi, const Vec& xbar,
                                double eps, const InnerSolverConfig& cfg);

inline Vec dual_update(const Vec& pi, double sigma, const Vec& x_new, const Vec& xbar) {
  return pi + sigma * (x_new - xbar);
}

inline Vec pack_z(const ClientState& c) { return c.sigma * c.x + c.pi; }

Vec aggregate(const std::vector<ClientState>& clients, double sigma_total);

// inner-loop iteration bound from the geometric contraction argument
long kappa_bound(double alpha, double r, double sigma, double rho, double dist_sq, double eps);

// from-scratch merit value; the engine keeps an incrementally updated copy
double lyapunov_tilde(const std::vector<ClientShard>& shards, const ModelKind& kind,
                      const std::vector<ClientState>& clients, const Vec& server_x);

StationarityResiduals stationarity_residuals(const std::vector<ClientShard>& shards,
                                             const ModelKind& kind,
                                             const std::vector<ClientState>& clients,
                                             const Vec& server_x);

class Engine {
 public:
  Engine(const FederatedDataset& data, const WeightScheme& weights, const SelectionPlan& plan,
         RoundClock clock, EngineConfig cfg, const Vec* x0 = nullptr);

  // advances state k -> k+1; when `stop` is given it is tested on the fresh
  // aggregate's squared gradient norm and a hit skips the local phase
  StepDiag step(long k, const std::function<bool(double)>* stop = nullptr);

  const Vec& server_x() const { return server_x_; }
  const std::vector<ClientState>& clients() const { return clients_; }
  const FederatedDataset& data() const { return data_; }
  const WeightScheme& weights() const { return weights_; }
  double sigma_total() const { return sigma_total_; }
  long cr() const { return cr_; }
  double lyapunov() const { return lyap_; }
  double f_global() const { return f_global_; }
  double grad_norm_sq() const { return grad_sq_; }
  const std::vector<int>& omega() const { return omega_; }
  StationarityResiduals residuals() const;

 private:
  void refresh_lyapunov_contrib(int i);

  FederatedDataset data_;
  WeightScheme weights_;
  SelectionPlan plan_;
  RoundClock clock_;
  EngineConfig cfg_;
  std::vector<ClientState> clients_;
  std::vector<double> lyap_contrib_;
  std::vector<int> omega_;
  Vec server_x_;
  double sigma_total_ = 0.0;
  double lyap_ = 0.0;
  double f_global_ = 0.0;
  double grad_sq_ = 0.0;
  long cr_ = 0;
};

}  // namespace fedadmm

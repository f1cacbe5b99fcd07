#pragma once

#include <string>

#include "fedadmm/engine.hpp"

namespace fedadmm {

enum class Algorithm { FedADMM, FedAvg, FedProx, FedAlt, FedSim };

const char* algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);

struct FedAvgConfig {
  double gamma = 0.0;  // <= 0 selects m / (2 max_i r_i)
};

struct FedProxConfig {
  double mu = 0.1;
  int inner_steps = 5;
  double inner_lr = 0.0;  // <= 0 selects 1 / (r_i + mu)
};

// two-parameter personalization objective
// h_i(x, v) = (1 - mix) f_i(x) + mix f_i(v) + mu/2 |x - v|^2
struct PersonalizationConfig {
  double mix = 0.5;
  double mu = 1e-3;
  int inner_steps = 5;
  double inner_lr = 0.0;  // <= 0 selects 1 / (r_i + mu)
};

double personalization_value(const ClientShard& shard, const ModelKind& kind,
                             const PersonalizationConfig& cfg, const Vec& x, const Vec& v);
Vec personalization_grad_x(const ClientShard& shard, const ModelKind& kind,
                           const PersonalizationConfig& cfg, const Vec& x, const Vec& v);
Vec personalization_grad_v(const ClientShard& shard, const ModelKind& kind,
                           const PersonalizationConfig& cfg, const Vec& x, const Vec& v);

Vec fedavg_local(const ClientShard& shard, const ModelKind& kind, const Vec& base,
                 double gamma_over_m);

// inner gradient descent on f_i(v) + mu/2 |v - center|^2 from `warm`;
// a 10x objective blow-up raises an error
Vec fedprox_local(const ClientShard& shard, const ModelKind& kind, const FedProxConfig& cfg,
                  double r_i, const Vec& warm, const Vec& center);

struct PersonalPair {
  Vec x, v;
};
// personal block first, then the shared block against the updated personal iterate
PersonalPair fedalt_local(const ClientShard& shard, const ModelKind& kind,
                          const PersonalizationConfig& cfg, double r_i, const Vec& x_warm,
                          const Vec& v_warm);
// both blocks stepped against the current pair
PersonalPair fedsim_local(const ClientShard& shard, const ModelKind& kind,
                          const PersonalizationConfig& cfg, double r_i, const Vec& x_warm,
                          const Vec& v_warm);

// shared round scaffolding for the four reference methods: same clock, same
// participation stream, same communication accounting as the admm engine
class BaselineEngine {
 public:
  BaselineEngine(Algorithm alg, const FederatedDataset& data, const WeightScheme& weights,
                 const SelectionPlan& plan, RoundClock clock, FedAvgConfig avg_cfg = {},
                 FedProxConfig prox_cfg = {}, PersonalizationConfig pers_cfg = {});

  StepDiag step(long k, const std::function<bool(double)>* stop = nullptr);

  const Vec& server_x() const { return xbar_; }
  const std::vector<Vec>& client_x() const { return x_; }
  const std::vector<Vec>& client_v() const { return v_; }
  const std::vector<int>& omega() const { return omega_; }
  double f_global() const { return f_global_; }
  double grad_norm_sq() const { return grad_sq_; }
  long cr() const { return cr_; }
  double gamma() const { return gamma_; }
  const std::vector<double>& lipschitz() const { return r_; }

 private:
  Algorithm alg_;
  FederatedDataset data_;
  WeightScheme weights_;
  SelectionPlan plan_;
  RoundClock clock_;
  FedAvgConfig avg_cfg_;
  FedProxConfig prox_cfg_;
  PersonalizationConfig pers_cfg_;
  std::vector<Vec> x_, v_;
  std::vector<double> r_;
  std::vector<int> omega_;
  Vec xbar_;
  double gamma_ = 0.0;
  double f_global_ = 0.0;
  double grad_sq_ = 0.0;
  long cr_ = 0;
};

}  // namespace fedadmm

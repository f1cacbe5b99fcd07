#include "fedadmm/baselines.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace fedadmm {

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::FedADMM: return "fedadmm";
    case Algorithm::FedAvg: return "fedavg";
    case Algorithm::FedProx: return "fedprox";
    case Algorithm::FedAlt: return "fedalt";
    case Algorithm::FedSim: return "fedsim";
  }
  throw Error("unreachable");
}

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "fedadmm") return Algorithm::FedADMM;
  if (name == "fedavg") return Algorithm::FedAvg;
  if (name == "fedprox") return Algorithm::FedProx;
  if (name == "fedalt") return Algorithm::FedAlt;
  if (name == "fedsim") return Algorithm::FedSim;
  throw ConfigError("unknown algorithm: " + name);
}

double personalization_value(const ClientShard& shard, const ModelKind& kind,
                             const PersonalizationConfig& cfg, const Vec& x, const Vec& v) {
  return (1.0 - cfg.mix) * local_loss(shard, kind, x) + cfg.mix * local_loss(shard, kind, v) +
         0.5 * cfg.mu * (x - v).squaredNorm();
}

Vec personalization_grad_x(const ClientShard& shard, const ModelKind& kind,
                           const PersonalizationConfig& cfg, const Vec& x, const Vec& v) {
  return (1.0 - cfg.mix) * local_grad(shard, kind, x) + cfg.mu * (x - v);
}

Vec personalization_grad_v(const ClientShard& shard, const ModelKind& kind,
                           const PersonalizationConfig& cfg, const Vec& x, const Vec& v) {
  return cfg.mix * local_grad(shard, kind, v) + cfg.mu * (v - x);
}

Vec fedavg_local(const ClientShard& shard, const ModelKind& kind, const Vec& base,
                 double gamma_over_m) {
  return base - gamma_over_m * local_grad(shard, kind, base);
}

Vec fedprox_local(const ClientShard& shard, const ModelKind& kind, const FedProxConfig& cfg,
                  double r_i, const Vec& warm, const Vec& center) {
  if (cfg.mu < 0.0) throw Error("prox weight must be nonnegative");
  if (cfg.inner_steps < 0) throw Error("inner steps must be nonnegative");
  const double lr = cfg.inner_lr > 0.0 ? cfg.inner_lr : 1.0 / (r_i + cfg.mu);
  Vec v = warm;
  const double h0 =
      local_loss(shard, kind, v) + 0.5 * cfg.mu * (v - center).squaredNorm();
  for (int s = 0; s < cfg.inner_steps; ++s)
    v -= lr * (local_grad(shard, kind, v) + cfg.mu * (v - center));
  const double h1 =
      local_loss(shard, kind, v) + 0.5 * cfg.mu * (v - center).squaredNorm();
  if (h1 > 10.0 * h0 + 1e-12)
    throw Error("prox descent diverged: " + g17(h0) + " -> " + g17(h1));
  return v;
}

PersonalPair fedalt_local(const ClientShard& shard, const ModelKind& kind,
                          const PersonalizationConfig& cfg, double r_i, const Vec& x_warm,
                          const Vec& v_warm) {
  const double lr = cfg.inner_lr > 0.0 ? cfg.inner_lr : 1.0 / (r_i + cfg.mu);
  Vec v = v_warm, x = x_warm;
  for (int s = 0; s < cfg.inner_steps; ++s) v -= lr * personalization_grad_v(shard, kind, cfg, x, v);
  for (int s = 0; s < cfg.inner_steps; ++s) x -= lr * personalization_grad_x(shard, kind, cfg, x, v);
  return {std::move(x), std::move(v)};
}

PersonalPair fedsim_local(const ClientShard& shard, const ModelKind& kind,
                          const PersonalizationConfig& cfg, double r_i, const Vec& x_warm,
                          const Vec& v_warm) {
  const double lr = cfg.inner_lr > 0.0 ? cfg.inner_lr : 1.0 / (r_i + cfg.mu);
  Vec v = v_warm, x = x_warm;
  for (int s = 0; s < cfg.inner_steps; ++s) {
    Vec gx = personalization_grad_x(shard, kind, cfg, x, v);
    Vec gv = personalization_grad_v(shard, kind, cfg, x, v);
    x -= lr * gx;
    v -= lr * gv;
  }
  return {std::move(x), std::move(v)};
}

BaselineEngine::BaselineEngine(Algorithm alg, const FederatedDataset& data,
                               const WeightScheme& weights, const SelectionPlan& plan,
                               RoundClock clock, FedAvgConfig avg_cfg, FedProxConfig prox_cfg,
                               PersonalizationConfig pers_cfg)
    : alg_(alg),
      data_(data),
      weights_(weights),
      plan_(plan),
      clock_(clock),
      avg_cfg_(avg_cfg),
      prox_cfg_(prox_cfg),
      pers_cfg_(pers_cfg) {
  if (alg_ == Algorithm::FedADMM) throw ConfigError("use the admm engine for fedadmm");
  const int m = data_.m();
  if (m < 1) throw ConfigError("dataset has no clients");
  weights_.validate();
  if (weights_.alpha.size() != m) throw ConfigError("weights do not match client count");
  plan_.validate();
  if (plan_.m != m) throw ConfigError("selection plan does not match client count");
  if (clock_.k0 < 1) throw ConfigError("k0 must be >= 1");

  r_.resize(m);
  double r_max = 0.0;
  for (int i = 0; i < m; ++i) {
    r_[i] = lipschitz_estimate(data_.shards[i], data_.kind);
    if (!(r_[i] > 0.0)) throw ConfigError("client " + std::to_string(i) + " has no curvature");
    r_max = std::max(r_max, r_[i]);
  }
  // default keeps the effective local step gamma/m at half the 1/r stability edge
  gamma_ = avg_cfg_.gamma > 0.0 ? avg_cfg_.gamma : double(m) / (2.0 * r_max);

  const long n = data_.n;
  x_.assign(m, Vec::Zero(n));
  if (alg_ == Algorithm::FedAlt || alg_ == Algorithm::FedSim) v_.assign(m, Vec::Zero(n));
  xbar_ = Vec::Zero(n);

  Vec g;
  f_global_ = global_loss_grad(data_.shards, data_.kind, weights_, xbar_, &g);
  grad_sq_ = g.squaredNorm();

  omega_.resize(m);
  for (int i = 0; i < m; ++i) omega_[i] = i;
}

StepDiag BaselineEngine::step(long k, const std::function<bool(double)>* stop) {
  if (k < 0) throw Error("negative iteration index");
  const auto t0 = std::chrono::steady_clock::now();
  const int m = data_.m();

  StepDiag d;
  d.k = k;
  d.tau = clock_.tau(k + 1);
  d.aggregated = clock_.is_aggregation(k);
  d.lyapunov = std::numeric_limits<double>::quiet_NaN();

  if (d.aggregated) {
    Vec acc = Vec::Zero(xbar_.size());
    if (alg_ == Algorithm::FedAvg) {
      for (const auto& x : x_) acc += x;  // stale entries included on purpose
      xbar_ = acc / double(m);
      d.avg_count = m;
    } else {
      // only the clients that actually worked this round report in
      for (int i : omega_) acc += x_[i];
      xbar_ = acc / double(omega_.size());
      d.avg_count = int(omega_.size());
    }
    if (k > 0) cr_ += 2;

    Vec g;
    f_global_ = global_loss_grad(data_.shards, data_.kind, weights_, xbar_, &g);
    grad_sq_ = g.squaredNorm();
    if (!std::isfinite(f_global_) || !std::isfinite(grad_sq_)) throw Error("objective diverged");

    omega_ = next_omega(plan_, clock_.tau(k) + 1);
    if (stop && (*stop)(f_global_)) d.stopped = true;
  }

  if (!d.stopped) {
    for (int i : omega_) {
      switch (alg_) {
        case Algorithm::FedAvg: {
          const Vec& base = d.aggregated ? xbar_ : x_[i];
          x_[i] = fedavg_local(data_.shards[i], data_.kind, base, gamma_ / double(m));
          d.inner_iters += 1;
          break;
        }
        case Algorithm::FedProx: {
          const Vec& warm = d.aggregated ? xbar_ : x_[i];
          x_[i] = fedprox_local(data_.shards[i], data_.kind, prox_cfg_, r_[i], warm, xbar_);
          d.inner_iters += prox_cfg_.inner_steps;
          break;
        }
        case Algorithm::FedAlt: {
          const Vec& warm = d.aggregated ? xbar_ : x_[i];
          PersonalPair p = fedalt_local(data_.shards[i], data_.kind, pers_cfg_, r_[i], warm, v_[i]);
          x_[i] = std::move(p.x);
          v_[i] = std::move(p.v);
          d.inner_iters += 2L * pers_cfg_.inner_steps;
          break;
        }
        case Algorithm::FedSim: {
          const Vec& warm = d.aggregated ? xbar_ : x_[i];
          PersonalPair p = fedsim_local(data_.shards[i], data_.kind, pers_cfg_, r_[i], warm, v_[i]);
          x_[i] = std::move(p.x);
          v_[i] = std::move(p.v);
          d.inner_iters += pers_cfg_.inner_steps;
          break;
        }
        case Algorithm::FedADMM: throw Error("unreachable");
      }
    }
  }

  d.cr = cr_;
  d.f_global = f_global_;
  d.grad_norm_sq = grad_sq_;
  d.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return d;
}

}  // namespace fedadmm

#include "fedadmm/engine.hpp"

#include <cassert>
#include <chrono>
#include <cmath>
#include <limits>

namespace fedadmm {

InnerResult local_solve_inexact(const ClientShard& shard, const ModelKind& kind, double alpha,
                                double r, double sigma, const Vec& pi, const Vec& xbar,
                                double eps, const InnerSolverConfig& cfg) {
  if (!(alpha > 0.0) || !(r > 0.0) || !(sigma > 0.0)) throw Error("inner solve needs positive alpha, r, sigma");
  if (!(eps > 0.0)) throw Error("inner solve needs a positive budget");
  if (cfg.kappa_max < 1) throw Error("kappa_max must be >= 1");

  const double denom = alpha * r + sigma;
  Vec v = xbar;
  Vec g = local_grad(shard, kind, v);
  double best = std::numeric_limits<double>::infinity();
  for (long l = 1; l <= cfg.kappa_max; ++l) {
    v = (alpha * r * v + sigma * xbar - (alpha * g + pi)) / denom;
    g = local_grad(shard, kind, v);
    double res = (alpha * g + pi + sigma * (v - xbar)).squaredNorm();
    if (res < best) best = res;
    if (res <= eps) return {std::move(v), l, res, std::move(g)};
  }
  throw InnerSolveError("inner solve hit its iteration cap, best residual " + g17(best),
                        best, cfg.kappa_max);
}

Vec aggregate(const std::vector<ClientState>& clients, double sigma_total) {
  if (clients.empty()) throw Error("no clients");
  if (!(sigma_total > 0.0)) throw Error("aggregate needs positive total weight");
  Vec acc = Vec::Zero(clients.front().z.size());
  for (const auto& c : clients) acc += c.z;
  return acc / sigma_total;
}

long kappa_bound(double alpha, double r, double sigma, double rho, double dist_sq, double eps) {
  if (!(rho > 1.0)) throw Error("contraction target must exceed 1");
  if (!(eps > 0.0)) throw Error("budget must be positive");
  if (dist_sq < 0.0) throw Error("negative squared distance");
  double raw = 2.0 * (alpha * alpha * r * r + sigma * sigma) * dist_sq / eps;
  double c = std::ceil(raw);
  if (c <= 1.0) return 0;
  double k = std::ceil(std::log(c) / std::log(rho) - 1.0);
  return k < 0.0 ? 0 : long(k);
}

namespace {

double merit_contribution(const ClientState& c, const Vec& server_x, double loss) {
  return c.alpha * loss + (c.x - server_x).dot(c.pi) +
         0.5 * c.sigma * (c.x - server_x).squaredNorm() +
         29.0 * c.eps / ((1.0 - c.nu) * c.sigma);
}

}  // namespace

double lyapunov_tilde(const std::vector<ClientShard>& shards, const ModelKind& kind,
                      const std::vector<ClientState>& clients, const Vec& server_x) {
  if (shards.size() != clients.size()) throw Error("shards/clients size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < clients.size(); ++i)
    acc += merit_contribution(clients[i], server_x, local_loss(shards[i], kind, clients[i].x));
  return acc;
}

StationarityResiduals stationarity_residuals(const std::vector<ClientShard>& shards,
                                             const ModelKind& kind,
                                             const std::vector<ClientState>& clients,
                                             const Vec& server_x) {
  if (shards.size() != clients.size()) throw Error("shards/clients size mismatch");
  StationarityResiduals out;
  Vec pi_sum = Vec::Zero(server_x.size());
  for (std::size_t i = 0; i < clients.size(); ++i) {
    const ClientState& c = clients[i];
    Vec g = local_grad(shards[i], kind, c.x);
    out.grad_max = std::max(out.grad_max, (c.alpha * g + c.pi).norm());
    out.consensus_max = std::max(out.consensus_max, (c.x - server_x).norm());
    pi_sum += c.pi;
  }
  out.dual_sum_norm = pi_sum.norm();
  return out;
}

Engine::Engine(const FederatedDataset& data, const WeightScheme& weights,
               const SelectionPlan& plan, RoundClock clock, EngineConfig cfg, const Vec* x0)
    : data_(data), weights_(weights), plan_(plan), clock_(clock), cfg_(cfg) {
  const int m = data_.m();
  if (m < 1) throw ConfigError("dataset has no clients");
  weights_.validate();
  if (weights_.alpha.size() != m) throw ConfigError("weights do not match client count");
  plan_.validate();
  if (plan_.m != m) throw ConfigError("selection plan does not match client count");
  if (clock_.k0 < 1) throw ConfigError("k0 must be >= 1");
  if (!(cfg_.nu >= 0.5) || !(cfg_.nu < 1.0)) throw ConfigError("nu must lie in [1/2, 1)");
  if (cfg_.inner.kappa_max < 1) throw ConfigError("kappa_max must be >= 1");

  const double eps0 = cfg_.eps0 > 0.0 ? cfg_.eps0 : double(clock_.k0) * double(clock_.k0);
  const long n = data_.n;

  Vec x_init = Vec::Zero(n);
  if (cfg_.init == InitMode::AlgorithmSpec) {
    if (x0) {
      if (x0->size() != n) throw ConfigError("x0 dimension mismatch");
      x_init = *x0;
    }
  } else if (x0) {
    throw ConfigError("x0 is only honoured under algorithm init");
  }

  if (cfg_.sigma_rule == SigmaRule::Explicit && long(cfg_.sigma_explicit.size()) != m)
    throw ConfigError("explicit sigma list must cover all clients");

  clients_.resize(m);
  sigma_total_ = 0.0;
  for (int i = 0; i < m; ++i) {
    ClientState& c = clients_[i];
    c.alpha = weights_.alpha[i];
    c.nu = cfg_.nu;
    c.eps = eps0;
    c.r = lipschitz_estimate(data_.shards[i], data_.kind);
    if (!(c.r > 0.0)) throw ConfigError("client " + std::to_string(i) + " has no curvature");
    switch (cfg_.sigma_rule) {
      case SigmaRule::PaperExperiment: c.sigma = 0.2 * c.r / double(m); break;
      case SigmaRule::Theory: c.sigma = 3.0 * c.alpha * c.r; break;
      case SigmaRule::Explicit: c.sigma = cfg_.sigma_explicit[i]; break;
    }
    if (!(c.sigma > 0.0)) throw ConfigError("sigma must be positive for client " + std::to_string(i));
    sigma_total_ += c.sigma;

    c.x = x_init;
    c.loss = local_loss_grad(data_.shards[i], data_.kind, c.x, c.grad);
    c.pi = cfg_.init == InitMode::AlgorithmSpec ? Vec(-c.alpha * c.grad) : Vec(Vec::Zero(n));
    c.z = pack_z(c);
  }

  server_x_ = x_init;
  Vec g;
  f_global_ = global_loss_grad(data_.shards, data_.kind, weights_, server_x_, &g);
  grad_sq_ = g.squaredNorm();

  omega_.resize(m);
  for (int i = 0; i < m; ++i) omega_[i] = i;  // round zero set, every client reports

  lyap_contrib_.resize(m);
  for (int i = 0; i < m; ++i) refresh_lyapunov_contrib(i);
  lyap_ = 0.0;
  for (int i = 0; i < m; ++i) lyap_ += lyap_contrib_[i];
}

void Engine::refresh_lyapunov_contrib(int i) {
  const ClientState& c = clients_[i];
  lyap_contrib_[i] = merit_contribution(c, server_x_, c.loss);
}

StationarityResiduals Engine::residuals() const {
  return stationarity_residuals(data_.shards, data_.kind, clients_, server_x_);
}

StepDiag Engine::step(long k, const std::function<bool(double)>* stop) {
  if (k < 0) throw Error("negative iteration index");
  const auto t0 = std::chrono::steady_clock::now();
  const int m = data_.m();

  StepDiag d;
  d.k = k;
  d.tau = clock_.tau(k + 1);
  d.aggregated = clock_.is_aggregation(k);

  double dxbar_sq = 0.0;
  if (d.aggregated) {
    Vec zsum = Vec::Zero(server_x_.size());
    double znorms = 0.0;
    for (const auto& c : clients_) {
      zsum += c.z;
      znorms += c.z.norm();
    }
    Vec xbar = zsum / sigma_total_;

    // consensus identity: sum_i (sigma_i (x_i - xbar) + pi_i) vanishes by
    // construction of the aggregate; drift here means corrupted client state
    Vec idvec = Vec::Zero(server_x_.size());
    for (const auto& c : clients_) idvec += c.sigma * (c.x - xbar) + c.pi;
    d.agg_identity_rel = idvec.norm() / (1.0 + znorms);
    assert(d.agg_identity_rel <= 1e-8);

    dxbar_sq = (xbar - server_x_).squaredNorm();
    server_x_ = std::move(xbar);
    if (k > 0) cr_ += 2;  // round zero uploads nothing the server does not already hold

    Vec g;
    f_global_ = global_loss_grad(data_.shards, data_.kind, weights_, server_x_, &g);
    grad_sq_ = g.squaredNorm();
    if (!std::isfinite(f_global_) || !std::isfinite(grad_sq_)) throw Error("objective diverged");

    omega_ = next_omega(plan_, clock_.tau(k) + 1);
    d.avg_count = m;
    if (stop && (*stop)(grad_sq_)) d.stopped = true;
  }

  const double lyap_prev = lyap_;
  double rhs = sigma_total_ / 10.0 * dxbar_sq;

  if (!d.stopped) {
    for (int i : omega_) {
      ClientState& c = clients_[i];
      c.eps *= c.nu;
      InnerResult res = local_solve_inexact(data_.shards[i], data_.kind, c.alpha, c.r, c.sigma,
                                            c.pi, server_x_, c.eps, cfg_.inner);
      d.inner_iters += res.iters;
      rhs += c.sigma / 10.0 * (res.x - c.x).squaredNorm();
      c.pi = dual_update(c.pi, c.sigma, res.x, server_x_);
      c.x = std::move(res.x);
      c.grad = std::move(res.grad);
      c.z = pack_z(c);
      c.loss = local_loss(data_.shards[i], data_.kind, c.x);
      c.last_selected_tau = d.tau;

      // certificate carried by the dual step: the solve residual reappears as
      // the dual-feasibility vector of the new state
      double phi_sq = (c.alpha * c.grad + c.pi).squaredNorm();
      d.max_phi_excess = std::max(d.max_phi_excess, phi_sq - c.eps);
      assert(phi_sq <= c.eps + 1e-12);
    }
  }

  if (d.aggregated) {
    for (int i = 0; i < m; ++i) refresh_lyapunov_contrib(i);
  } else if (!d.stopped) {
    for (int i : omega_) refresh_lyapunov_contrib(i);
  }
  lyap_ = 0.0;
  for (int i = 0; i < m; ++i) lyap_ += lyap_contrib_[i];

  d.lyapunov = lyap_;
  d.descent_lhs = lyap_prev - lyap_;
  d.descent_rhs = rhs;
  d.cr = cr_;
  d.f_global = f_global_;
  d.grad_norm_sq = grad_sq_;
  d.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return d;
}

}  // namespace fedadmm

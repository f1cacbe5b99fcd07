#include "fedadmm/model.hpp"

#include <cmath>

#include "fedadmm/rng.hpp"

namespace fedadmm {

namespace {

void check_dims(const ClientShard& shard, const Vec& x) {
  if (shard.features.rows() != shard.labels.size())
    throw Error("shard rows/labels mismatch: " + std::to_string(shard.features.rows()) + " vs " +
                std::to_string(shard.labels.size()));
  if (shard.features.cols() != x.size())
    throw Error("feature dim " + std::to_string(shard.features.cols()) + " vs parameter dim " +
                std::to_string(x.size()));
  if (shard.features.rows() == 0) throw Error("empty shard");
}

double softplus(double u) {  // log(1 + e^u) without overflow
  return std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u)));
}

double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  double e = std::exp(u);
  return e / (1.0 + e);
}

}  // namespace

WeightScheme WeightScheme::uniform(int m) {
  if (m <= 0) throw Error("weights need m >= 1");
  WeightScheme w;
  w.alpha = Vec::Constant(m, 1.0 / double(m));
  return w;
}

void WeightScheme::validate() const {
  if (alpha.size() == 0) throw Error("empty weights");
  for (long i = 0; i < alpha.size(); ++i)
    if (!(alpha[i] > 0.0)) throw Error("weights must be strictly positive");
  if (std::abs(alpha.sum() - 1.0) > 1e-12) throw Error("weights must sum to 1");
}

double local_loss(const ClientShard& shard, const ModelKind& kind, const Vec& x) {
  Vec unused;
  return local_loss_grad(shard, kind, x, unused);
}

Vec local_grad(const ClientShard& shard, const ModelKind& kind, const Vec& x) {
  check_dims(shard, x);
  const double d = double(shard.rows());
  if (kind.family == ModelFamily::LinReg) {
    Vec g = shard.features.transpose() * (shard.features * x - shard.labels) / d;
    if (!g.allFinite()) throw Error("gradient overflow");
    return g;
  }
  Vec u = shard.features * x;
  Vec s(u.size());
  for (long t = 0; t < u.size(); ++t) s[t] = sigmoid(u[t]) - shard.labels[t];
  Vec g = shard.features.transpose() * s / d + kind.lambda * x;
  if (!g.allFinite()) throw Error("gradient overflow");
  return g;
}

double local_loss_grad(const ClientShard& shard, const ModelKind& kind, const Vec& x, Vec& grad) {
  check_dims(shard, x);
  const double d = double(shard.rows());
  double loss;
  if (kind.family == ModelFamily::LinReg) {
    Vec resid = shard.features * x - shard.labels;
    loss = resid.squaredNorm() / (2.0 * d);
    grad = shard.features.transpose() * resid / d;
  } else {
    Vec u = shard.features * x;
    Vec s(u.size());
    double acc = 0.0;
    for (long t = 0; t < u.size(); ++t) {
      acc += softplus(u[t]) - shard.labels[t] * u[t];
      s[t] = sigmoid(u[t]) - shard.labels[t];
    }
    loss = acc / d + 0.5 * kind.lambda * x.squaredNorm();
    grad = shard.features.transpose() * s / d + kind.lambda * x;
  }
  if (!std::isfinite(loss) || !grad.allFinite()) throw Error("loss overflow");
  return loss;
}

double lipschitz_estimate(const ClientShard& shard, const ModelKind& kind) {
  if (shard.rows() == 0 || shard.dim() == 0) throw Error("empty shard");
  const Mat& A = shard.features;
  const double d = double(shard.rows());

  // power iteration on A^T A through matvecs; the Rayleigh quotient approaches
  // the top eigenvalue from below, the 1.01 factor certifies the bound
  Rng rng(0x5EEDBA5Eu, Rng::Probe);
  Vec v(A.cols());
  for (long j = 0; j < v.size(); ++j) v[j] = rng.normal();
  v /= v.norm();

  double lam = 0.0;
  bool settled = false;
  for (int it = 0; it < 10000; ++it) {
    Vec w = A.transpose() * (A * v);
    double quad = v.dot(w);  // |Av|^2 for unit v
    double wn = w.norm();
    if (wn <= 1e-300) {
      lam = 0.0;
      settled = true;
      break;
    }
    if (it > 0 && std::abs(quad - lam) <= 1e-6 * std::max(quad, 1e-300)) {
      lam = quad;
      settled = true;
      break;
    }
    lam = quad;
    v = w / wn;
  }
  if (!settled) throw Error("spectral bound did not settle");

  if (kind.family == ModelFamily::LinReg) return 1.01 * lam / d;
  return 1.01 * lam / (4.0 * d) + kind.lambda;
}

double global_loss_grad(const std::vector<ClientShard>& shards, const ModelKind& kind,
                        const WeightScheme& weights, const Vec& x, Vec* grad) {
  if (long(shards.size()) != weights.alpha.size()) throw Error("shards/weights size mismatch");
  double loss = 0.0;
  if (grad) grad->setZero(x.size());
  Vec g;
  for (std::size_t i = 0; i < shards.size(); ++i) {
    double a = weights.alpha[long(i)];
    if (grad) {
      loss += a * local_loss_grad(shards[i], kind, x, g);
      *grad += a * g;
    } else {
      loss += a * local_loss(shards[i], kind, x);
    }
  }
  return loss;
}

}  // namespace fedadmm

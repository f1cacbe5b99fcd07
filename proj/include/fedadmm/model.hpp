#pragma once

#include <vector>

#include "fedadmm/types.hpp"

namespace fedadmm {

enum class ModelFamily { LinReg, LogReg };

struct ModelKind {
  ModelFamily family = ModelFamily::LinReg;
  double lambda = 0.0;  // l2 penalty, logreg only

  static ModelKind linreg() { return {ModelFamily::LinReg, 0.0}; }
  static ModelKind logreg(double lambda = 1e-3) { return {ModelFamily::LogReg, lambda}; }
};

// one client's rows: features d_i x n, labels d_i (logreg labels in {0,1})
struct ClientShard {
  Mat features;
  Vec labels;
  long rows() const { return features.rows(); }
  long dim() const { return features.cols(); }
};

// per-client convex weights, strictly positive, summing to 1
struct WeightScheme {
  Vec alpha;
  static WeightScheme uniform(int m);
  void validate() const;
};

double local_loss(const ClientShard& shard, const ModelKind& kind, const Vec& x);
Vec local_grad(const ClientShard& shard, const ModelKind& kind, const Vec& x);
// returns the loss, writes the gradient; one pass over the shard
double local_loss_grad(const ClientShard& shard, const ModelKind& kind, const Vec& x, Vec& grad);

// certified upper bound on the gradient Lipschitz constant of the local loss:
// power iteration on the Gram matrix, then a 1% safety factor on the data term
double lipschitz_estimate(const ClientShard& shard, const ModelKind& kind);

// weighted objective sum_i alpha_i f_i(x); fixed ascending-index accumulation
double global_loss_grad(const std::vector<ClientShard>& shards, const ModelKind& kind,
                        const WeightScheme& weights, const Vec& x, Vec* grad = nullptr);

}  // namespace fedadmm

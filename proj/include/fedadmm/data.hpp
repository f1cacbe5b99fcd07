#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fedadmm/model.hpp"

namespace fedadmm {

struct GenSpec {
  int m = 0;
  int n = 0;
  int d_min = 50;
  int d_max = 150;
  std::uint64_t seed = 0;
  // labels from a hidden linear model plus per-block noise instead of joint draws
  bool planted = false;
};

struct FederatedDataset {
  std::vector<ClientShard> shards;
  ModelKind kind;
  int n = 0;
  std::uint64_t seed = 0;

  int m() const { return int(shards.size()); }
  long total_rows() const;
  std::vector<long> sizes() const;
};

// rows drawn per distribution block: normal / student-t(5) / uniform[-5,5]
std::array<long, 3> sample_block_counts(long d);

FederatedDataset generate_linreg(const GenSpec& spec);

// row-compressed sparse features for the svmlight-style text format
struct SparseRows {
  std::vector<std::size_t> offsets;  // rows + 1
  std::vector<int> cols;
  std::vector<double> vals;
  int n = 0;
  long rows() const { return long(offsets.size()) - 1; }
};

struct LoadedData {
  SparseRows features;
  Vec labels;  // mapped to {0,1}
};

// strict parser: 1-based ascending indices, labels in {-1,+1} or {0,1};
// malformed input raises IoError naming the line
LoadedData load_libsvm(const std::string& path, int n_override = 0);
void save_libsvm(const std::string& path, const SparseRows& features, const Vec& labels);

// shuffle rows, split into m near-equal contiguous shards (sizes differ by <= 1)
FederatedDataset partition(const SparseRows& features, const Vec& labels, int m,
                           std::uint64_t seed, const ModelKind& kind);

// one CSV per shard plus a JSON manifest; values round-trip exactly
void save_dataset(const FederatedDataset& data, const std::string& dir);
FederatedDataset load_dataset(const std::string& dir);

}  // namespace fedadmm

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fedadmm/data.hpp"
#include "helpers.hpp"

using namespace fedadmm;
namespace fs = std::filesystem;

namespace {

std::string temp_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("fedadmm_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

std::string write_file(const std::string& tag, const std::string& body) {
  fs::path p = fs::temp_directory_path() / ("fedadmm_test_" + tag + ".txt");
  std::ofstream f(p);
  f << body;
  return p.string();
}

bool same_dataset(const FederatedDataset& a, const FederatedDataset& b) {
  if (a.m() != b.m() || a.n != b.n || a.seed != b.seed) return false;
  if ((a.kind.family != b.kind.family) || a.kind.lambda != b.kind.lambda) return false;
  for (int i = 0; i < a.m(); ++i) {
    if (a.shards[i].features != b.shards[i].features) return false;
    if (a.shards[i].labels != b.shards[i].labels) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("distribution blocks split the sample count by thirds") {
  auto c3 = sample_block_counts(3);
  CHECK(c3[0] == 1);
  CHECK(c3[1] == 1);
  CHECK(c3[2] == 1);

  auto c300 = sample_block_counts(300);
  CHECK(c300[0] == 100);
  CHECK(c300[1] == 100);
  CHECK(c300[2] == 100);

  auto c10 = sample_block_counts(10);
  CHECK(c10[0] == 4);
  CHECK(c10[1] == 4);
  CHECK(c10[2] == 2);
  CHECK(c10[0] + c10[1] + c10[2] == 10);

  CHECK(sample_block_counts(2)[2] == 0);
  CHECK_THROWS_AS(sample_block_counts(1), Error);
}

TEST_CASE("generation is deterministic and respects the size bounds") {
  GenSpec spec;
  spec.m = 20;
  spec.n = 6;
  spec.seed = 99;
  FederatedDataset a = generate_linreg(spec);
  FederatedDataset b = generate_linreg(spec);
  REQUIRE(same_dataset(a, b));

  REQUIRE(a.m() == 20);
  long total = 0;
  for (long sz : a.sizes()) {
    CHECK(sz >= 50);
    CHECK(sz <= 150);
    total += sz;
  }
  CHECK(total == a.total_rows());
  CHECK(a.kind.family == ModelFamily::LinReg);

  spec.seed = 100;
  CHECK_FALSE(same_dataset(a, generate_linreg(spec)));
}

TEST_CASE("a planted response changes labels but not features") {
  GenSpec spec;
  spec.m = 3;
  spec.n = 5;
  spec.d_min = 10;
  spec.d_max = 15;
  spec.seed = 7;
  FederatedDataset joint = generate_linreg(spec);
  spec.planted = true;
  FederatedDataset planted = generate_linreg(spec);

  REQUIRE(joint.m() == planted.m());
  bool labels_differ = false;
  for (int i = 0; i < joint.m(); ++i) {
    CHECK(joint.shards[i].features == planted.shards[i].features);
    labels_differ |= joint.shards[i].labels != planted.shards[i].labels;
  }
  CHECK(labels_differ);
}

TEST_CASE("tiny generator instance lands one row per distribution block") {
  GenSpec spec;
  spec.m = 1;
  spec.n = 2;
  spec.d_min = 3;
  spec.d_max = 3;
  spec.seed = 5;
  FederatedDataset data = generate_linreg(spec);
  REQUIRE(data.m() == 1);
  CHECK(data.shards[0].rows() == 3);
  CHECK(data.shards[0].dim() == 2);
}

TEST_CASE("partition sizes are near equal and preserve the row multiset") {
  ClientShard pool = testutil::random_shard(73, 10, 3);
  SparseRows sparse;
  sparse.n = 3;
  sparse.offsets.push_back(0);
  for (long t = 0; t < 10; ++t) {
    for (int j = 0; j < 3; ++j) {
      sparse.cols.push_back(j);
      sparse.vals.push_back(pool.features(t, j));
    }
    sparse.offsets.push_back(sparse.cols.size());
  }

  FederatedDataset five = partition(sparse, pool.labels, 5, 11, ModelKind::linreg());
  for (long sz : five.sizes()) CHECK(sz == 2);

  FederatedDataset three = partition(sparse, pool.labels, 3, 11, ModelKind::linreg());
  auto sizes = three.sizes();
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes[0] == 3);
  CHECK(sizes[1] == 3);
  CHECK(sizes[2] == 4);

  // rows survive as a multiset: collect (feature row, label) tuples and sort
  auto flatten = [](const FederatedDataset& d) {
    std::vector<std::vector<double>> rows;
    for (const auto& s : d.shards)
      for (long t = 0; t < s.rows(); ++t) {
        std::vector<double> r;
        for (long j = 0; j < s.dim(); ++j) r.push_back(s.features(t, j));
        r.push_back(s.labels[t]);
        rows.push_back(std::move(r));
      }
    std::sort(rows.begin(), rows.end());
    return rows;
  };
  std::vector<std::vector<double>> original;
  for (long t = 0; t < 10; ++t) {
    std::vector<double> r;
    for (int j = 0; j < 3; ++j) r.push_back(pool.features(t, j));
    r.push_back(pool.labels[t]);
    original.push_back(std::move(r));
  }
  std::sort(original.begin(), original.end());
  CHECK(flatten(three) == original);
  CHECK(flatten(five) == original);

  CHECK_THROWS_AS(partition(sparse, pool.labels, 11, 1, ModelKind::linreg()), Error);
}

TEST_CASE("svmlight lines parse into dense rows with mapped labels") {
  std::string path = write_file("svm_ok", "1 1:0.5 3:-2\n-1 2:1\n");
  LoadedData data = load_libsvm(path);
  REQUIRE(data.features.rows() == 2);
  REQUIRE(data.features.n == 3);
  CHECK(data.labels[0] == 1.0);
  CHECK(data.labels[1] == 0.0);

  // partition shuffles, so locate each row by its label
  FederatedDataset dense = partition(data.features, data.labels, 1, 0, ModelKind::logreg());
  const ClientShard& s = dense.shards[0];
  REQUIRE(s.rows() == 2);
  long pos = s.labels[0] == 1.0 ? 0 : 1;
  long neg = 1 - pos;
  CHECK(s.labels[pos] == 1.0);
  CHECK(s.labels[neg] == 0.0);
  CHECK(s.features(pos, 0) == 0.5);
  CHECK(s.features(pos, 1) == 0.0);
  CHECK(s.features(pos, 2) == -2.0);
  CHECK(s.features(neg, 0) == 0.0);
  CHECK(s.features(neg, 1) == 1.0);
  CHECK(s.features(neg, 2) == 0.0);
}

TEST_CASE("svmlight parser errors carry the offending line number") {
  std::string bad_value = write_file("svm_badval", "1 1:0.5\n1 2:\n");
  try {
    load_libsvm(bad_value);
    FAIL("expected a parse error");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }

  std::string non_ascending = write_file("svm_order", "1 3:1 2:1\n");
  CHECK_THROWS_AS(load_libsvm(non_ascending), IoError);

  std::string bad_label = write_file("svm_label", "2 1:1\n");
  CHECK_THROWS_AS(load_libsvm(bad_label), IoError);

  std::string missing_colon = write_file("svm_colon", "1 7 4\n");
  CHECK_THROWS_AS(load_libsvm(missing_colon), IoError);

  CHECK_THROWS_AS(load_libsvm("/nonexistent/nowhere.txt"), IoError);
}

TEST_CASE("svmlight round-trip preserves every stored value") {
  fedadmm::Rng rng(79, fedadmm::Rng::Samples);
  SparseRows rows;
  rows.n = 6;
  rows.offsets.push_back(0);
  Vec labels(8);
  for (int t = 0; t < 8; ++t) {
    for (int j = 0; j < 6; ++j) {
      if (rng.u01() < 0.4) {
        rows.cols.push_back(j);
        rows.vals.push_back(rng.normal());
      }
    }
    rows.offsets.push_back(rows.cols.size());
    labels[t] = double(rng.u01() < 0.5);
  }

  std::string path = write_file("svm_rt", "");
  save_libsvm(path, rows, labels);
  LoadedData back = load_libsvm(path, 6);
  REQUIRE(back.features.rows() == 8);
  REQUIRE(back.features.n == 6);
  CHECK(back.features.offsets == rows.offsets);
  CHECK(back.features.cols == rows.cols);
  CHECK(back.features.vals == rows.vals);
  CHECK(back.labels == labels);
}

TEST_CASE("explicit dimension override must cover the widest row") {
  std::string path = write_file("svm_override", "1 2:1\n");
  LoadedData wide = load_libsvm(path, 5);
  CHECK(wide.features.n == 5);
  CHECK_THROWS_AS(load_libsvm(path, 1), IoError);
}

TEST_CASE("a dataset directory round-trips exactly") {
  GenSpec spec;
  spec.m = 4;
  spec.n = 5;
  spec.d_min = 8;
  spec.d_max = 12;
  spec.seed = 12345;
  FederatedDataset data = generate_linreg(spec);

  std::string dir = temp_dir("ds_rt");
  save_dataset(data, dir);
  FederatedDataset back = load_dataset(dir);
  CHECK(same_dataset(data, back));

  CHECK_THROWS_AS(load_dataset(temp_dir("ds_missing")), IoError);
}

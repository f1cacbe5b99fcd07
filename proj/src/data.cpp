#include "fedadmm/data.hpp"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "fedadmm/rng.hpp"

namespace fedadmm {

namespace fs = std::filesystem;
using nlohmann::json;

long FederatedDataset::total_rows() const {
  long d = 0;
  for (const auto& s : shards) d += s.rows();
  return d;
}

std::vector<long> FederatedDataset::sizes() const {
  std::vector<long> out;
  out.reserve(shards.size());
  for (const auto& s : shards) out.push_back(s.rows());
  return out;
}

std::array<long, 3> sample_block_counts(long d) {
  long c = (d + 2) / 3;  // ceil(d / 3)
  long rest = d - 2 * c;
  if (rest < 0) throw Error("dataset too small to split into distribution blocks");
  return {c, c, rest};
}

FederatedDataset generate_linreg(const GenSpec& spec) {
  if (spec.m < 1 || spec.n < 1) throw Error("generator needs m >= 1 and n >= 1");
  if (spec.d_min < 1 || spec.d_max < spec.d_min) throw Error("bad shard size range");

  Rng size_rng(spec.seed, Rng::ShardSizes);
  std::vector<long> sizes(spec.m);
  long d = 0;
  for (int i = 0; i < spec.m; ++i) {
    sizes[i] = size_rng.uniform_int(spec.d_min, spec.d_max);
    d += sizes[i];
  }

  auto blocks = sample_block_counts(d);
  const int n = spec.n;

  Vec w_star;
  if (spec.planted) {
    Rng planted_rng(spec.seed, Rng::Planted);
    w_star.resize(n);
    for (int j = 0; j < n; ++j) w_star[j] = planted_rng.normal();
  }

  // raw rows in block order, n + 1 joint draws per row (features then label);
  // under `planted` the last draw becomes additive noise on a linear response
  Rng samp(spec.seed, Rng::Samples);
  Mat raw(d, n + 1);
  long row = 0;
  for (int block = 0; block < 3; ++block) {
    for (long t = 0; t < blocks[block]; ++t, ++row) {
      for (int j = 0; j <= n; ++j) {
        double v;
        if (block == 0)
          v = samp.normal();
        else if (block == 1)
          v = samp.student_t(5);
        else
          v = samp.uniform_range(-5.0, 5.0);
        raw(row, j) = v;
      }
      if (spec.planted) raw(row, n) += raw.row(row).head(n).dot(w_star);
    }
  }

  std::vector<long> perm(d);
  for (long t = 0; t < d; ++t) perm[t] = t;
  Rng shuf(spec.seed, Rng::Shuffle);
  shuf.shuffle(perm);

  FederatedDataset out;
  out.kind = ModelKind::linreg();
  out.n = n;
  out.seed = spec.seed;
  out.shards.resize(spec.m);
  long offset = 0;
  for (int i = 0; i < spec.m; ++i) {
    ClientShard& s = out.shards[i];
    s.features.resize(sizes[i], n);
    s.labels.resize(sizes[i]);
    for (long t = 0; t < sizes[i]; ++t) {
      long src = perm[offset + t];
      s.features.row(t) = raw.row(src).head(n);
      s.labels[t] = raw(src, n);
    }
    offset += sizes[i];
  }
  return out;
}

namespace {

[[noreturn]] void bad_line(const std::string& path, long line, const std::string& why) {
  throw IoError(path + ":" + std::to_string(line) + ": " + why);
}

}  // namespace

LoadedData load_libsvm(const std::string& path, int n_override) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  LoadedData out;
  out.features.offsets.push_back(0);
  std::vector<double> labels;
  int max_index = 0;
  std::string line;
  long lineno = 0;

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const char* p = line.c_str();
    while (*p == ' ' || *p == '\t') ++p;
    if (*p == '\0') continue;

    char* end = nullptr;
    double label = std::strtod(p, &end);
    if (end == p) bad_line(path, lineno, "missing label");
    if (label == -1.0 || label == 0.0)
      label = 0.0;
    else if (label == 1.0)
      label = 1.0;
    else
      bad_line(path, lineno, "label must be -1, 0 or 1");
    p = end;

    int prev_index = 0;
    for (;;) {
      while (*p == ' ' || *p == '\t') ++p;
      if (*p == '\0') break;
      long idx = std::strtol(p, &end, 10);
      if (end == p || *end != ':') bad_line(path, lineno, "expected index:value");
      if (idx < 1) bad_line(path, lineno, "indices are 1-based");
      if (idx <= prev_index) bad_line(path, lineno, "indices must be strictly ascending");
      p = end + 1;
      double val = std::strtod(p, &end);
      if (end == p) bad_line(path, lineno, "missing value");
      p = end;
      out.features.cols.push_back(int(idx) - 1);
      out.features.vals.push_back(val);
      prev_index = int(idx);
      if (idx > max_index) max_index = int(idx);
    }
    out.features.offsets.push_back(out.features.cols.size());
    labels.push_back(label);
  }

  if (labels.empty()) throw IoError(path + ": no samples");
  if (n_override > 0) {
    if (n_override < max_index)
      throw IoError(path + ": n override " + std::to_string(n_override) +
                    " below max index " + std::to_string(max_index));
    out.features.n = n_override;
  } else {
    out.features.n = max_index;
  }
  out.labels = Eigen::Map<Vec>(labels.data(), long(labels.size()));
  return out;
}

void save_libsvm(const std::string& path, const SparseRows& features, const Vec& labels) {
  if (features.rows() != labels.size()) throw Error("rows/labels mismatch");
  std::ofstream outf(path);
  if (!outf) throw IoError("cannot write " + path);
  for (long t = 0; t < features.rows(); ++t) {
    outf << (labels[t] > 0.5 ? "1" : "-1");
    for (std::size_t j = features.offsets[t]; j < features.offsets[t + 1]; ++j)
      outf << ' ' << features.cols[j] + 1 << ':' << g17(features.vals[j]);
    outf << '\n';
  }
  if (!outf) throw IoError("write failed: " + path);
}

FederatedDataset partition(const SparseRows& features, const Vec& labels, int m,
                           std::uint64_t seed, const ModelKind& kind) {
  const long rows = features.rows();
  if (rows != labels.size()) throw Error("rows/labels mismatch");
  if (m < 1) throw Error("partition needs m >= 1");
  if (rows < m) throw Error("fewer rows than clients");

  std::vector<long> perm(rows);
  for (long t = 0; t < rows; ++t) perm[t] = t;
  Rng shuf(seed, Rng::Shuffle);
  shuf.shuffle(perm);

  FederatedDataset out;
  out.kind = kind;
  out.n = features.n;
  out.seed = seed;
  out.shards.resize(m);
  const long base = rows / m, rem = rows % m;
  long offset = 0;
  for (int i = 0; i < m; ++i) {
    long d_i = base + (i < rem ? 1 : 0);
    ClientShard& s = out.shards[i];
    s.features = Mat::Zero(d_i, features.n);
    s.labels.resize(d_i);
    for (long t = 0; t < d_i; ++t) {
      long src = perm[offset + t];
      for (std::size_t j = features.offsets[src]; j < features.offsets[src + 1]; ++j)
        s.features(t, features.cols[j]) = features.vals[j];
      s.labels[t] = labels[src];
    }
    offset += d_i;
  }
  return out;
}

void save_dataset(const FederatedDataset& data, const std::string& dir) {
  fs::create_directories(dir);
  json manifest;
  manifest["schema_version"] = 1;
  manifest["kind"] = data.kind.family == ModelFamily::LinReg ? "linreg" : "logreg";
  manifest["lambda"] = data.kind.lambda;
  manifest["m"] = data.m();
  manifest["n"] = data.n;
  manifest["d"] = data.sizes();
  manifest["seed"] = data.seed;
  manifest["total_rows"] = data.total_rows();
  std::ofstream mf(fs::path(dir) / "manifest.json");
  if (!mf) throw IoError("cannot write manifest in " + dir);
  mf << manifest.dump(2) << '\n';

  for (int i = 0; i < data.m(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "shard_%03d.csv", i);
    std::ofstream sf(fs::path(dir) / name);
    if (!sf) throw IoError(std::string("cannot write ") + name);
    const ClientShard& s = data.shards[i];
    for (long t = 0; t < s.rows(); ++t) {
      for (long j = 0; j < s.dim(); ++j) sf << g17(s.features(t, j)) << ',';
      sf << g17(s.labels[t]) << '\n';
    }
    if (!sf) throw IoError(std::string("write failed: ") + name);
  }
}

FederatedDataset load_dataset(const std::string& dir) {
  std::ifstream mf(fs::path(dir) / "manifest.json");
  if (!mf) throw IoError("cannot open manifest in " + dir);
  json manifest;
  try {
    mf >> manifest;
  } catch (const json::exception& e) {
    throw IoError("bad manifest in " + dir + ": " + e.what());
  }
  if (manifest.value("schema_version", 0) != 1) throw IoError("unsupported manifest version");

  FederatedDataset out;
  std::string kind = manifest.at("kind").get<std::string>();
  if (kind == "linreg")
    out.kind = ModelKind::linreg();
  else if (kind == "logreg")
    out.kind = ModelKind::logreg(manifest.at("lambda").get<double>());
  else
    throw IoError("unknown kind in manifest: " + kind);
  out.n = manifest.at("n").get<int>();
  out.seed = manifest.at("seed").get<std::uint64_t>();
  const int m = manifest.at("m").get<int>();
  auto sizes = manifest.at("d").get<std::vector<long>>();
  if (int(sizes.size()) != m) throw IoError("manifest d array does not match m");

  out.shards.resize(m);
  for (int i = 0; i < m; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "shard_%03d.csv", i);
    std::ifstream sf(fs::path(dir) / name);
    if (!sf) throw IoError(std::string("cannot open ") + name);
    ClientShard& s = out.shards[i];
    s.features.resize(sizes[i], out.n);
    s.labels.resize(sizes[i]);
    std::string line;
    for (long t = 0; t < sizes[i]; ++t) {
      if (!std::getline(sf, line)) throw IoError(std::string(name) + ": truncated");
      const char* p = line.c_str();
      char* end = nullptr;
      for (long j = 0; j <= out.n; ++j) {
        double v = std::strtod(p, &end);
        if (end == p) throw IoError(std::string(name) + ": bad row " + std::to_string(t));
        (j < out.n ? s.features(t, j) : s.labels[t]) = v;
        p = end;
        if (j < out.n) {
          if (*p != ',') throw IoError(std::string(name) + ": bad row " + std::to_string(t));
          ++p;
        }
      }
    }
  }
  return out;
}

}  // namespace fedadmm

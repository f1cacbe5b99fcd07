#include "fedadmm/config.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>

#include "fedadmm/baselines.hpp"

namespace fedadmm {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

long as_integer(const json& v, const std::string& key) {
  if (!v.is_number_integer() && !v.is_number_unsigned())
    throw ConfigError("config key '" + key + "' must be an integer");
  return v.get<long>();
}

double as_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("config key '" + key + "' must be a number");
  return v.get<double>();
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError("config key '" + key + "' must be a string");
  return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw ConfigError("config key '" + key + "' must be a boolean");
  return v.get<bool>();
}

template <class T, class F>
std::vector<T> as_array(const json& v, const std::string& key, F item) {
  if (!v.is_array()) throw ConfigError("config key '" + key + "' must be an array");
  std::vector<T> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(item(e, key));
  return out;
}

}  // namespace

RunConfig parse_config_text(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a flat JSON object");
  if (!doc.contains("schema_version")) throw ConfigError("config is missing schema_version");

  RunConfig rc;
  for (const auto& [key, value] : doc.items()) {
    if (key == "schema_version") {
      if (as_integer(value, key) != 1) throw ConfigError("unsupported schema_version");
    } else if (key == "dataset") {
      rc.dataset = as_string(value, key);
    } else if (key == "libsvm_path") {
      rc.libsvm_path = as_string(value, key);
    } else if (key == "dataset_dir") {
      rc.dataset_dir = as_string(value, key);
    } else if (key == "model") {
      rc.model = as_string(value, key);
    } else if (key == "lambda") {
      rc.lambda = as_number(value, key);
    } else if (key == "m") {
      rc.m = int(as_integer(value, key));
    } else if (key == "n") {
      rc.n = int(as_integer(value, key));
    } else if (key == "d_min") {
      rc.d_min = int(as_integer(value, key));
    } else if (key == "d_max") {
      rc.d_max = int(as_integer(value, key));
    } else if (key == "planted") {
      rc.planted = as_bool(value, key);
    } else if (key == "seed") {
      long s = as_integer(value, key);
      if (s < 0) throw ConfigError("seed must be nonnegative");
      rc.seed = std::uint64_t(s);
    } else if (key == "algorithm") {
      rc.algorithm = as_string(value, key);
    } else if (key == "k0") {
      rc.k0 = as_integer(value, key);
    } else if (key == "policy") {
      rc.policy = as_string(value, key);
    } else if (key == "rho") {
      rc.rho = as_number(value, key);
    } else if (key == "s0") {
      rc.s0 = int(as_integer(value, key));
    } else if (key == "m0") {
      rc.m0 = int(as_integer(value, key));
    } else if (key == "sigma_rule") {
      rc.sigma_rule = as_string(value, key);
    } else if (key == "sigma_values") {
      rc.sigma_values = as_array<double>(value, key, as_number);
    } else if (key == "init_mode") {
      rc.init_mode = as_string(value, key);
    } else if (key == "eps0") {
      rc.eps0 = as_number(value, key);
    } else if (key == "nu") {
      rc.nu = as_number(value, key);
    } else if (key == "kappa_max") {
      rc.kappa_max = as_integer(value, key);
    } else if (key == "gamma") {
      rc.gamma = as_number(value, key);
    } else if (key == "mu_prox") {
      rc.mu_prox = as_number(value, key);
    } else if (key == "alpha_mix") {
      rc.alpha_mix = as_number(value, key);
    } else if (key == "mu_pers") {
      rc.mu_pers = as_number(value, key);
    } else if (key == "inner_steps") {
      rc.inner_steps = int(as_integer(value, key));
    } else if (key == "inner_lr") {
      rc.inner_lr = as_number(value, key);
    } else if (key == "f_ref") {
      if (!value.is_null()) rc.f_ref = as_number(value, key);
    } else if (key == "eps_tol") {
      rc.eps_tol = as_number(value, key);
    } else if (key == "max_iters") {
      rc.max_iters = as_integer(value, key);
    } else if (key == "out_dir") {
      rc.out_dir = as_string(value, key);
    } else if (key == "workers") {
      rc.workers = int(as_integer(value, key));
    } else if (key == "grid_n") {
      rc.grid_n = as_array<int>(value, key, [](const json& v, const std::string& k) {
        return int(as_integer(v, k));
      });
    } else if (key == "grid_m") {
      rc.grid_m = as_array<int>(value, key, [](const json& v, const std::string& k) {
        return int(as_integer(v, k));
      });
    } else if (key == "grid_rho") {
      rc.grid_rho = as_array<double>(value, key, as_number);
    } else if (key == "grid_k0") {
      rc.grid_k0 = as_array<long>(value, key, as_integer);
    } else if (key == "algorithms") {
      rc.algorithms = as_array<std::string>(value, key, as_string);
    } else if (key == "instances") {
      rc.instances = int(as_integer(value, key));
    } else {
      throw ConfigError("unknown config key: " + key);
    }
  }
  validate_config(rc);
  return rc;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config_text(text);
}

void validate_config(const RunConfig& rc) {
  if (rc.dataset != "synthetic" && rc.dataset != "libsvm" && rc.dataset != "dir")
    throw ConfigError("dataset must be synthetic, libsvm or dir");
  if (rc.dataset == "libsvm" && rc.libsvm_path.empty())
    throw ConfigError("libsvm dataset needs libsvm_path");
  if (rc.dataset == "dir" && rc.dataset_dir.empty())
    throw ConfigError("dir dataset needs dataset_dir");
  if (rc.model != "linreg" && rc.model != "logreg")
    throw ConfigError("model must be linreg or logreg");
  if (rc.m < 1) throw ConfigError("m must be >= 1");
  if (rc.dataset == "synthetic") {
    if (rc.n < 1) throw ConfigError("n must be >= 1");
    if (rc.d_min < 1 || rc.d_max < rc.d_min) throw ConfigError("bad shard size range");
  }
  (void)algorithm_from_name(rc.algorithm);
  if (rc.k0 < 1) throw ConfigError("k0 must be >= 1");
  if (rc.policy != "uniform" && rc.policy != "cover" && rc.policy != "straggler")
    throw ConfigError("policy must be uniform, cover or straggler");
  if (rc.policy == "uniform" && (!(rc.rho > 0.0) || rc.rho > 1.0))
    throw ConfigError("rho must lie in (0, 1]");
  if (rc.sigma_rule != "paper_experiment" && rc.sigma_rule != "theory" &&
      rc.sigma_rule != "explicit")
    throw ConfigError("sigma_rule must be paper_experiment, theory or explicit");
  if (rc.sigma_rule == "explicit" && rc.sigma_values.empty())
    throw ConfigError("explicit sigma_rule needs sigma_values");
  if (rc.init_mode != "experiment" && rc.init_mode != "algorithm")
    throw ConfigError("init_mode must be experiment or algorithm");
  if (!(rc.nu >= 0.5) || !(rc.nu < 1.0)) throw ConfigError("nu must lie in [1/2, 1)");
  if (rc.kappa_max < 1) throw ConfigError("kappa_max must be >= 1");
  if (rc.inner_steps < 0) throw ConfigError("inner_steps must be >= 0");
  if (rc.max_iters < 0) throw ConfigError("max_iters must be >= 0");
  if (rc.workers < 0) throw ConfigError("workers must be >= 0");
  if (rc.instances < 1) throw ConfigError("instances must be >= 1");
  if (!(rc.alpha_mix >= 0.0) || rc.alpha_mix > 1.0)
    throw ConfigError("alpha_mix must lie in [0, 1]");
  for (double rho : rc.grid_rho)
    if (!(rho > 0.0) || rho > 1.0) throw ConfigError("grid_rho entries must lie in (0, 1]");
  for (long k0 : rc.grid_k0)
    if (k0 < 1) throw ConfigError("grid_k0 entries must be >= 1");
  for (int n : rc.grid_n)
    if (n < 1) throw ConfigError("grid_n entries must be >= 1");
  for (int m : rc.grid_m)
    if (m < 1) throw ConfigError("grid_m entries must be >= 1");
  for (const auto& a : rc.algorithms) (void)algorithm_from_name(a);
}

std::string config_to_json(const RunConfig& rc) {
  ordered_json doc;
  doc["schema_version"] = 1;
  doc["dataset"] = rc.dataset;
  doc["libsvm_path"] = rc.libsvm_path;
  doc["dataset_dir"] = rc.dataset_dir;
  doc["model"] = rc.model;
  doc["lambda"] = rc.lambda;
  doc["m"] = rc.m;
  doc["n"] = rc.n;
  doc["d_min"] = rc.d_min;
  doc["d_max"] = rc.d_max;
  doc["planted"] = rc.planted;
  doc["seed"] = rc.seed;
  doc["algorithm"] = rc.algorithm;
  doc["k0"] = rc.k0;
  doc["policy"] = rc.policy;
  doc["rho"] = rc.rho;
  doc["s0"] = rc.s0;
  doc["m0"] = rc.m0;
  doc["sigma_rule"] = rc.sigma_rule;
  doc["sigma_values"] = rc.sigma_values;
  doc["init_mode"] = rc.init_mode;
  doc["eps0"] = rc.eps0;
  doc["nu"] = rc.nu;
  doc["kappa_max"] = rc.kappa_max;
  doc["gamma"] = rc.gamma;
  doc["mu_prox"] = rc.mu_prox;
  doc["alpha_mix"] = rc.alpha_mix;
  doc["mu_pers"] = rc.mu_pers;
  doc["inner_steps"] = rc.inner_steps;
  doc["inner_lr"] = rc.inner_lr;
  if (std::isnan(rc.f_ref))
    doc["f_ref"] = nullptr;
  else
    doc["f_ref"] = rc.f_ref;
  doc["eps_tol"] = rc.eps_tol;
  doc["max_iters"] = rc.max_iters;
  doc["out_dir"] = rc.out_dir;
  doc["workers"] = rc.workers;
  doc["grid_n"] = rc.grid_n;
  doc["grid_m"] = rc.grid_m;
  doc["grid_rho"] = rc.grid_rho;
  doc["grid_k0"] = rc.grid_k0;
  doc["algorithms"] = rc.algorithms;
  doc["instances"] = rc.instances;
  return doc.dump(2);
}

}  // namespace fedadmm

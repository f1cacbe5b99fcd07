#include <doctest.h>

#include <cmath>
#include <json.hpp>
#include <string>

#include "fedadmm/config.hpp"

using namespace fedadmm;

namespace {

bool same_config(const RunConfig& a, const RunConfig& b) {
  return config_to_json(a) == config_to_json(b);
}

}  // namespace

TEST_CASE("defaults survive a serialize-parse round trip") {
  RunConfig def;
  RunConfig back = parse_config_text(config_to_json(def));
  CHECK(same_config(def, back));
  CHECK(std::isnan(back.f_ref));  // null in the echo, NaN in memory
}

TEST_CASE("a populated configuration round-trips field by field") {
  RunConfig rc;
  rc.dataset = "dir";
  rc.dataset_dir = "/tmp/somewhere";
  rc.model = "logreg";
  rc.lambda = 0.01;
  rc.m = 7;
  rc.n = 3;
  rc.seed = 42;
  rc.algorithm = "fedprox";
  rc.k0 = 4;
  rc.policy = "cover";
  rc.s0 = 2;
  rc.sigma_rule = "explicit";
  rc.sigma_values = {0.5, 1.5, 2.5, 1.0, 1.0, 1.0, 1.0};
  rc.init_mode = "algorithm";
  rc.eps0 = 2.0;
  rc.nu = 0.5;
  rc.f_ref = -3.25;
  rc.grid_k0 = {1, 10};
  rc.algorithms = {"fedadmm", "fedavg"};
  rc.instances = 3;

  RunConfig back = parse_config_text(config_to_json(rc));
  CHECK(same_config(rc, back));
  CHECK(back.sigma_values == rc.sigma_values);
  CHECK(back.f_ref == -3.25);
  CHECK(back.grid_k0 == rc.grid_k0);
}

TEST_CASE("unknown keys are rejected by name") {
  try {
    parse_config_text(R"({"schema_version": 1, "leraning_rate": 0.1})");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("leraning_rate") != std::string::npos);
  }
}

TEST_CASE("the schema version is mandatory and pinned") {
  CHECK_THROWS_AS(parse_config_text(R"({"m": 5})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"schema_version": 2})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"schema_version": "1"})"), ConfigError);
  CHECK_NOTHROW(parse_config_text(R"({"schema_version": 1})"));
}

TEST_CASE("malformed documents and values are refused") {
  CHECK_THROWS_AS(parse_config_text("not json at all"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"([1, 2, 3])"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"schema_version": 1, "m": "ten"})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"schema_version": 1, "m": 2.5})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"schema_version": 1, "rho": "half"})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"schema_version": 1, "planted": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"schema_version": 1, "seed": -4})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"schema_version": 1, "sigma_values": 3})"), ConfigError);
}

TEST_CASE("semantic validation catches impossible runs") {
  auto broken = [](void (*mut)(RunConfig&)) {
    RunConfig rc;
    mut(rc);
    return rc;
  };

  CHECK_THROWS_AS(validate_config(broken([](RunConfig& rc) { rc.rho = 0.0; })), ConfigError);
  CHECK_THROWS_AS(validate_config(broken([](RunConfig& rc) { rc.rho = 1.5; })), ConfigError);
  CHECK_THROWS_AS(validate_config(broken([](RunConfig& rc) { rc.algorithm = "sgd"; })),
                  ConfigError);
  CHECK_THROWS_AS(validate_config(broken([](RunConfig& rc) { rc.model = "svm"; })), ConfigError);
  CHECK_THROWS_AS(validate_config(broken([](RunConfig& rc) { rc.policy = "roundrobin"; })),
                  ConfigError);
  CHECK_THROWS_AS(validate_config(broken([](RunConfig& rc) { rc.nu = 1.0; })), ConfigError);
  CHECK_THROWS_AS(validate_config(broken([](RunConfig& rc) { rc.nu = 0.25; })), ConfigError);
  CHECK_THROWS_AS(validate_config(broken([](RunConfig& rc) { rc.sigma_rule = "explicit"; })),
                  ConfigError);
  CHECK_THROWS_AS(validate_config(broken([](RunConfig& rc) { rc.init_mode = "warm"; })),
                  ConfigError);
  CHECK_THROWS_AS(validate_config(broken([](RunConfig& rc) { rc.k0 = 0; })), ConfigError);
  CHECK_THROWS_AS(validate_config(broken([](RunConfig& rc) { rc.m = 0; })), ConfigError);
  CHECK_THROWS_AS(validate_config(broken([](RunConfig& rc) { rc.d_max = 5; rc.d_min = 9; })),
                  ConfigError);
  CHECK_THROWS_AS(validate_config(broken([](RunConfig& rc) { rc.dataset = "libsvm"; })),
                  ConfigError);
  CHECK_THROWS_AS(validate_config(broken([](RunConfig& rc) { rc.instances = 0; })), ConfigError);
  CHECK_THROWS_AS(validate_config(broken([](RunConfig& rc) { rc.alpha_mix = 1.5; })),
                  ConfigError);
  CHECK_THROWS_AS(validate_config(broken([](RunConfig& rc) { rc.grid_rho = {0.5, 0.0}; })),
                  ConfigError);
  CHECK_THROWS_AS(validate_config(broken([](RunConfig& rc) { rc.algorithms = {"fedavg", "x"}; })),
                  ConfigError);
  CHECK_THROWS_AS(validate_config(broken([](RunConfig& rc) { rc.max_iters = -1; })), ConfigError);

  // an empty iteration budget is a legitimate dry run
  CHECK_NOTHROW(validate_config(broken([](RunConfig& rc) { rc.max_iters = 0; })));
  CHECK_NOTHROW(validate_config(RunConfig{}));
}

TEST_CASE("a null reference objective stays null through the echo") {
  RunConfig rc;
  std::string echoed = config_to_json(rc);
  auto doc = nlohmann::json::parse(echoed);
  CHECK(doc["f_ref"].is_null());

  rc.f_ref = 2.0;
  auto doc2 = nlohmann::json::parse(config_to_json(rc));
  CHECK(doc2["f_ref"] == 2.0);
}

TEST_CASE("configs load from disk with a clear failure for missing files") {
  CHECK_THROWS_AS(load_config("/nonexistent/run.json"), ConfigError);
}

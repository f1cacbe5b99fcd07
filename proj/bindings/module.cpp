#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fedadmm/data.hpp"
#include "fedadmm/engine.hpp"
#include "fedadmm/harness.hpp"
#include "fedadmm/participation.hpp"

namespace py = pybind11;
using namespace fedadmm;

namespace {

ModelKind make_kind(const std::string& model, double reg) {
  if (model == "linreg") return ModelKind::linreg();
  if (model == "logreg") return ModelKind::logreg(reg);
  throw ConfigError("unknown model: " + model);
}

ClientShard make_shard(const Mat& features, const Vec& labels) {
  if (features.rows() != labels.size())
    throw ConfigError("features and labels disagree on the row count");
  return ClientShard{features, labels};
}

py::list shards_out(const FederatedDataset& data) {
  py::list out;
  for (const ClientShard& s : data.shards) out.append(py::make_tuple(s.features, s.labels));
  return out;
}

SelectionPlan make_plan(const std::string& policy, int m, double rho, int s0, int m0,
                        std::uint64_t seed) {
  SelectionPlan plan;
  if (policy == "uniform")
    plan.policy = SelectionPolicy::UniformRho;
  else if (policy == "cover")
    plan.policy = SelectionPolicy::CoverSchedule;
  else if (policy == "straggler")
    plan.policy = SelectionPolicy::Straggler;
  else
    throw ConfigError("unknown policy: " + policy);
  plan.m = m;
  plan.rho = rho;
  plan.s0 = s0;
  plan.m0 = m0;
  plan.seed = seed;
  plan.validate();
  return plan;
}

py::dict run_from_text(const std::string& config_text) {
  RunConfig rc = parse_config_text(config_text);
  validate_config(rc);
  RunResult res = run_experiment(rc);

  py::dict out;
  out["algorithm"] = std::string(algorithm_name(res.algorithm));
  out["status"] = std::string(run_status_name(res.status));
  out["final_k"] = res.final_k;
  out["final_tau"] = res.final_tau;
  out["cr"] = res.cr;
  out["f_final"] = res.f_final;
  out["grad_sq_final"] = res.grad_sq_final;
  out["f_ref"] = res.f_ref;
  out["inner_iters_total"] = res.inner_iters_total;
  out["wall_ms_total"] = res.wall_ms_total;
  out["trace_len"] = py::int_(res.trace.size());
  out["final_x"] = Vec(res.final_x);
  if (res.algorithm == Algorithm::FedADMM) {
    py::dict r;
    r["grad_max"] = res.residuals.grad_max;
    r["consensus_max"] = res.residuals.consensus_max;
    r["dual_sum_norm"] = res.residuals.dual_sum_norm;
    out["residuals"] = r;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "federated consensus solver core";

  py::register_exception<ConfigError>(mod, "ConfigError", PyExc_ValueError);
  py::register_exception<IoError>(mod, "IoError", PyExc_OSError);

  mod.def(
      "generate",
      [](int m, int n, int d_min, int d_max, std::uint64_t seed, bool planted) {
        GenSpec spec;
        spec.m = m;
        spec.n = n;
        spec.d_min = d_min;
        spec.d_max = d_max;
        spec.seed = seed;
        spec.planted = planted;
        return shards_out(generate_linreg(spec));
      },
      py::arg("m"), py::arg("n"), py::arg("d_min") = 50, py::arg("d_max") = 150,
      py::arg("seed") = 0, py::arg("planted") = false,
      "Draw a synthetic least-squares dataset; returns one (features, labels) pair per client.");

  mod.def(
      "load_dataset", [](const std::string& dir) { return shards_out(load_dataset(dir)); },
      py::arg("dir"), "Read a dataset directory written by the generate command.");

  mod.def(
      "local_loss",
      [](const Mat& features, const Vec& labels, const Vec& x, const std::string& model,
         double reg) { return local_loss(make_shard(features, labels), make_kind(model, reg), x); },
      py::arg("features"), py::arg("labels"), py::arg("x"), py::arg("model") = "linreg",
      py::arg("reg") = 0.0);

  mod.def(
      "local_grad",
      [](const Mat& features, const Vec& labels, const Vec& x, const std::string& model,
         double reg) {
        return Vec(local_grad(make_shard(features, labels), make_kind(model, reg), x));
      },
      py::arg("features"), py::arg("labels"), py::arg("x"), py::arg("model") = "linreg",
      py::arg("reg") = 0.0);

  mod.def(
      "lipschitz",
      [](const Mat& features, const Vec& labels, const std::string& model, double reg) {
        return lipschitz_estimate(make_shard(features, labels), make_kind(model, reg));
      },
      py::arg("features"), py::arg("labels"), py::arg("model") = "linreg", py::arg("reg") = 0.0,
      "Certified upper bound on the local gradient Lipschitz constant.");

  mod.def("kappa_bound", &kappa_bound, py::arg("alpha"), py::arg("r"), py::arg("sigma"),
          py::arg("rho"), py::arg("dist_sq"), py::arg("eps"),
          "Inner-loop iteration bound from the geometric contraction argument.");

  mod.def("cr_count", &cr_count, py::arg("k"), py::arg("k0"),
          "Communication rounds consumed by k iterations at aggregation period k0.");

  mod.def("cover_probability", &cover_probability, py::arg("m"), py::arg("s0"), py::arg("sizes"),
          "Chance a fixed client appears at least once across s0 uniform rounds.");

  mod.def(
      "next_omega",
      [](long tau, const std::string& policy, int m, double rho, int s0, int m0,
         std::uint64_t seed) { return next_omega(make_plan(policy, m, rho, s0, m0, seed), tau); },
      py::arg("tau"), py::arg("policy"), py::arg("m"), py::arg("rho") = 0.5, py::arg("s0") = 5,
      py::arg("m0") = 0, py::arg("seed") = 0,
      "Participant set for round tau >= 1; pure in its arguments.");

  mod.def("run_json", &run_from_text, py::arg("config_json"),
          "Run one experiment from a JSON config string and return the summary fields.");
}

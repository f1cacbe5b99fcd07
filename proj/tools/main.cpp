#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "fedadmm/harness.hpp"

namespace {

using fedadmm::RunConfig;

struct Overrides {
  CLI::App* cmd = nullptr;
  std::string config_path, dataset, libsvm_path, dataset_dir, model, algorithm, policy;
  std::string sigma_rule, init_mode, out_dir;
  long seed = 0, k0 = 0, kappa_max = 0, max_iters = 0;
  int m = 0, n = 0, d_min = 0, d_max = 0, s0 = 0, m0 = 0, inner_steps = 0, workers = 0,
      instances = 0;
  double lambda = 0, rho = 0, eps0 = 0, nu = 0, gamma = 0, mu_prox = 0, alpha_mix = 0,
         mu_pers = 0, inner_lr = 0, f_ref = 0, eps_tol = 0;
  bool planted = false;
  std::vector<int> grid_n, grid_m;
  std::vector<double> grid_rho;
  std::vector<long> grid_k0;
  std::vector<std::string> algorithms;
};

void add_common_flags(Overrides& o) {
  CLI::App* c = o.cmd;
  c->add_option("-c,--config", o.config_path, "flat JSON config file");
  c->add_option("--dataset", o.dataset, "synthetic | libsvm | dir");
  c->add_option("--libsvm", o.libsvm_path, "svmlight-style input file");
  c->add_option("--dataset-dir", o.dataset_dir, "exported dataset directory");
  c->add_option("--model", o.model, "linreg | logreg");
  c->add_option("--lambda", o.lambda, "logreg l2 penalty");
  c->add_option("-m", o.m, "client count");
  c->add_option("-n", o.n, "feature dimension");
  c->add_option("--d-min", o.d_min, "smallest shard size");
  c->add_option("--d-max", o.d_max, "largest shard size");
  c->add_flag("--planted", o.planted, "labels from a hidden linear model");
  c->add_option("--seed", o.seed, "run seed");
  c->add_option("-a,--algorithm", o.algorithm, "fedadmm | fedavg | fedprox | fedalt | fedsim");
  c->add_option("--k0", o.k0, "iterations per communication round");
  c->add_option("--policy", o.policy, "uniform | cover | straggler");
  c->add_option("--rho", o.rho, "participation fraction");
  c->add_option("--s0", o.s0, "cover window length");
  c->add_option("--m0", o.m0, "straggler fastest responders kept");
  c->add_option("--sigma-rule", o.sigma_rule, "paper_experiment | theory | explicit");
  c->add_option("--init-mode", o.init_mode, "experiment | algorithm");
  c->add_option("--eps0", o.eps0, "initial inexactness budget (default k0^2)");
  c->add_option("--nu", o.nu, "budget decay in [1/2, 1)");
  c->add_option("--kappa-max", o.kappa_max, "inner iteration cap");
  c->add_option("--gamma", o.gamma, "fedavg step scale");
  c->add_option("--mu-prox", o.mu_prox, "fedprox weight");
  c->add_option("--alpha-mix", o.alpha_mix, "personalization mixing weight");
  c->add_option("--mu-pers", o.mu_pers, "personalization coupling weight");
  c->add_option("--inner-steps", o.inner_steps, "local gradient steps");
  c->add_option("--inner-lr", o.inner_lr, "local step size (default 1/(r+mu))");
  c->add_option("--f-ref", o.f_ref, "gap-rule reference objective");
  c->add_option("--eps-tol", o.eps_tol, "stopping tolerance");
  c->add_option("--max-iters", o.max_iters, "iteration cap");
  c->add_option("-o,--out", o.out_dir, "output directory");
  c->add_option("--workers", o.workers, "worker pool size (default: cores)");
  c->add_option("--instances", o.instances, "instances per sweep cell");
  c->add_option("--grid-n", o.grid_n, "sweep grid over n")->delimiter(',');
  c->add_option("--grid-m", o.grid_m, "sweep grid over m")->delimiter(',');
  c->add_option("--grid-rho", o.grid_rho, "sweep grid over rho")->delimiter(',');
  c->add_option("--grid-k0", o.grid_k0, "sweep grid over k0")->delimiter(',');
  c->add_option("--algorithms", o.algorithms, "algorithms compared in a sweep")->delimiter(',');
}

RunConfig resolve_config(const Overrides& o) {
  RunConfig rc;
  if (!o.config_path.empty()) rc = fedadmm::load_config(o.config_path);

  if (const char* env_out = std::getenv("FEDADMM_OUT"); env_out && *env_out)
    rc.out_dir = env_out;

  const CLI::App* c = o.cmd;
  auto set = [&](const char* flag) { return c->count(flag) > 0; };
  if (set("--dataset")) rc.dataset = o.dataset;
  if (set("--libsvm")) rc.libsvm_path = o.libsvm_path;
  if (set("--dataset-dir")) rc.dataset_dir = o.dataset_dir;
  if (set("--model")) rc.model = o.model;
  if (set("--lambda")) rc.lambda = o.lambda;
  if (set("-m")) rc.m = o.m;
  if (set("-n")) rc.n = o.n;
  if (set("--d-min")) rc.d_min = o.d_min;
  if (set("--d-max")) rc.d_max = o.d_max;
  if (set("--planted")) rc.planted = o.planted;
  if (set("--seed")) {
    if (o.seed < 0) throw fedadmm::ConfigError("seed must be nonnegative");
    rc.seed = std::uint64_t(o.seed);
  }
  if (set("--algorithm")) rc.algorithm = o.algorithm;
  if (set("--k0")) rc.k0 = o.k0;
  if (set("--policy")) rc.policy = o.policy;
  if (set("--rho")) rc.rho = o.rho;
  if (set("--s0")) rc.s0 = o.s0;
  if (set("--m0")) rc.m0 = o.m0;
  if (set("--sigma-rule")) rc.sigma_rule = o.sigma_rule;
  if (set("--init-mode")) rc.init_mode = o.init_mode;
  if (set("--eps0")) rc.eps0 = o.eps0;
  if (set("--nu")) rc.nu = o.nu;
  if (set("--kappa-max")) rc.kappa_max = o.kappa_max;
  if (set("--gamma")) rc.gamma = o.gamma;
  if (set("--mu-prox")) rc.mu_prox = o.mu_prox;
  if (set("--alpha-mix")) rc.alpha_mix = o.alpha_mix;
  if (set("--mu-pers")) rc.mu_pers = o.mu_pers;
  if (set("--inner-steps")) rc.inner_steps = o.inner_steps;
  if (set("--inner-lr")) rc.inner_lr = o.inner_lr;
  if (set("--f-ref")) rc.f_ref = o.f_ref;
  if (set("--eps-tol")) rc.eps_tol = o.eps_tol;
  if (set("--max-iters")) rc.max_iters = o.max_iters;
  if (set("--out")) rc.out_dir = o.out_dir;
  if (set("--workers")) rc.workers = o.workers;
  if (set("--instances")) rc.instances = o.instances;
  if (set("--grid-n")) rc.grid_n = o.grid_n;
  if (set("--grid-m")) rc.grid_m = o.grid_m;
  if (set("--grid-rho")) rc.grid_rho = o.grid_rho;
  if (set("--grid-k0")) rc.grid_k0 = o.grid_k0;
  if (set("--algorithms")) rc.algorithms = o.algorithms;
  fedadmm::validate_config(rc);
  return rc;
}

int cmd_generate(const RunConfig& rc) {
  if (rc.out_dir.empty()) throw fedadmm::ConfigError("generate needs an output directory");
  fedadmm::FederatedDataset data = fedadmm::build_dataset(rc);
  fedadmm::save_dataset(data, rc.out_dir);
  std::cout << "wrote " << data.m() << " shards, " << data.total_rows() << " rows, n=" << data.n
            << " -> " << rc.out_dir << "\n";
  return 0;
}

int cmd_run(const RunConfig& rc) {
  fedadmm::RunResult res = fedadmm::run_experiment(rc);
  std::cout << fedadmm::algorithm_name(res.algorithm) << " " << fedadmm::run_status_name(res.status)
            << " k=" << res.final_k << " tau=" << res.final_tau << " cr=" << res.cr
            << " f=" << fedadmm::g17(res.f_final) << " grad_sq=" << fedadmm::g17(res.grad_sq_final)
            << "\n";
  if (!rc.out_dir.empty()) std::cout << "trace/summary -> " << rc.out_dir << "\n";
  return res.status == fedadmm::RunStatus::IterationCap ? 2 : 0;
}

int cmd_sweep(const RunConfig& rc) {
  auto rows = fedadmm::median_sweep(rc);
  std::cout << "n,m,rho,k0,algorithm,median_cr,median_wall_ms,instances_ok\n";
  for (const auto& r : rows)
    std::cout << r.n << ',' << r.m << ',' << fedadmm::g17(r.rho) << ',' << r.k0 << ','
              << r.algorithm << ',' << fedadmm::g17(r.median_cr) << ','
              << fedadmm::g17(r.median_wall_ms) << ',' << r.instances_ok << '\n';
  if (!rc.out_dir.empty()) std::cout << "summary -> " << rc.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"federated consensus optimization testbed"};
  app.require_subcommand(1);

  Overrides gen, run, sweep;
  gen.cmd = app.add_subcommand("generate", "draw a synthetic dataset and export it");
  run.cmd = app.add_subcommand("run", "run one experiment");
  sweep.cmd = app.add_subcommand("sweep", "grid of experiments, median summaries");
  add_common_flags(gen);
  add_common_flags(run);
  add_common_flags(sweep);

  std::string report_path;
  CLI::App* report = app.add_subcommand("report", "render a stored summary as a text table");
  report->add_option("path", report_path, "summary CSV or JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen.cmd->parsed()) return cmd_generate(resolve_config(gen));
    if (run.cmd->parsed()) return cmd_run(resolve_config(run));
    if (sweep.cmd->parsed()) return cmd_sweep(resolve_config(sweep));
    if (report->parsed()) {
      std::cout << fedadmm::render_report(report_path);
      return 0;
    }
  } catch (const fedadmm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

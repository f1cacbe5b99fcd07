#include "fedadmm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "fedadmm/rng.hpp"

namespace fedadmm {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

double stopping_threshold(const StoppingConfig& cfg, long n, long m, long d) {
  if (n < 1 || m < 1 || d < 1) throw Error("bad problem dimensions");
  return std::min(cfg.grad0_sq / 5.0, 5.0 * cfg.eps_tol * double(n) / (double(m) * double(d)));
}

bool stopping_met(double grad_sq, const StoppingConfig& cfg, long n, long m, long d) {
  return grad_sq < stopping_threshold(cfg, n, m, d);
}

bool baseline_stopping_met(double f_value, double f_ref) {
  return f_value - f_ref <= 2.0 * (1.0 + std::abs(f_ref)) * 1e-4;
}

long cr_count(long k, long k0) {
  if (k < 0 || k0 < 1) throw Error("cr_count needs k >= 0 and k0 >= 1");
  return (2 * k + k0 - 1) / k0;
}

const char* run_status_name(RunStatus s) {
  switch (s) {
    case RunStatus::StoppedByGradient: return "stopped_by_gradient";
    case RunStatus::StoppedByGap: return "stopped_by_gap";
    case RunStatus::IterationCap: return "iteration_cap";
  }
  throw Error("unreachable");
}

double lower_median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  return values[(values.size() - 1) / 2];
}

FederatedDataset build_dataset(const RunConfig& rc) {
  if (rc.dataset == "synthetic") {
    if (rc.model != "linreg")
      throw ConfigError("the synthetic generator produces linreg data; load labels for logreg");
    GenSpec gs;
    gs.m = rc.m;
    gs.n = rc.n;
    gs.d_min = rc.d_min;
    gs.d_max = rc.d_max;
    gs.seed = rc.seed;
    gs.planted = rc.planted;
    return generate_linreg(gs);
  }
  if (rc.dataset == "libsvm") {
    LoadedData ld = load_libsvm(rc.libsvm_path);
    ModelKind kind = rc.model == "linreg" ? ModelKind::linreg() : ModelKind::logreg(rc.lambda);
    return partition(ld.features, ld.labels, rc.m, rc.seed, kind);
  }
  return load_dataset(rc.dataset_dir);
}

namespace {

SelectionPlan make_plan(const RunConfig& rc, int m) {
  SelectionPlan plan;
  plan.m = m;
  plan.seed = rc.seed;
  if (rc.policy == "uniform") {
    plan.policy = SelectionPolicy::UniformRho;
    plan.rho = rc.rho;
  } else if (rc.policy == "cover") {
    plan.policy = SelectionPolicy::CoverSchedule;
    plan.s0 = rc.s0;
  } else {
    plan.policy = SelectionPolicy::Straggler;
    plan.m0 = rc.m0;
  }
  plan.validate();
  return plan;
}

TraceRecord make_record(const StepDiag& d, long inner_total) {
  TraceRecord r;
  r.k = d.k;
  r.tau = d.tau;
  r.cr_cumulative = d.cr;
  r.f_global = d.f_global;
  r.grad_norm_sq = d.grad_norm_sq;
  r.lyapunov = d.lyapunov;
  r.inner_iters_total = inner_total;
  r.wall_ms = d.wall_ms;
  return r;
}

void write_outputs(const RunConfig& rc, const RunResult& out,
                   const std::vector<std::pair<long, std::vector<int>>>& omega_log) {
  if (rc.out_dir.empty()) return;
  fs::create_directories(rc.out_dir);
  const bool admm = out.algorithm == Algorithm::FedADMM;
  write_trace_csv((fs::path(rc.out_dir) / "trace.csv").string(), out.trace,
                  admm ? "" : algorithm_name(out.algorithm));
  write_summary_json((fs::path(rc.out_dir) / "summary.json").string(), out, rc);

  // audit record of the realized selection, one entry per aggregation step
  nlohmann::ordered_json audit;
  audit["schema_version"] = 1;
  audit["policy"] = rc.policy;
  audit["k0"] = rc.k0;
  audit["rounds"] = nlohmann::ordered_json::array();
  for (const auto& [k, clients] : omega_log)
    audit["rounds"].push_back({{"k", k}, {"clients", clients}});
  std::ofstream f(fs::path(rc.out_dir) / "omega.json");
  f << audit.dump(2) << '\n';
}

}  // namespace

RunResult run_on_dataset(const RunConfig& rc, const FederatedDataset& data,
                         std::optional<double> f_ref_override) {
  const int m = data.m();
  const long n = data.n;
  const long d = data.total_rows();
  WeightScheme weights = WeightScheme::uniform(m);
  SelectionPlan plan = make_plan(rc, m);
  RoundClock clock{rc.k0};
  const Algorithm alg = algorithm_from_name(rc.algorithm);

  StoppingConfig stop;
  stop.eps_tol = rc.eps_tol > 0.0
                     ? rc.eps_tol
                     : (data.kind.family == ModelFamily::LinReg ? 1e-3 : 1e-7);
  stop.max_iters = rc.max_iters;
  {
    Vec g0;
    global_loss_grad(data.shards, data.kind, weights, Vec::Zero(n), &g0);
    stop.grad0_sq = g0.squaredNorm();
  }

  RunResult out;
  out.algorithm = alg;
  const bool audit = !rc.out_dir.empty();
  std::vector<std::pair<long, std::vector<int>>> omega_log;
  const auto t0 = std::chrono::steady_clock::now();

  if (alg == Algorithm::FedADMM) {
    EngineConfig ec;
    ec.init = rc.init_mode == "algorithm" ? InitMode::AlgorithmSpec : InitMode::ExperimentSpec;
    if (rc.sigma_rule == "paper_experiment")
      ec.sigma_rule = SigmaRule::PaperExperiment;
    else if (rc.sigma_rule == "theory")
      ec.sigma_rule = SigmaRule::Theory;
    else
      ec.sigma_rule = SigmaRule::Explicit;
    ec.sigma_explicit = rc.sigma_values;
    ec.eps0 = rc.eps0;
    ec.nu = rc.nu;
    ec.inner.kappa_max = rc.kappa_max;

    Engine engine(data, weights, plan, clock, ec);
    std::function<bool(double)> pred = [&](double gsq) {
      return stopping_met(gsq, stop, n, m, d);
    };
    bool stopped = false;
    for (long k = 0; k < stop.max_iters; ++k) {
      StepDiag dg = engine.step(k, &pred);
      out.inner_iters_total += dg.inner_iters;
      out.trace.push_back(make_record(dg, out.inner_iters_total));
      if (audit && dg.aggregated) omega_log.emplace_back(dg.k, engine.omega());
      if (dg.stopped) {
        stopped = true;
        break;
      }
    }
    out.status = stopped ? RunStatus::StoppedByGradient : RunStatus::IterationCap;
    out.final_x = engine.server_x();
    out.f_final = engine.f_global();
    out.grad_sq_final = engine.grad_norm_sq();
    out.cr = engine.cr();
    out.f_ref = out.f_final;
    out.residuals = engine.residuals();
  } else {
    double f_ref;
    if (f_ref_override) {
      f_ref = *f_ref_override;
    } else if (!std::isnan(rc.f_ref)) {
      f_ref = rc.f_ref;
    } else {
      // the gap rule is anchored to the admm result on the same instance
      RunConfig ref = rc;
      ref.algorithm = "fedadmm";
      ref.out_dir.clear();
      f_ref = run_on_dataset(ref, data).f_final;
    }

    FedAvgConfig avg_cfg{rc.gamma};
    FedProxConfig prox_cfg{rc.mu_prox, rc.inner_steps, rc.inner_lr};
    PersonalizationConfig pers_cfg{rc.alpha_mix, rc.mu_pers, rc.inner_steps, rc.inner_lr};
    BaselineEngine engine(alg, data, weights, plan, clock, avg_cfg, prox_cfg, pers_cfg);
    std::function<bool(double)> pred = [&](double f) { return baseline_stopping_met(f, f_ref); };
    bool stopped = false;
    for (long k = 0; k < stop.max_iters; ++k) {
      StepDiag dg = engine.step(k, &pred);
      out.inner_iters_total += dg.inner_iters;
      out.trace.push_back(make_record(dg, out.inner_iters_total));
      if (audit && dg.aggregated) omega_log.emplace_back(dg.k, engine.omega());
      if (dg.stopped) {
        stopped = true;
        break;
      }
    }
    out.status = stopped ? RunStatus::StoppedByGap : RunStatus::IterationCap;
    out.final_x = engine.server_x();
    out.f_final = engine.f_global();
    out.grad_sq_final = engine.grad_norm_sq();
    out.cr = engine.cr();
    out.f_ref = f_ref;
  }

  out.final_k = out.trace.empty() ? -1 : out.trace.back().k;
  out.final_tau = out.trace.empty() ? 0 : out.trace.back().tau;
  out.wall_ms_total =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  write_outputs(rc, out, omega_log);
  return out;
}

RunResult run_experiment(const RunConfig& rc) {
  validate_config(rc);
  FederatedDataset data = build_dataset(rc);
  return run_on_dataset(rc, data);
}

namespace {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a ^ (0x9E3779B97F4A7C15ULL + b);
  return splitmix64(s);
}

struct SweepTask {
  int n, m;
  double rho;
  long k0;
  std::uint64_t seed;
  std::size_t cell;
};

struct TaskResult {
  // per algorithm: ok flag, cr, wall
  std::vector<char> ok;
  std::vector<double> cr, wall;
};

template <class T>
std::vector<T> canonical(std::vector<T> v, T fallback) {
  if (v.empty()) v.push_back(fallback);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

std::vector<SweepRow> median_sweep(const RunConfig& rc) {
  validate_config(rc);
  if (rc.dataset != "synthetic")
    throw ConfigError("sweeps grid the synthetic generator; run single experiments on files");

  const auto ns = canonical(rc.grid_n, rc.n);
  const auto ms = canonical(rc.grid_m, rc.m);
  const auto rhos = canonical(rc.grid_rho, rc.rho);
  const auto k0s = canonical(rc.grid_k0, rc.k0);

  std::vector<std::string> algs;
  for (const auto& a : rc.algorithms.empty() ? std::vector<std::string>{rc.algorithm}
                                             : rc.algorithms)
    if (std::find(algs.begin(), algs.end(), a) == algs.end()) algs.push_back(a);
  for (const auto& a : algs) (void)algorithm_from_name(a);

  std::vector<SweepTask> tasks;
  std::size_t cell = 0;
  for (int n : ns)
    for (int m : ms)
      for (double rho : rhos)
        for (long k0 : k0s) {
          // instance 0 reuses the base seed so a one-cell, one-instance sweep
          // reproduces the plain run; instances share seeds across cells,
          // pairing the comparison on identical datasets
          for (int j = 0; j < rc.instances; ++j) {
            std::uint64_t h = j == 0 ? rc.seed : mix_seed(rc.seed, std::uint64_t(j));
            tasks.push_back({n, m, rho, k0, h, cell});
          }
          ++cell;
        }
  const std::size_t n_cells = cell;
  std::vector<TaskResult> results(tasks.size());

  auto run_task = [&](std::size_t t) {
    const SweepTask& task = tasks[t];
    TaskResult& res = results[t];
    res.ok.assign(algs.size(), 0);
    res.cr.assign(algs.size(), 0.0);
    res.wall.assign(algs.size(), 0.0);

    RunConfig sub = rc;
    sub.n = task.n;
    sub.m = task.m;
    sub.rho = task.rho;
    sub.k0 = task.k0;
    sub.seed = task.seed;
    sub.out_dir.clear();
    sub.grid_n.clear();
    sub.grid_m.clear();
    sub.grid_rho.clear();
    sub.grid_k0.clear();

    FederatedDataset data;
    RunResult admm;
    bool admm_ok = false;
    try {
      data = build_dataset(sub);
      sub.algorithm = "fedadmm";
      admm = run_on_dataset(sub, data);
      admm_ok = admm.status == RunStatus::StoppedByGradient;
    } catch (const std::exception&) {
      return;  // instance failed outright, every algorithm stays not-ok
    }

    for (std::size_t a = 0; a < algs.size(); ++a) {
      if (algs[a] == "fedadmm") {
        if (admm_ok) {
          res.ok[a] = 1;
          res.cr[a] = double(admm.cr);
          res.wall[a] = admm.wall_ms_total;
        }
        continue;
      }
      try {
        sub.algorithm = algs[a];
        RunResult r = run_on_dataset(sub, data, admm.f_final);
        if (r.status == RunStatus::StoppedByGap) {
          res.ok[a] = 1;
          res.cr[a] = double(r.cr);
          res.wall[a] = r.wall_ms_total;
        }
      } catch (const std::exception&) {
        // recorded as not-ok, the cell is reported partial
      }
    }
  };

  int workers = rc.workers > 0 ? rc.workers : int(std::thread::hardware_concurrency());
  workers = std::max(1, std::min<int>(workers, int(tasks.size())));
  if (workers == 1) {
    for (std::size_t t = 0; t < tasks.size(); ++t) run_task(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (;;) {
          std::size_t t = next.fetch_add(1);
          if (t >= tasks.size()) break;
          run_task(t);
        }
      });
    for (auto& th : pool) th.join();
  }

  // reduce in canonical cell order, one row per algorithm
  std::vector<SweepRow> rows;
  rows.reserve(n_cells * algs.size());
  cell = 0;
  for (int n : ns)
    for (int m : ms)
      for (double rho : rhos)
        for (long k0 : k0s) {
          for (std::size_t a = 0; a < algs.size(); ++a) {
            std::vector<double> crs, walls;
            for (std::size_t t = 0; t < tasks.size(); ++t) {
              if (tasks[t].cell != cell || !results[t].ok[a]) continue;
              crs.push_back(results[t].cr[a]);
              walls.push_back(results[t].wall[a]);
            }
            SweepRow row;
            row.n = n;
            row.m = m;
            row.rho = rho;
            row.k0 = k0;
            row.algorithm = algs[a];
            row.median_cr = lower_median(crs);
            row.median_wall_ms = lower_median(walls);
            row.instances_ok = int(crs.size());
            rows.push_back(std::move(row));
          }
          ++cell;
        }

  if (!rc.out_dir.empty()) {
    fs::create_directories(rc.out_dir);
    write_sweep_csv((fs::path(rc.out_dir) / "sweep_summary.csv").string(), rows);
    write_sweep_json((fs::path(rc.out_dir) / "sweep_summary.json").string(), rows);
  }
  return rows;
}

void write_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace,
                     const std::string& algorithm) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "k,tau,cr_cumulative,f_global,grad_norm_sq,lyapunov,inner_iters_total,wall_ms";
  if (!algorithm.empty()) out << ",algorithm";
  out << '\n';
  char wall[32];
  for (const auto& r : trace) {
    std::snprintf(wall, sizeof(wall), "%.3f", r.wall_ms);
    out << r.k << ',' << r.tau << ',' << r.cr_cumulative << ',' << g17(r.f_global) << ','
        << g17(r.grad_norm_sq) << ',' << g17(r.lyapunov) << ',' << r.inner_iters_total << ','
        << wall;
    if (!algorithm.empty()) out << ',' << algorithm;
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

void write_summary_json(const std::string& path, const RunResult& res, const RunConfig& rc) {
  ordered_json doc;
  doc["schema_version"] = 1;
  doc["algorithm"] = algorithm_name(res.algorithm);
  doc["status"] = run_status_name(res.status);
  doc["final_k"] = res.final_k;
  doc["final_tau"] = res.final_tau;
  doc["cr"] = res.cr;
  doc["f_final"] = res.f_final;
  doc["grad_sq_final"] = res.grad_sq_final;
  doc["f_ref"] = res.f_ref;
  doc["inner_iters_total"] = res.inner_iters_total;
  doc["wall_ms_total"] = res.wall_ms_total;
  if (res.algorithm == Algorithm::FedADMM) {
    doc["residual_grad_max"] = res.residuals.grad_max;
    doc["residual_consensus_max"] = res.residuals.consensus_max;
    doc["residual_dual_sum"] = res.residuals.dual_sum_norm;
  }
  doc["final_x"] = std::vector<double>(res.final_x.data(), res.final_x.data() + res.final_x.size());
  doc["config"] = ordered_json::parse(config_to_json(rc));
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "n,m,rho,k0,algorithm,median_cr,median_wall_ms,instances_ok\n";
  for (const auto& r : rows)
    out << r.n << ',' << r.m << ',' << g17(r.rho) << ',' << r.k0 << ',' << r.algorithm << ','
        << g17(r.median_cr) << ',' << g17(r.median_wall_ms) << ',' << r.instances_ok << '\n';
  if (!out) throw IoError("write failed: " + path);
}

void write_sweep_json(const std::string& path, const std::vector<SweepRow>& rows) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json row;
    row["n"] = r.n;
    row["m"] = r.m;
    row["rho"] = r.rho;
    row["k0"] = r.k0;
    row["algorithm"] = r.algorithm;
    row["median_cr"] = r.median_cr;
    row["median_wall_ms"] = r.median_wall_ms;
    row["instances_ok"] = r.instances_ok;
    arr.push_back(std::move(row));
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << arr.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

std::string render_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream out;

  if (path.size() > 5 && path.substr(path.size() - 5) == ".json") {
    ordered_json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw IoError(path + ": " + e.what());
    }
    if (doc.is_array()) {
      for (const auto& row : doc) {
        for (auto it = row.begin(); it != row.end(); ++it)
          out << it.key() << '=' << it.value().dump() << ' ';
        out << '\n';
      }
      return out.str();
    }
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      if (it.key() == "config" || it.key() == "final_x") continue;
      out << "  " << it.key() << ": " << it.value().dump() << '\n';
    }
    return out.str();
  }

  // CSV: pad every column to its widest entry
  std::vector<std::vector<std::string>> table;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> row;
    std::size_t start = 0;
    for (;;) {
      std::size_t comma = line.find(',', start);
      row.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    table.push_back(std::move(row));
  }
  if (table.empty()) return "";
  std::vector<std::size_t> width;
  for (const auto& row : table) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  for (const auto& row : table) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << row[c];
      if (c + 1 < row.size()) out << std::string(width[c] - row[c].size() + 2, ' ');
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace fedadmm

#include "dcsmooth/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "dcsmooth/check.hpp"

namespace dcsmooth {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

bool prepare_dir(const std::string& dir, std::ostream& err) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    err << "error: cannot create output directory '" << dir << "': " << ec.message() << "\n";
    return false;
  }
  return true;
}

template <class Writer>
bool write_file(const fs::path& path, std::ostream& err, Writer&& writer) {
  std::ofstream os(path);
  if (!os) {
    err << "error: cannot open '" << path.string() << "' for writing\n";
    return false;
  }
  writer(os);
  os.flush();
  if (!os) {
    err << "error: write to '" << path.string() << "' failed\n";
    return false;
  }
  return true;
}

bool write_json(const fs::path& path, const ordered_json& j, std::ostream& err) {
  return write_file(path, err, [&](std::ostream& os) { os << j.dump(2) << "\n"; });
}

std::string fmt_g(double v, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

int resolve_threads(std::optional<int> flag, const char* env, int config_threads) {
  if (flag) {
    if (*flag < 1) throw ConfigError("--threads", "must be at least 1");
    return *flag;
  }
  if (env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1 || v > 4096) {
      throw ConfigError("DCSMOOTH_THREADS", "expected a positive integer, got '" +
                                                std::string(env) + "'");
    }
    return static_cast<int>(v);
  }
  if (config_threads > 0) return config_threads;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const DcPenalty penalty = cfg.penalty.build();
  std::optional<PhaseRetrievalInstance> inst;
  std::optional<CompositeProblem> prob;
  Vector x1;
  if (cfg.problem.type == "identity") {
    const auto dim = static_cast<Eigen::Index>(cfg.problem.x1.size());
    x1 = Eigen::Map<const Vector>(cfg.problem.x1.data(), dim);
    prob.emplace(SmoothTerm::zero(), SmoothMap::identity(), penalty, dim, dim);
  } else {
    const ProblemConfig& p = cfg.problem;
    inst = generate_instance(p.d, p.n, p.n_outliers, p.omega, cfg.seed);
    prob.emplace(make_problem(*inst, penalty));
    x1 = p.x1.empty() ? initial_point(cfg.seed, p.d)
                      : Vector(Eigen::Map<const Vector>(p.x1.data(), p.d));
  }
  MuSchedule sched = cfg.solver.schedule;
  sched.cap = prob->mu_cap();

  if (!prepare_dir(cfg.out, err)) return kExitFailure;
  const fs::path dir(cfg.out);
  if (!write_json(dir / "effective_config.json", to_json(cfg), err)) return kExitFailure;

  ordered_json result;
  result["penalty"] = cfg.penalty.id();
  result["problem"] = cfg.problem.type;
  SolveResult res;
  try {
    res = solve(*prob, x1, sched, cfg.solver.backtracking, cfg.solver.stop);
  } catch (const LineSearchFailure& e) {
    result["reason"] = "LineSearchFailure";
    result["iteration"] = e.iteration();
    result["message"] = e.what();
    write_json(dir / "result.json", result, err);
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const NumericalFailure& e) {
    result["reason"] = "NumericalFailure";
    result["iteration"] = e.iteration();
    result["message"] = e.what();
    write_json(dir / "result.json", result, err);
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }

  result["reason"] = to_string(res.reason);
  result["iters"] = res.iterations;
  result["grad_norm"] = res.grad_norm;
  result["min_grad_norm"] = res.min_grad_norm;
  result["mu_final"] = mu_at(sched, res.iterations);
  result["mu_sum"] = res.mu_sum;
  result["objective"] = objective_value(*prob, res.x);
  result["wall_time_sec"] = res.wall_time_sec;
  if (inst) result["relative_error"] = relative_error(res.x, inst->x_star);
  result["x_final"] = std::vector<double>(res.x.data(), res.x.data() + res.x.size());

  const bool ok =
      write_file(dir / "trace.csv", err, [&](std::ostream& os) { write_trace_csv(os, res.trace); }) &&
      write_json(dir / "result.json", result, err);
  if (!ok) return kExitFailure;

  out << to_string(res.reason) << " after " << res.iterations << " iterations, |grad| = "
      << fmt_g(res.grad_norm);
  if (inst) out << ", relative error = " << fmt_g(relative_error(res.x, inst->x_star));
  out << "\n";
  return res.reason == Termination::GradTol ? kExitOk : kExitMaxIters;
}

int cmd_experiment(const RunConfig& cfg, int threads, std::ostream& out, std::ostream& err) {
  const ExperimentSpec spec = effective_experiment(cfg);
  if (!prepare_dir(cfg.out, err)) return kExitFailure;
  const fs::path dir(cfg.out);
  RunConfig effective = cfg;
  effective.mode = "experiment";
  if (!write_json(dir / "effective_config.json", to_json(effective), err)) return kExitFailure;

  const ExperimentResult res = run_experiment(spec, threads);

  const bool ok =
      write_file(dir / "results.csv", err,
                 [&](std::ostream& os) { write_results_csv(os, res.outcomes); }) &&
      write_file(dir / "summary.csv", err,
                 [&](std::ostream& os) { write_summary_csv(os, res.summary); });
  if (!ok) return kExitFailure;

  char line[160];
  std::snprintf(line, sizeof line, "%-24s %8s %9s %10s %10s %8s\n", "penalty", "omega",
                "success%", "time_all", "time_succ", "failed");
  out << line;
  for (const SummaryRow& r : res.summary) {
    std::snprintf(line, sizeof line, "%-24s %8g %9.1f %10.3f %10s %8d\n", r.penalty.c_str(),
                  r.omega, r.success_rate_pct, r.mean_time_all_sec,
                  std::isnan(r.mean_time_success_sec) ? "-"
                                                      : fmt_g(r.mean_time_success_sec, "%.3f").c_str(),
                  r.failures);
    out << line;
  }
  return kExitOk;
}

int cmd_check(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  CheckOptions opt;
  opt.seed = cfg.seed;
  opt.samples = cfg.check.samples;
  opt.grad_instances = std::max(1, cfg.check.samples / 10);
  opt.fd_step = cfg.check.fd_step;
  opt.corrupt_prox = cfg.check.corrupt_prox;
  opt.penalty = cfg.penalty;
  opt.solver = cfg.solver;

  if (fd_threshold_scale(opt.fd_step) > 1.0) {
    out << "note: fd_step " << fmt_g(opt.fd_step) << " scales gradient thresholds by "
        << fmt_g(fd_threshold_scale(opt.fd_step)) << "\n";
  }
  bool all = true;
  for (const SuiteReport& r : run_all_checks(opt)) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.cases << " cases, worst "
        << fmt_g(r.worst) << ", bound " << fmt_g(r.threshold) << ")\n";
    if (!r.passed) {
      out << "  counterexample: " << r.counterexample << "\n";
      all = false;
    }
  }
  return all ? kExitOk : kExitCheckFailed;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Variable smoothing solver for DC composite problems"};
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> mode;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "base seed");
  app.add_option("--threads", threads, "worker threads for experiment mode");
  app.add_option("--mode", mode, "what to run")
      ->check(CLI::IsMember({"solve", "experiment", "check"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  RunConfig cfg;
  int nthreads = 1;
  try {
    cfg = config_path.empty() ? default_config() : load_config(config_path);
    if (mode) cfg.mode = *mode;
    if (seed) cfg.seed = *seed;
    if (out_dir) cfg.out = *out_dir;
    nthreads = resolve_threads(threads, std::getenv("DCSMOOTH_THREADS"), cfg.threads);
    cfg.threads = nthreads;
    validate_config(cfg);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (cfg.mode == "solve") return cmd_solve(cfg, out, err);
    if (cfg.mode == "experiment") return cmd_experiment(cfg, nthreads, out, err);
    return cmd_check(cfg, out, err);
  } catch (const ParameterError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace dcsmooth

#include <fstream>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "dcsmooth/cli.hpp"
#include "helpers.hpp"

using namespace dcsmooth;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "dcsmooth");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string write_config(const fs::path& dir, const json& j) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config_error(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

// Drops the time_sec column (8th) of a results file.
std::string strip_times(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, result;
  while (std::getline(in, line)) {
    std::vector<std::string> cols;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cols.push_back(c);
    if (cols.size() > 7) cols.erase(cols.begin() + 7);
    for (std::size_t i = 0; i < cols.size(); ++i) result += (i ? "," : "") + cols[i];
    result += "\n";
  }
  return result;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("defaults") {
  const RunConfig cfg = parse_config(json::object());
  CHECK(cfg.mode == "solve");
  CHECK(cfg.solver.schedule.mu1 == 1.0);
  CHECK(cfg.solver.schedule.alpha == 3.0);
  CHECK(cfg.solver.backtracking.rho == 0.8);
  CHECK(cfg.solver.backtracking.c == 1e-4);
  CHECK(cfg.solver.backtracking.max_halvings == 200);
  CHECK(cfg.solver.stop.grad_tol == 1e-3);
  CHECK(cfg.solver.stop.max_iters == 10000);
  CHECK(cfg.experiment.d == 50);
  CHECK(cfg.experiment.n == 200);
  CHECK(cfg.experiment.trials == 50);
  CHECK(cfg.experiment.omegas == std::vector<double>{10, 1000, 3000, 5000, 10000});
  CHECK(cfg.experiment.penalties.size() == 6);
  CHECK(cfg.experiment.penalties.size() * cfg.experiment.omegas.size() == 30);
  CHECK(cfg.check.fd_step == 1e-6);
}

TEST_CASE("config errors name the field") {
  CHECK(config_error({{"backtracking", {{"rho", 1.5}}}}) == "backtracking.rho: rho must lie in (0,1)");
  CHECK(config_error({{"stop", {{"max_iter", 5}}}}) == "stop.max_iter: unknown key");
  CHECK(config_error({{"bogus", 1}}) == "bogus: unknown key");
  CHECK(config_error({{"penalty", {{"kind", "l1"}, {"beta", 3}}}}) == "penalty.beta: unknown key");
  const std::string mcp = config_error(
      {{"penalty", {{"kind", "mcp"}, {"lambda", 1}, {"beta", 1}}}, {"schedule", {{"mu1", 1}}}});
  CHECK(mcp.rfind("schedule.mu1: ", 0) == 0);
  CHECK(config_error({{"experiment", {{"penalties", {{{"kind", "trimmed_l1"}, {"K", 200}}}}}}}) ==
        "experiment.penalties[0].K: K = 200 must be at most n - 1 = 199");
  CHECK(config_error({{"stop", {{"grad_tol", "small"}}}}).rfind("stop.grad_tol: ", 0) == 0);
  CHECK(config_error({{"mode", "train"}}).rfind("mode: ", 0) == 0);
}

TEST_CASE("identity problem defaults x1") {
  const RunConfig cfg = parse_config({{"problem", {{"type", "identity"}}}});
  CHECK(cfg.problem.x1 == std::vector<double>{5.0});
}

TEST_CASE("effective config round trip") {
  const json in = {{"seed", 9},
                   {"penalty", {{"kind", "mcp"}, {"lambda", 2}, {"beta", 500}}},
                   {"experiment", {{"trials", 4}, {"omegas", {10}}}},
                   {"stop", {{"max_iters", 77}}}};
  const RunConfig a = parse_config(in);
  const RunConfig b = parse_config(json::parse(to_json(a).dump()));
  CHECK(to_json(a).dump() == to_json(b).dump());
  CHECK(b.seed == 9);
  CHECK(b.penalty.id() == "mcp_lambda2_beta500");
  CHECK(b.solver.stop.max_iters == 77);
  const ExperimentSpec e = effective_experiment(b);
  CHECK(e.base_seed == 9);
  CHECK(e.solver.stop.max_iters == 77);
  CHECK(e.trials == 4);
}

TEST_CASE("thread count precedence") {
  CHECK(resolve_threads(3, "5", 2) == 3);
  CHECK(resolve_threads(std::nullopt, "5", 2) == 5);
  CHECK(resolve_threads(std::nullopt, nullptr, 2) == 2);
  CHECK(resolve_threads(std::nullopt, "", 2) == 2);
  CHECK(resolve_threads(std::nullopt, nullptr, 0) >= 1);
  CHECK_THROWS_AS(resolve_threads(std::nullopt, "many", 2), ConfigError);
  CHECK_THROWS_AS(resolve_threads(0, nullptr, 2), ConfigError);
}

TEST_CASE("solve mode writes its outputs") {
  const fs::path dir = testutil::scratch_dir("cli_solve");
  const std::string cfg = write_config(dir, {{"problem", {{"type", "identity"}, {"x1", {5, -3}}}}});
  const CliRun r = run({"--config", cfg, "--out", (dir / "out").string()});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("GradTol") != std::string::npos);
  const json res = json::parse(slurp(dir / "out" / "result.json"));
  CHECK(res["reason"] == "GradTol");
  CHECK(res["x_final"].size() == 2);
  CHECK(slurp(dir / "out" / "trace.csv").rfind("k,mu,gamma,grad_norm", 0) == 0);
  const json eff = json::parse(slurp(dir / "out" / "effective_config.json"));
  CHECK(eff["problem"]["type"] == "identity");
}

TEST_CASE("solve mode exit code on MaxIters") {
  const fs::path dir = testutil::scratch_dir("cli_maxiters");
  const std::string cfg = write_config(
      dir, {{"problem", {{"type", "identity"}, {"x1", {500}}}}, {"stop", {{"max_iters", 3}}}});
  const CliRun r = run({"--config", cfg, "--out", (dir / "out").string()});
  CHECK(r.code == kExitMaxIters);
  CHECK(json::parse(slurp(dir / "out" / "result.json"))["iters"] == 3);
}

TEST_CASE("phase retrieval solve reports the relative error") {
  const fs::path dir = testutil::scratch_dir("cli_pr");
  const std::string cfg = write_config(
      dir, {{"problem", {{"d", 5}, {"n", 30}, {"n_outliers", 2}}}, {"stop", {{"max_iters", 50}}}});
  const CliRun r = run({"--config", cfg, "--out", (dir / "out").string(), "--seed", "3"});
  CHECK((r.code == kExitOk || r.code == kExitMaxIters));
  const json res = json::parse(slurp(dir / "out" / "result.json"));
  CHECK(res.contains("relative_error"));
  CHECK(res["problem"] == "phase_retrieval");
}

TEST_CASE("configuration errors exit 64") {
  const fs::path dir = testutil::scratch_dir("cli_bad");
  const std::string cfg = write_config(dir, {{"backtracking", {{"rho", 1.5}}}});
  const CliRun r = run({"--config", cfg});
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("backtracking.rho") != std::string::npos);
  CHECK(run({"--config", (dir / "missing.json").string()}).code == kExitConfig);
  CHECK(run({"--mode", "train"}).code == kExitConfig);
  CHECK(run({"--threads", "0", "--mode", "check"}).code == kExitConfig);
  CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("check mode") {
  const fs::path dir = testutil::scratch_dir("cli_check");
  const std::string good = write_config(dir, {{"check", {{"samples", 20}}}});
  const CliRun ok = run({"--config", good, "--mode", "check"});
  CHECK(ok.code == kExitOk);
  CHECK(ok.out.find("PASS prox_vs_oracle") != std::string::npos);
  CHECK(ok.out.find("FAIL") == std::string::npos);

  const std::string bad =
      write_config(dir, {{"check", {{"samples", 20}, {"corrupt_prox", true}}}});
  const CliRun fail = run({"--config", bad, "--mode", "check"});
  CHECK(fail.code == kExitCheckFailed);
  CHECK(fail.out.find("FAIL prox_vs_oracle") != std::string::npos);
  CHECK(fail.out.find("counterexample:") != std::string::npos);

  const std::string coarse = write_config(dir, {{"check", {{"samples", 20}, {"fd_step", 1e-4}}}});
  const CliRun note = run({"--config", coarse, "--mode", "check"});
  CHECK(note.out.find("note: fd_step 0.0001 scales gradient thresholds by 10000") !=
        std::string::npos);
}

TEST_CASE("small experiment is reproducible") {
  const fs::path dir = testutil::scratch_dir("cli_experiment");
  const json j = {{"mode", "experiment"},
                  {"stop", {{"max_iters", 200}}},
                  {"experiment",
                   {{"d", 5}, {"n", 30}, {"n_outliers", 2}, {"omegas", {10}}, {"trials", 3},
                    {"penalties", {{{"kind", "l1"}}}}}}};
  const std::string cfg = write_config(dir, j);
  const CliRun a = run({"--config", cfg, "--out", (dir / "a").string(), "--threads", "1"});
  const CliRun b = run({"--config", cfg, "--out", (dir / "b").string(), "--threads", "2"});
  CHECK(a.code == kExitOk);
  CHECK(b.code == kExitOk);
  const std::string summary = slurp(dir / "a" / "summary.csv");
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 2);
  CHECK(strip_times(slurp(dir / "a" / "results.csv")) == strip_times(slurp(dir / "b" / "results.csv")));
  CHECK(std::count(a.out.begin(), a.out.end(), '\n') == 2);
}

}  // TEST_SUITE

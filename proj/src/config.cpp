#include "dcsmooth/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace dcsmooth {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

// View of one JSON object that remembers which keys were read, so leftovers
// can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    require(j_.is_object(), path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json* find(const std::string& key) {
    auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    seen_.insert(key);
    return &*it;
  }

  void read(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      require(v->is_number(), field(key), "expected a number");
      out = v->get<double>();
      require(std::isfinite(out), field(key), "must be finite");
    }
  }

  void read(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      require(v->is_number_integer(), field(key), "expected an integer");
      const auto x = v->get<long long>();
      require(x >= std::numeric_limits<int>::min() && x <= std::numeric_limits<int>::max(),
              field(key), "integer out of range");
      out = static_cast<int>(x);
    }
  }

  void read(const std::string& key, long& out) {
    if (const json* v = find(key)) {
      require(v->is_number_integer(), field(key), "expected an integer");
      out = static_cast<long>(v->get<long long>());
    }
  }

  void read(const std::string& key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      require(v->is_number_unsigned() || (v->is_number_integer() && v->get<long long>() >= 0),
              field(key), "expected a nonnegative integer");
      out = v->get<std::uint64_t>();
    }
  }

  void read(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      require(v->is_boolean(), field(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void read(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      require(v->is_string(), field(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void read(const std::string& key, std::vector<double>& out) {
    if (const json* v = find(key)) {
      require(v->is_array(), field(key), "expected an array of numbers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        const json& e = (*v)[i];
        const std::string f = field(key) + "[" + std::to_string(i) + "]";
        require(e.is_number(), f, "expected a number");
        out.push_back(e.get<double>());
        require(std::isfinite(out.back()), f, "must be finite");
      }
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(field(it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

PenaltyConfig parse_penalty(const json& j, const std::string& path) {
  Section s(j, path);
  PenaltyConfig p{"l1", 0, 0, 0};
  s.read("kind", p.kind);
  if (p.kind == "mcp") {
    p.lambda = 1.0;
    p.beta = 2000.0;
    s.read("lambda", p.lambda);
    s.read("beta", p.beta);
    require(p.lambda > 0.0, s.field("lambda"), "lambda must be positive");
    require(p.beta > 0.0, s.field("beta"), "beta must be positive");
  } else if (p.kind == "capped_l1") {
    p.beta = 1000.0;
    s.read("beta", p.beta);
    require(p.beta > 0.0, s.field("beta"), "beta must be positive");
  } else if (p.kind == "trimmed_l1") {
    p.k = 5;
    s.read("K", p.k);
    require(p.k >= 0, s.field("K"), "K must be nonnegative");
  } else {
    require(p.kind == "l1", s.field("kind"),
            "unknown penalty '" + p.kind + "' (expected l1, mcp, capped_l1 or trimmed_l1)");
  }
  s.finish();
  return p;
}

ordered_json penalty_json(const PenaltyConfig& p) {
  ordered_json j;
  j["kind"] = p.kind;
  if (p.kind == "mcp") {
    j["lambda"] = p.lambda;
    j["beta"] = p.beta;
  } else if (p.kind == "capped_l1") {
    j["beta"] = p.beta;
  } else if (p.kind == "trimmed_l1") {
    j["K"] = p.k;
  }
  return j;
}

// mu1 within 1/(2 eta) and K within dim - 1 for one penalty.
void check_penalty_fit(const PenaltyConfig& p, const std::string& path, long dim,
                       const MuSchedule& sched) {
  if (p.kind == "mcp") {
    require(sched.mu1 <= 0.5 * p.beta, "schedule.mu1",
            "mu1 = " + num(sched.mu1) + " exceeds 1/(2 eta) = beta/2 = " + num(0.5 * p.beta) +
                " for " + path);
  }
  if (p.kind == "trimmed_l1") {
    require(p.k <= dim - 1, path + ".K",
            "K = " + std::to_string(p.k) + " must be at most n - 1 = " + std::to_string(dim - 1));
  }
}

}  // namespace

RunConfig default_config() {
  RunConfig cfg;
  cfg.experiment.penalties = ExperimentSpec::reference_penalties();
  return cfg;
}

RunConfig parse_config(const json& doc) {
  RunConfig cfg = default_config();
  Section root(doc, "");
  root.read("mode", cfg.mode);
  root.read("seed", cfg.seed);
  root.read("threads", cfg.threads);
  root.read("out", cfg.out);

  if (const json* j = root.find("penalty")) cfg.penalty = parse_penalty(*j, "penalty");

  bool x1_given = false;
  if (const json* j = root.find("problem")) {
    Section s(*j, "problem");
    ProblemConfig& p = cfg.problem;
    s.read("type", p.type);
    x1_given = s.find("x1") != nullptr;
    s.read("x1", p.x1);
    s.read("d", p.d);
    s.read("n", p.n);
    s.read("n_outliers", p.n_outliers);
    s.read("omega", p.omega);
    s.finish();
  }
  if (cfg.problem.type == "identity" && !x1_given) cfg.problem.x1 = {5.0};

  if (const json* j = root.find("schedule")) {
    Section s(*j, "schedule");
    s.read("mu1", cfg.solver.schedule.mu1);
    s.read("alpha", cfg.solver.schedule.alpha);
    s.finish();
  }
  if (const json* j = root.find("backtracking")) {
    Section s(*j, "backtracking");
    BacktrackingParams& b = cfg.solver.backtracking;
    s.read("gamma_initial", b.gamma_initial);
    s.read("rho", b.rho);
    s.read("c", b.c);
    s.read("max_halvings", b.max_halvings);
    s.finish();
  }
  if (const json* j = root.find("stop")) {
    Section s(*j, "stop");
    s.read("grad_tol", cfg.solver.stop.grad_tol);
    s.read("max_iters", cfg.solver.stop.max_iters);
    s.finish();
  }
  if (const json* j = root.find("experiment")) {
    Section s(*j, "experiment");
    ExperimentSpec& e = cfg.experiment;
    s.read("d", e.d);
    s.read("n", e.n);
    s.read("n_outliers", e.n_outliers);
    s.read("omegas", e.omegas);
    s.read("trials", e.trials);
    if (const json* list = s.find("penalties")) {
      require(list->is_array(), "experiment.penalties", "expected an array of penalty objects");
      e.penalties.clear();
      for (std::size_t i = 0; i < list->size(); ++i) {
        e.penalties.push_back(
            parse_penalty((*list)[i], "experiment.penalties[" + std::to_string(i) + "]"));
      }
    }
    s.finish();
  }
  if (const json* j = root.find("check")) {
    Section s(*j, "check");
    s.read("samples", cfg.check.samples);
    s.read("fd_step", cfg.check.fd_step);
    s.read("corrupt_prox", cfg.check.corrupt_prox);
    s.finish();
  }
  root.finish();
  validate_config(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("--config", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

void validate_config(const RunConfig& cfg) {
  require(cfg.mode == "solve" || cfg.mode == "experiment" || cfg.mode == "check", "mode",
          "expected solve, experiment or check");
  require(cfg.threads >= 0, "threads", "must be nonnegative");
  require(!cfg.out.empty(), "out", "must not be empty");

  const MuSchedule& sc = cfg.solver.schedule;
  require(sc.mu1 > 0.0, "schedule.mu1", "mu1 must be positive");
  require(sc.alpha >= 1.0, "schedule.alpha", "alpha must be at least 1");
  const BacktrackingParams& bt = cfg.solver.backtracking;
  require(bt.gamma_initial > 0.0, "backtracking.gamma_initial", "gamma_initial must be positive");
  require(bt.rho > 0.0 && bt.rho < 1.0, "backtracking.rho", "rho must lie in (0,1)");
  require(bt.c > 0.0 && bt.c < 1.0, "backtracking.c", "c must lie in (0,1)");
  require(bt.max_halvings >= 1, "backtracking.max_halvings", "max_halvings must be positive");
  require(cfg.solver.stop.grad_tol > 0.0, "stop.grad_tol", "grad_tol must be positive");
  require(cfg.solver.stop.max_iters >= 1, "stop.max_iters", "max_iters must be at least 1");

  const ProblemConfig& p = cfg.problem;
  long dim = 0;
  if (p.type == "identity") {
    require(!p.x1.empty(), "problem.x1", "identity problem needs a nonempty x1");
    dim = static_cast<long>(p.x1.size());
  } else {
    require(p.type == "phase_retrieval", "problem.type", "expected phase_retrieval or identity");
    require(p.d >= 1, "problem.d", "d must be positive");
    require(p.n >= 1, "problem.n", "n must be positive");
    require(p.n_outliers >= 0 && p.n_outliers <= p.n, "problem.n_outliers",
            "n_outliers must lie in [0, n]");
    require(p.omega > 0.0, "problem.omega", "omega must be positive");
    require(p.x1.empty() || static_cast<int>(p.x1.size()) == p.d, "problem.x1",
            "x1 must have d entries or be empty");
    dim = p.n;
  }
  check_penalty_fit(cfg.penalty, "penalty", dim, sc);

  const ExperimentSpec& e = cfg.experiment;
  require(e.d >= 1, "experiment.d", "d must be positive");
  require(e.n >= 1, "experiment.n", "n must be positive");
  require(e.n_outliers >= 0 && e.n_outliers <= e.n, "experiment.n_outliers",
          "n_outliers must lie in [0, n]");
  require(e.trials >= 1, "experiment.trials", "trials must be at least 1");
  require(!e.omegas.empty(), "experiment.omegas", "must not be empty");
  for (std::size_t i = 0; i < e.omegas.size(); ++i) {
    require(e.omegas[i] > 0.0, "experiment.omegas[" + std::to_string(i) + "]",
            "omega must be positive");
  }
  require(!e.penalties.empty(), "experiment.penalties", "must not be empty");
  for (std::size_t i = 0; i < e.penalties.size(); ++i) {
    check_penalty_fit(e.penalties[i], "experiment.penalties[" + std::to_string(i) + "]", e.n, sc);
  }

  require(cfg.check.samples >= 1, "check.samples", "samples must be positive");
  require(cfg.check.fd_step > 0.0, "check.fd_step", "fd_step must be positive");
}

ordered_json to_json(const RunConfig& cfg) {
  ordered_json j;
  j["mode"] = cfg.mode;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["out"] = cfg.out;
  j["penalty"] = penalty_json(cfg.penalty);

  ordered_json p;
  p["type"] = cfg.problem.type;
  p["x1"] = cfg.problem.x1;
  p["d"] = cfg.problem.d;
  p["n"] = cfg.problem.n;
  p["n_outliers"] = cfg.problem.n_outliers;
  p["omega"] = cfg.problem.omega;
  j["problem"] = p;

  j["schedule"] = {{"mu1", cfg.solver.schedule.mu1}, {"alpha", cfg.solver.schedule.alpha}};
  const BacktrackingParams& b = cfg.solver.backtracking;
  j["backtracking"] = {{"gamma_initial", b.gamma_initial},
                       {"rho", b.rho},
                       {"c", b.c},
                       {"max_halvings", b.max_halvings}};
  j["stop"] = {{"grad_tol", cfg.solver.stop.grad_tol}, {"max_iters", cfg.solver.stop.max_iters}};

  const ExperimentSpec& e = cfg.experiment;
  ordered_json ex;
  ex["d"] = e.d;
  ex["n"] = e.n;
  ex["n_outliers"] = e.n_outliers;
  ex["omegas"] = e.omegas;
  ex["trials"] = e.trials;
  ordered_json pens = ordered_json::array();
  for (const PenaltyConfig& pc : e.penalties) pens.push_back(penalty_json(pc));
  ex["penalties"] = pens;
  j["experiment"] = ex;

  j["check"] = {{"samples", cfg.check.samples},
                {"fd_step", cfg.check.fd_step},
                {"corrupt_prox", cfg.check.corrupt_prox}};
  return j;
}

ExperimentSpec effective_experiment(const RunConfig& cfg) {
  ExperimentSpec spec = cfg.experiment;
  spec.solver = cfg.solver;
  spec.base_seed = cfg.seed;
  return spec;
}

}  // namespace dcsmooth

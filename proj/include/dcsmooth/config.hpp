#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "dcsmooth/phase_retrieval.hpp"

namespace dcsmooth {

/// Bad configuration; what() starts with the dotted path of the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Problem for `solve` mode.
struct ProblemConfig {
  std::string type = "phase_retrieval";  ///< phase_retrieval | identity
  /// Initial point. Required for identity (default {5}); for phase_retrieval
  /// an empty x1 means x1 ~ N(0, I_d) drawn from the run seed.
  std::vector<double> x1;
  int d = 50;
  int n = 200;
  int n_outliers = 10;
  double omega = 1000;
};

/// Settings of the `check` suites.
struct CheckConfig {
  int samples = 200;       ///< random cases per suite and penalty
  double fd_step = 1e-6;   ///< finite-difference step; thresholds scale as O(h^2)
  bool corrupt_prox = false;  ///< test hook: perturb the checked prox (negative control)
};

struct RunConfig {
  std::string mode = "solve";  ///< solve | experiment | check
  std::uint64_t seed = 0;
  int threads = 0;  ///< 0 = not set
  std::string out = "out";
  PenaltyConfig penalty{"l1", 0, 0, 0};
  ProblemConfig problem;
  SolverConfig solver;
  /// Sweep settings; its solver and base_seed are taken from `solver` and `seed`.
  ExperimentSpec experiment;
  CheckConfig check;
};

/// Defaults with the reference penalty list filled in.
RunConfig default_config();

/// Every key is optional; unknown keys and out-of-range values throw ConfigError.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

/// Cross-field checks (penalty ranges, mu1 against the penalty's cap, K < n).
void validate_config(const RunConfig& cfg);

/// Effective configuration with every field written out, stable key order.
nlohmann::ordered_json to_json(const RunConfig& cfg);

/// Experiment spec with solver and seed copied in.
ExperimentSpec effective_experiment(const RunConfig& cfg);

}  // namespace dcsmooth

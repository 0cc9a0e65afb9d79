#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "dcsmooth/solver.hpp"

namespace dcsmooth {

/// Reproducible random stream: std::mt19937_64 (output fully specified by the
/// standard) with hand-written variate transforms, so draws are identical
/// across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, bound), rejection sampled.
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

std::uint64_t trial_seed(std::uint64_t base_seed, double omega, int trial);

using Matrix = Eigen::MatrixXd;

/// b_i = <a_i, x*>^2 on inliers, xi_i = omega * tan(pi u_i / 2) on outliers.
struct PhaseRetrievalInstance {
  Matrix a;  ///< n x d
  Vector b;
  Vector x_star;
  std::vector<int> inliers;   ///< sorted, 0-based
  std::vector<int> outliers;  ///< sorted, 0-based
  double omega;
  std::uint64_t seed;
};

/// Largest admissible u before tan(pi u / 2) is evaluated: 1 - 2^-32.
inline constexpr double kMaxOutlierUniform = 1.0 - 1.0 / 4294967296.0;

double outlier_magnitude(double omega, double u);

PhaseRetrievalInstance generate_instance(int d, int n, int n_out, double omega, std::uint64_t seed);

/// h = 0, S(x) = (Ax) .* (Ax) - b, DS(x)^T v = 2 A^T ((Ax) .* v).
CompositeProblem make_problem(const PhaseRetrievalInstance& inst, const DcPenalty& penalty);

/// min(|x* - x|, |x* + x|) / |x*|
double relative_error(const Vector& x, const Vector& x_star);

inline constexpr double kSuccessThreshold = 1e-3;

struct PenaltyConfig {
  std::string kind;  ///< l1 | mcp | capped_l1 | trimmed_l1
  double lambda = 0.0;
  double beta = 0.0;
  int k = 0;

  DcPenalty build() const;
  /// Stable identifier used in CSV output, e.g. "mcp_lambda1_beta2000".
  std::string id() const;
};

struct SolverConfig {
  MuSchedule schedule;
  BacktrackingParams backtracking;
  StopCriteria stop;
};

struct ExperimentSpec {
  int d = 50;
  int n = 200;
  int n_outliers = 10;
  std::vector<double> omegas{10, 1000, 3000, 5000, 10000};
  std::vector<PenaltyConfig> penalties;
  int trials = 50;
  std::uint64_t base_seed = 0;
  SolverConfig solver;

  void validate() const;
  /// Six penalties of the default sweep: l1, MCP (1,2000) and (2,500),
  /// capped l1 beta = 1000, trimmed l1 K = 5 and K = 10.
  static std::vector<PenaltyConfig> reference_penalties();
};

struct TrialOutcome {
  std::string penalty;
  double omega;
  int trial;
  std::uint64_t seed;
  double relative_error;
  bool success;
  long iterations;
  double wall_time_sec;
  std::string termination;  ///< GradTol | MaxIters | LineSearchFailure | NumericalFailure
  bool failed;              ///< solver raised an error; counted unsuccessful
};

struct SummaryRow {
  std::string penalty;
  double omega;
  int trials;
  int successes;
  int failures;
  double success_rate_pct;
  double mean_time_all_sec;
  double mean_time_success_sec;  ///< NaN when no trial succeeded
};

struct ExperimentResult {
  std::vector<TrialOutcome> outcomes;  ///< ordered by (penalty, omega, trial)
  std::vector<SummaryRow> summary;     ///< ordered by (penalty, omega)
};

/// x1 ~ N(0, I_d) on a stream derived from `seed`, separate from the instance stream.
Vector initial_point(std::uint64_t seed, int d);

/// Runs one trial: fresh instance and x1 ~ N(0, I_d) from the trial seed.
TrialOutcome run_trial(const ExperimentSpec& spec, const PenaltyConfig& penalty, double omega,
                       int trial);

/// Every (penalty, omega, trial) in parallel over `threads` workers; results
/// do not depend on the thread count or scheduling.
ExperimentResult run_experiment(const ExperimentSpec& spec, int threads = 1);

std::vector<SummaryRow> summarize(const ExperimentSpec& spec,
                                  const std::vector<TrialOutcome>& outcomes);

/// penalty,omega,trial,seed,relative_error,success,iters,time_sec,termination
void write_results_csv(std::ostream& os, const std::vector<TrialOutcome>& outcomes);
/// penalty,omega,success_rate_pct,mean_time_all_sec,mean_time_success_sec
void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);

}  // namespace dcsmooth

#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "dcsmooth/smoothing.hpp"

namespace dcsmooth {

/// mu_k = mu1 * k^(-1/alpha), k >= 1.
struct MuSchedule {
  double mu1 = 1.0;
  double alpha = 3.0;
  double cap = std::numeric_limits<double>::infinity();

  /// Throws ParameterError unless mu1 > 0, alpha >= 1, cap > 0 and mu1 <= cap.
  void validate() const;
  /// Ratio bound 2^(1/alpha) on mu_k / mu_{k+1}.
  double ratio_bound() const;
};

double mu_at(const MuSchedule& sched, long k);

struct BacktrackingParams {
  double gamma_initial = 1.0;
  double rho = 0.8;
  double c = 1e-4;
  int max_halvings = 200;

  void validate() const;
};

struct StopCriteria {
  double grad_tol = 1e-3;
  long max_iters = 10000;

  void validate() const;
};

struct BacktrackResult {
  double gamma;
  Vector x_next;
  double f_next;
  int shrinks;  ///< j such that gamma = gamma_initial * rho^j
};

/// Relative rounding allowance of the sufficient-decrease test. F^<mu> is a
/// difference f_mu - g_mu of terms that can be many orders of magnitude
/// larger than F^<mu> itself, so near a solution its computed value carries
/// noise of a few ulps of those terms.
inline constexpr double kArmijoRoundoff = 16.0 * std::numeric_limits<double>::epsilon();

/// Armijo backtracking on F^<mu> along -grad: the first gamma in
/// gamma_initial * rho^j with F(x - gamma grad) <= fx - c gamma |grad|^2, up to
/// kArmijoRoundoff * (fx_scale + trial scale). gamma restarts at gamma_initial
/// on every call. Non-finite trial values count as rejections.
BacktrackResult backtrack(const CompositeProblem& prob, const Vector& x, double mu,
                          const Vector& grad, double fx, const BacktrackingParams& params,
                          double fx_scale = 0.0);

enum class Termination { GradTol, MaxIters };
std::string to_string(Termination t);

struct IterationRecord {
  long k;
  double mu;
  double gamma;  ///< 0 on the terminal record, where no step is taken
  double grad_norm;
  double surrogate;
  double objective;
  int backtracks;
  double mu_sum;         ///< sum_{j <= k} mu_j
  double min_grad_norm;  ///< min_{j <= k} grad_norm_j
};

struct SolveOptions {
  bool record_trace = true;
  bool record_objective = true;
  /// Every iteration up to this index is kept; later ones are sampled.
  long full_trace_limit = 10000;
  long thin_stride = 100;
};

struct SolveResult {
  Vector x;
  Termination reason;
  long iterations;
  double grad_norm;
  double wall_time_sec;
  double mu_sum;
  double min_grad_norm;
  std::vector<IterationRecord> trace;
};

/// Variable smoothing gradient descent: at iteration k take one backtracked
/// gradient step on F^<mu_k>. Stops once |grad F_k(x_k)| < grad_tol (x_k is
/// returned) or after max_iters gradient evaluations.
SolveResult solve(const CompositeProblem& prob, const Vector& x1, const MuSchedule& sched,
                  const BacktrackingParams& bt, const StopCriteria& stop,
                  const SolveOptions& options = {});

struct ScheduleReport {
  bool ratios_ok;
  double min_ratio;
  double max_ratio;
  double ratio_bound;
  bool within_cap;
  double partial_sum;
  long first_violation;  ///< 0 when none
};

ScheduleReport certify_schedule(const MuSchedule& sched, long n);

struct ArmijoReplay {
  bool ok;
  long steps_checked;
  long first_violation;  ///< 0 when none
  double worst_slack;    ///< max over steps of (lhs - rhs) / max(1, scale of F_k(x_k))
};

/// Re-runs the recorded steps from x1 and re-checks
/// F_k(x_{k+1}) <= F_k(x_k) - c gamma_k |grad F_k(x_k)|^2 to relative slack rel_tol.
/// Needs an unthinned trace.
ArmijoReplay replay_armijo(const CompositeProblem& prob, const Vector& x1,
                           const std::vector<IterationRecord>& trace, double c,
                           double rel_tol = 1e-10);

/// CSV header: k,mu,gamma,grad_norm,surrogate,objective,backtracks
void write_trace_csv(std::ostream& os, const std::vector<IterationRecord>& trace);

}  // namespace dcsmooth

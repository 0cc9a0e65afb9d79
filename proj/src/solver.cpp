#include "dcsmooth/solver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <utility>

namespace dcsmooth {

namespace {

bool all_finite(const Vector& v) { return v.allFinite(); }

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void MuSchedule::validate() const {
  if (!(mu1 > 0.0) || !std::isfinite(mu1)) throw ParameterError("mu1 must be positive and finite");
  if (!(alpha >= 1.0) || !std::isfinite(alpha)) throw ParameterError("alpha must be at least 1");
  if (!(cap > 0.0)) throw ParameterError("mu cap must be positive");
  if (mu1 > cap) {
    throw ParameterError("mu1 = " + std::to_string(mu1) + " exceeds the cap 1/(2 eta) = " +
                         std::to_string(cap));
  }
}

double MuSchedule::ratio_bound() const { return std::pow(2.0, 1.0 / alpha); }

double mu_at(const MuSchedule& sched, long k) {
  if (k < 1) throw ParameterError("schedule index k must be at least 1");
  if (k == 1) return sched.mu1;
  return sched.mu1 * std::pow(static_cast<double>(k), -1.0 / sched.alpha);
}

void BacktrackingParams::validate() const {
  if (!(gamma_initial > 0.0) || !std::isfinite(gamma_initial)) {
    throw ParameterError("gamma_initial must be positive");
  }
  if (!(rho > 0.0 && rho < 1.0)) throw ParameterError("rho must lie in (0,1)");
  if (!(c > 0.0 && c < 1.0)) throw ParameterError("c must lie in (0,1)");
  if (max_halvings < 1) throw ParameterError("max_halvings must be positive");
}

void StopCriteria::validate() const {
  if (!(grad_tol > 0.0)) throw ParameterError("grad_tol must be positive");
  if (max_iters < 1) throw ParameterError("max_iters must be at least 1");
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::GradTol:
      return "GradTol";
    case Termination::MaxIters:
      return "MaxIters";
  }
  return "unknown";
}

BacktrackResult backtrack(const CompositeProblem& prob, const Vector& x, double mu,
                          const Vector& grad, double fx, const BacktrackingParams& params,
                          double fx_scale) {
  const double grad_sq = grad.squaredNorm();
  const RayFn ray = make_ray(prob, x, grad);
  double gamma = params.gamma_initial;
  for (int j = 0; j <= params.max_halvings; ++j) {
    Vector trial = x - gamma * grad;
    const SurrogateValue ft = surrogate_value_at(prob, trial, ray(gamma), mu);
    const double allowance = kArmijoRoundoff * (fx_scale + ft.scale);
    if (std::isfinite(ft.value) && !(ft.value > fx - params.c * gamma * grad_sq + allowance)) {
      return {gamma, std::move(trial), ft.value, j};
    }
    gamma *= params.rho;
  }
  throw LineSearchFailure("backtracking exceeded " + std::to_string(params.max_halvings) +
                          " shrinks at mu = " + fmt_double(mu) +
                          ", |grad| = " + fmt_double(std::sqrt(grad_sq)));
}

SolveResult solve(const CompositeProblem& prob, const Vector& x1, const MuSchedule& sched,
                  const BacktrackingParams& bt, const StopCriteria& stop,
                  const SolveOptions& options) {
  sched.validate();
  bt.validate();
  stop.validate();
  if (x1.size() != prob.d()) throw ParameterError("initial point has the wrong dimension");
  // mu_k is nonincreasing, so mu1 within the problem's cap keeps every mu_k there.
  if (sched.mu1 > prob.mu_cap()) {
    throw ParameterError("mu1 = " + fmt_double(sched.mu1) + " exceeds 1/(2 eta) = " +
                         fmt_double(prob.mu_cap()));
  }

  const auto start = std::chrono::steady_clock::now();
  SolveResult result;
  Vector x = x1;
  double mu_sum = 0.0;
  double min_grad = std::numeric_limits<double>::infinity();

  for (long k = 1;; ++k) {
    const double mu = mu_at(sched, k);
    mu_sum += mu;
    SurrogateEval ev = surrogate_value_grad(prob, x, mu);
    if (!std::isfinite(ev.value) || !all_finite(ev.grad)) {
      throw NumericalFailure("non-finite surrogate value or gradient at iteration " +
                                 std::to_string(k),
                             static_cast<int>(k));
    }
    const double gnorm = ev.grad.norm();
    min_grad = std::min(min_grad, gnorm);

    IterationRecord rec{k, mu, 0.0, gnorm, ev.value,
                        options.record_objective ? objective_value(prob, x)
                                                 : std::numeric_limits<double>::quiet_NaN(),
                        0, mu_sum, min_grad};

    const bool converged = gnorm < stop.grad_tol;
    const bool exhausted = k >= stop.max_iters;
    if (converged || exhausted) {
      if (options.record_trace) result.trace.push_back(rec);
      result.reason = converged ? Termination::GradTol : Termination::MaxIters;
      result.iterations = k;
      result.grad_norm = gnorm;
      break;
    }

    BacktrackResult step;
    try {
      step = backtrack(prob, x, mu, ev.grad, ev.value, bt, ev.scale);
    } catch (const LineSearchFailure& e) {
      throw LineSearchFailure(std::string(e.what()) + " (iteration " + std::to_string(k) + ")",
                              static_cast<int>(k));
    }
    rec.gamma = step.gamma;
    rec.backtracks = step.shrinks;
    if (options.record_trace &&
        (k <= options.full_trace_limit || k % options.thin_stride == 0)) {
      result.trace.push_back(rec);
    }
    x = std::move(step.x_next);
  }

  result.x = std::move(x);
  result.mu_sum = mu_sum;
  result.min_grad_norm = min_grad;
  result.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

ScheduleReport certify_schedule(const MuSchedule& sched, long n) {
  if (n < 2) throw ParameterError("schedule certification needs N >= 2");
  ScheduleReport rep{true, std::numeric_limits<double>::infinity(), 0.0, sched.ratio_bound(),
                     true, 0.0, 0};
  double prev = mu_at(sched, 1);
  rep.partial_sum = prev;
  rep.within_cap = prev <= sched.cap;
  for (long k = 2; k <= n; ++k) {
    const double cur = mu_at(sched, k);
    rep.partial_sum += cur;
    const double ratio = prev / cur;
    rep.min_ratio = std::min(rep.min_ratio, ratio);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    // mu_1 / mu_2 = 2^(1/alpha) exactly in real arithmetic; allow one rounding.
    if ((ratio < 1.0 || ratio > rep.ratio_bound * (1.0 + 1e-14)) && rep.first_violation == 0) {
      rep.first_violation = k - 1;
    }
    if (cur > sched.cap) rep.within_cap = false;
    prev = cur;
  }
  rep.ratios_ok = rep.first_violation == 0;
  return rep;
}

ArmijoReplay replay_armijo(const CompositeProblem& prob, const Vector& x1,
                           const std::vector<IterationRecord>& trace, double c, double rel_tol) {
  ArmijoReplay rep{true, 0, 0, -std::numeric_limits<double>::infinity()};
  Vector x = x1;
  long expected_k = 1;
  for (const IterationRecord& rec : trace) {
    if (rec.k != expected_k) {
      throw ParameterError("Armijo replay needs an unthinned trace (gap at k = " +
                           std::to_string(rec.k) + ")");
    }
    ++expected_k;
    if (rec.gamma == 0.0) break;
    const SurrogateEval ev = surrogate_value_grad(prob, x, rec.mu);
    Vector next = x - rec.gamma * ev.grad;
    const double lhs = surrogate_value(prob, next, rec.mu);
    const double rhs = ev.value - c * rec.gamma * ev.grad.squaredNorm();
    const double slack = (lhs - rhs) / std::max(1.0, ev.scale);
    rep.worst_slack = std::max(rep.worst_slack, slack);
    ++rep.steps_checked;
    if (!(slack <= rel_tol) && rep.first_violation == 0) {
      rep.ok = false;
      rep.first_violation = rec.k;
    }
    x = std::move(next);
  }
  return rep;
}

void write_trace_csv(std::ostream& os, const std::vector<IterationRecord>& trace) {
  os << "k,mu,gamma,grad_norm,surrogate,objective,backtracks\n";
  for (const IterationRecord& r : trace) {
    os << r.k << ',' << fmt_double(r.mu) << ',' << fmt_double(r.gamma) << ','
       << fmt_double(r.grad_norm) << ',' << fmt_double(r.surrogate) << ','
       << fmt_double(r.objective) << ',' << r.backtracks << '\n';
  }
}

}  // namespace dcsmooth

#include "dcsmooth/phase_retrieval.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <numbers>
#include <ostream>
#include <thread>
#include <utility>

namespace dcsmooth {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Tag separating the initial-point stream from the instance stream.
constexpr std::uint64_t kInitialPointTag = 0x5851f42d4c957f2dULL;

}  // namespace

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw ParameterError("Rng::below needs a positive bound");
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return r % bound;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t base_seed, double omega, int trial) {
  std::uint64_t h = mix64(std::bit_cast<std::uint64_t>(omega));
  h = mix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(trial)));
  return base_seed ^ h;
}

double outlier_magnitude(double omega, double u) {
  const double clamped = std::clamp(u, 0.0, kMaxOutlierUniform);
  return omega * std::tan(0.5 * std::numbers::pi * clamped);
}

PhaseRetrievalInstance generate_instance(int d, int n, int n_out, double omega,
                                         std::uint64_t seed) {
  if (d < 1 || n < 1) throw ParameterError("instance dimensions d and n must be positive");
  if (n_out < 0 || n_out > n) {
    throw ParameterError("n_outliers = " + std::to_string(n_out) + " must lie in [0, n = " +
                         std::to_string(n) + "]");
  }
  if (!(omega > 0.0) || !std::isfinite(omega)) throw ParameterError("omega must be positive");

  Rng rng(seed);
  PhaseRetrievalInstance inst;
  inst.omega = omega;
  inst.seed = seed;
  inst.a.resize(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) inst.a(i, j) = rng.normal();

  inst.x_star.resize(d);
  for (int j = 0; j < d; ++j) inst.x_star[j] = rng.uniform() < 0.5 ? 1.0 : -1.0;

  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  for (int i = 0; i < n_out; ++i) {
    const auto j = static_cast<std::size_t>(i) +
                   static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[j]);
  }
  inst.outliers.assign(perm.begin(), perm.begin() + n_out);
  std::sort(inst.outliers.begin(), inst.outliers.end());

  const Vector ax = inst.a * inst.x_star;
  inst.b = ax.array().square().matrix();
  std::vector<char> is_out(static_cast<std::size_t>(n), 0);
  for (int i : inst.outliers) {
    is_out[static_cast<std::size_t>(i)] = 1;
    inst.b[i] = outlier_magnitude(omega, rng.uniform());
  }
  for (int i = 0; i < n; ++i)
    if (!is_out[static_cast<std::size_t>(i)]) inst.inliers.push_back(i);
  return inst;
}

CompositeProblem make_problem(const PhaseRetrievalInstance& inst, const DcPenalty& penalty) {
  const auto a = std::make_shared<const Matrix>(inst.a);
  const auto b = std::make_shared<const Vector>(inst.b);
  if (a->rows() != b->size()) throw ParameterError("A and b have inconsistent row counts");
  const Eigen::Index d = a->cols();
  const Eigen::Index n = a->rows();
  SmoothMap s;
  s.value = [a, b](const Vector& x) -> Vector {
    if (x.size() != a->cols()) throw ParameterError("x has the wrong dimension for A");
    const Vector ax = *a * x;
    return (ax.array().square() - b->array()).matrix();
  };
  s.adjoint = [a](const Vector& x, const Vector& v) -> Vector {
    if (x.size() != a->cols() || v.size() != a->rows()) {
      throw ParameterError("Jacobian-adjoint arguments have the wrong dimension");
    }
    const Vector ax = *a * x;
    return 2.0 * (a->transpose() * (ax.array() * v.array()).matrix());
  };
  // (A(x - gamma dir))^2 - b = (Ax - gamma A dir)^2 - b: two mat-vecs per ray.
  s.ray = [a, b](const Vector& x, const Vector& dir) -> RayFn {
    const Vector ax = *a * x;
    const Vector ad = *a * dir;
    return [ax, ad, b](double gamma) -> Vector {
      return ((ax - gamma * ad).array().square() - b->array()).matrix();
    };
  };
  return {SmoothTerm::zero(), std::move(s), penalty, d, n};
}

double relative_error(const Vector& x, const Vector& x_star) {
  if (x.size() != x_star.size()) throw ParameterError("relative_error: dimension mismatch");
  const double ref = x_star.norm();
  if (!(ref > 0.0)) throw ParameterError("relative_error: x_star must be nonzero");
  return std::min((x_star - x).norm(), (x_star + x).norm()) / ref;
}

DcPenalty PenaltyConfig::build() const {
  if (kind == "l1") return DcPenalty::l1();
  if (kind == "mcp") return DcPenalty::mcp(lambda, beta);
  if (kind == "capped_l1") return DcPenalty::capped_l1(beta);
  if (kind == "trimmed_l1") return DcPenalty::trimmed_l1(k);
  throw ParameterError("unknown penalty kind '" + kind + "'");
}

std::string PenaltyConfig::id() const {
  if (kind == "mcp") return "mcp_lambda" + fmt_short(lambda) + "_beta" + fmt_short(beta);
  if (kind == "capped_l1") return "capped_l1_beta" + fmt_short(beta);
  if (kind == "trimmed_l1") return "trimmed_l1_K" + std::to_string(k);
  return kind;
}

std::vector<PenaltyConfig> ExperimentSpec::reference_penalties() {
  return {{"l1", 0, 0, 0},           {"mcp", 1, 2000, 0},       {"mcp", 2, 500, 0},
          {"capped_l1", 0, 1000, 0}, {"trimmed_l1", 0, 0, 5}, {"trimmed_l1", 0, 0, 10}};
}

void ExperimentSpec::validate() const {
  if (d < 1 || n < 1) throw ParameterError("d and n must be positive");
  if (n_outliers < 0 || n_outliers > n) throw ParameterError("n_outliers must lie in [0, n]");
  if (trials < 1) throw ParameterError("trials must be at least 1");
  if (omegas.empty()) throw ParameterError("omegas must not be empty");
  for (double w : omegas)
    if (!(w > 0.0) || !std::isfinite(w)) throw ParameterError("every omega must be positive");
  if (penalties.empty()) throw ParameterError("penalties must not be empty");
  solver.schedule.validate();
  solver.backtracking.validate();
  solver.stop.validate();
  for (const PenaltyConfig& p : penalties) {
    const DcPenalty pen = p.build();
    if (p.kind == "trimmed_l1" && p.k > n - 1) {
      throw ParameterError("trimmed_l1 K must be at most n - 1");
    }
    if (pen.eta() > 0.0 && solver.schedule.mu1 > 1.0 / (2.0 * pen.eta())) {
      throw ParameterError("mu1 must not exceed 1/(2 eta) = " + fmt_short(1.0 / (2.0 * pen.eta())) +
                           " for penalty " + p.id());
    }
  }
}

Vector initial_point(std::uint64_t seed, int d) {
  Rng rng(mix64(seed ^ kInitialPointTag));
  Vector x1(d);
  for (int j = 0; j < d; ++j) x1[j] = rng.normal();
  return x1;
}

TrialOutcome run_trial(const ExperimentSpec& spec, const PenaltyConfig& penalty, double omega,
                       int trial) {
  const std::uint64_t seed = trial_seed(spec.base_seed, omega, trial);
  const PhaseRetrievalInstance inst =
      generate_instance(spec.d, spec.n, spec.n_outliers, omega, seed);
  const Vector x1 = initial_point(seed, spec.d);
  const CompositeProblem prob = make_problem(inst, penalty.build());

  TrialOutcome out{penalty.id(), omega, trial, seed, 1.0, false, 0, 0.0, "", false};
  SolveOptions opts;
  opts.record_trace = false;
  opts.record_objective = false;
  const auto start = std::chrono::steady_clock::now();
  try {
    const SolveResult res = solve(prob, x1, spec.solver.schedule, spec.solver.backtracking,
                                  spec.solver.stop, opts);
    out.relative_error = relative_error(res.x, inst.x_star);
    out.iterations = res.iterations;
    out.termination = to_string(res.reason);
    out.success = out.relative_error < kSuccessThreshold;
  } catch (const LineSearchFailure& e) {
    out.failed = true;
    out.iterations = e.iteration();
    out.termination = "LineSearchFailure";
  } catch (const NumericalFailure& e) {
    out.failed = true;
    out.iterations = e.iteration();
    out.termination = "NumericalFailure";
  }
  out.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::vector<SummaryRow> summarize(const ExperimentSpec& spec,
                                  const std::vector<TrialOutcome>& outcomes) {
  std::vector<SummaryRow> rows;
  for (const PenaltyConfig& p : spec.penalties) {
    const std::string id = p.id();
    for (double omega : spec.omegas) {
      SummaryRow row{id, omega, 0, 0, 0, 0.0, 0.0, 0.0};
      double t_all = 0.0;
      double t_ok = 0.0;
      for (const TrialOutcome& o : outcomes) {
        if (o.penalty != id || o.omega != omega) continue;
        ++row.trials;
        t_all += o.wall_time_sec;
        if (o.failed) ++row.failures;
        if (o.success) {
          ++row.successes;
          t_ok += o.wall_time_sec;
        }
      }
      if (row.trials > 0) {
        row.success_rate_pct = 100.0 * row.successes / row.trials;
        row.mean_time_all_sec = t_all / row.trials;
      }
      row.mean_time_success_sec = row.successes > 0
                                      ? t_ok / row.successes
                                      : std::numeric_limits<double>::quiet_NaN();
      rows.push_back(row);
    }
  }
  return rows;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, int threads) {
  spec.validate();
  struct Task {
    const PenaltyConfig* penalty;
    double omega;
    int trial;
  };
  std::vector<Task> tasks;
  for (const PenaltyConfig& p : spec.penalties)
    for (double omega : spec.omegas)
      for (int t = 0; t < spec.trials; ++t) tasks.push_back({&p, omega, t});

  ExperimentResult result;
  result.outcomes.resize(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      result.outcomes[i] = run_trial(spec, *tasks[i].penalty, tasks[i].omega, tasks[i].trial);
    }
  };
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(tasks.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  result.summary = summarize(spec, result.outcomes);
  return result;
}

void write_results_csv(std::ostream& os, const std::vector<TrialOutcome>& outcomes) {
  os << "penalty,omega,trial,seed,relative_error,success,iters,time_sec,termination\n";
  for (const TrialOutcome& o : outcomes) {
    os << o.penalty << ',' << fmt_short(o.omega) << ',' << o.trial << ',' << o.seed << ','
       << fmt_double(o.relative_error) << ',' << (o.success ? 1 : 0) << ',' << o.iterations
       << ',' << fmt_double(o.wall_time_sec) << ',' << o.termination << '\n';
  }
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "penalty,omega,success_rate_pct,mean_time_all_sec,mean_time_success_sec\n";
  for (const SummaryRow& r : rows) {
    os << r.penalty << ',' << fmt_short(r.omega) << ',' << fmt_short(r.success_rate_pct) << ','
       << fmt_double(r.mean_time_all_sec) << ',';
    if (std::isnan(r.mean_time_success_sec)) {
      os << "nan";
    } else {
      os << fmt_double(r.mean_time_success_sec);
    }
    os << '\n';
  }
}

}  // namespace dcsmooth

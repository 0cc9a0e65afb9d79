#include "dcsmooth/check.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dcsmooth {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string fmt(const Vector& v) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ")";
  return os.str();
}

// Uniform on the open interval (0, hi).
double open_uniform(Rng& rng, double hi) {
  double u;
  do {
    u = rng.uniform();
  } while (u == 0.0);
  return hi * u;
}

std::vector<double> breakpoints(const PenaltyPart& part, double mu) {
  switch (part.kind()) {
    case PenaltyPart::Kind::L1:
      return {mu};
    case PenaltyPart::Kind::MCP:
      return {mu * part.lambda(), part.beta() * part.lambda()};
    case PenaltyPart::Kind::CappedSubtrahend:
      return {part.beta(), part.beta() + mu};
    default:
      return {0.0};
  }
}

void record(SuiteReport& rep, double err, bool ok, const std::string& what) {
  ++rep.cases;
  rep.worst = std::max(rep.worst, err);
  if (!ok && rep.passed) {
    rep.passed = false;
    rep.counterexample = what;
  }
}

}  // namespace

std::vector<PenaltyPart> reference_elementwise_parts() {
  return {PenaltyPart::l1(), PenaltyPart::mcp(1, 2000), PenaltyPart::mcp(2, 500),
          PenaltyPart::capped_subtrahend(1000)};
}

double prox_sample_scale(const PenaltyPart& part) {
  switch (part.kind()) {
    case PenaltyPart::Kind::MCP:
      return std::max(1.0, part.beta() * part.lambda());
    case PenaltyPart::Kind::CappedSubtrahend:
      return part.beta() + 1.0;
    default:
      return 1.0;
  }
}

double fd_threshold_scale(double h) {
  const double r = h / 1e-6;
  return std::max(1.0, r * r);
}

SuiteReport check_prox(const CheckOptions& opt) {
  SuiteReport rep{"prox_vs_oracle", true, 0, 0.0, kProxTol, ""};
  Rng rng(mix64(opt.seed ^ 0x70726f78ULL));
  for (const PenaltyPart& part : reference_elementwise_parts()) {
    const oracle::ScalarFn phi = oracle::elementwise_reference(part);
    const double scale = prox_sample_scale(part);
    const double mu_hi = part.kind() == PenaltyPart::Kind::MCP ? std::min(1.0, part.beta() / 2)
                                                               : 1.0;
    for (int s = 0; s < opt.samples; ++s) {
      const double mu = open_uniform(rng, mu_hi);
      double t;
      if (s % 2 == 0) {
        t = scale * (6.0 * rng.uniform() - 3.0);
      } else {
        // Near a branch boundary, where closed forms usually go wrong.
        const std::vector<double> bps = breakpoints(part, mu);
        const double bp = bps[rng.below(bps.size())];
        t = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (bp + 1e-3 * (2.0 * rng.uniform() - 1.0));
      }
      double got = prox_part(part, Vector::Constant(1, t), mu)[0];
      if (opt.corrupt_prox) got += 1e-3;
      const double expected = oracle::prox_1d_oracle(
          phi, t, mu, oracle::default_bracket(t, mu, part.lipschitz(1)));
      const double err = std::abs(got - expected);
      record(rep, err, err <= kProxTol,
             part.describe() + " t=" + fmt(t) + " mu=" + fmt(mu) + ": expected " +
                 fmt(expected) + ", got " + fmt(got));
    }
  }
  return rep;
}

SuiteReport check_projection(const CheckOptions& opt) {
  SuiteReport rep{"projection_vs_dykstra", true, 0, 0.0, kTopKTol, ""};
  Rng rng(mix64(opt.seed ^ 0x70726f6aULL));
  for (int n = 2; n <= 8; ++n) {
    for (int k = 1; k <= n - 1; ++k) {
      const PenaltyPart part = PenaltyPart::top_k(k);
      for (int s = 0; s < opt.samples; ++s) {
        const double spread = std::pow(10.0, 2.0 * rng.uniform() - 1.0);
        Vector z(n);
        for (int i = 0; i < n; ++i) z[i] = spread * rng.normal();
        const double mu = open_uniform(rng, 1.0);
        Vector got = prox_part(part, z, mu);
        if (opt.corrupt_prox) got.array() += 1e-3;
        const Vector expected = z - mu * oracle::dykstra_project(z / mu, k);
        const double err = (got - expected).norm();
        record(rep, err, err <= kTopKTol,
               "top_k(K=" + std::to_string(k) + ") z=" + fmt(z) + " mu=" + fmt(mu) +
                   ": expected " + fmt(expected) + ", got " + fmt(got));
      }
    }
  }
  return rep;
}

SuiteReport check_gradient(const CheckOptions& opt) {
  const double scale = fd_threshold_scale(opt.fd_step);
  SuiteReport rep{"gradient_vs_fd", true, 0, 0.0, kGradRelTol * scale, ""};
  const std::vector<PenaltyConfig> penalties{
      {"l1", 0, 0, 0}, {"mcp", 1, 2000, 0}, {"capped_l1", 0, 1000, 0}, {"trimmed_l1", 0, 0, 5}};
  const double mus[] = {1.0, 0.1, 0.01};
  for (int i = 0; i < opt.grad_instances; ++i) {
    const std::uint64_t seed = mix64(opt.seed ^ mix64(0x67726164ULL + static_cast<std::uint64_t>(i)));
    const PhaseRetrievalInstance inst = generate_instance(10, 40, 4, 10.0, seed);
    const Vector x = initial_point(seed, 10);
    for (const PenaltyConfig& pc : penalties) {
      const CompositeProblem prob = make_problem(inst, pc.build());
      for (double mu : mus) {
        const Vector g = surrogate_grad(prob, x, mu);
        const Vector fd = oracle::fd_grad(
            [&](const Vector& y) { return surrogate_value(prob, y, mu); }, x, opt.fd_step);
        const double err = (g - fd).norm();
        bool ok;
        double metric;
        if (g.norm() < 1e-3) {
          metric = err;
          ok = err <= kGradAbsTol * scale;
        } else {
          metric = err / fd.norm();
          ok = metric <= kGradRelTol * scale;
          rep.worst = std::max(rep.worst, metric);
        }
        ++rep.cases;
        if (!ok && rep.passed) {
          rep.passed = false;
          rep.counterexample = pc.id() + " instance seed=" + std::to_string(seed) +
                               " mu=" + fmt(mu) + " x=" + fmt(x) + ": expected (fd) " + fmt(fd) +
                               ", got " + fmt(g) + " (error " + fmt(metric) + ")";
        }
      }
    }
  }
  return rep;
}

SuiteReport check_armijo(const CheckOptions& opt) {
  SuiteReport rep{"armijo_replay", true, 0, 0.0, kArmijoSlackTol, ""};
  const std::uint64_t seed = mix64(opt.seed ^ 0x61726d696a6fULL);
  const int n = 40;
  const PhaseRetrievalInstance inst = generate_instance(10, n, 4, 1000.0, seed);
  PenaltyConfig pc = opt.penalty;
  if (pc.kind == "trimmed_l1") pc.k = std::min(pc.k, n - 1);
  const CompositeProblem prob = make_problem(inst, pc.build());
  const Vector x1 = initial_point(seed, 10);
  StopCriteria stop = opt.solver.stop;
  stop.max_iters = std::min<long>(stop.max_iters, 500);
  MuSchedule sched = opt.solver.schedule;
  sched.cap = prob.mu_cap();
  try {
    const SolveResult res = solve(prob, x1, sched, opt.solver.backtracking, stop);
    const ArmijoReplay replay =
        replay_armijo(prob, x1, res.trace, opt.solver.backtracking.c, kArmijoSlackTol);
    rep.cases = replay.steps_checked;
    rep.worst = replay.worst_slack;
    if (!replay.ok) {
      rep.passed = false;
      rep.counterexample = pc.id() + " instance seed=" + std::to_string(seed) +
                           ": step k=" + std::to_string(replay.first_violation) +
                           " expected relative slack <= " + fmt(kArmijoSlackTol) + ", got " +
                           fmt(replay.worst_slack);
    }
  } catch (const LineSearchFailure& e) {
    rep.passed = false;
    rep.counterexample = pc.id() + " instance seed=" + std::to_string(seed) + ": " + e.what();
  }
  return rep;
}

SuiteReport check_schedule(const CheckOptions& opt) {
  SuiteReport rep{"schedule_certificate", true, 0, 0.0, 0.0, ""};
  MuSchedule sched = opt.solver.schedule;
  const DcPenalty pen = opt.penalty.build();
  sched.cap = pen.eta() > 0.0 ? 1.0 / (2.0 * pen.eta()) : std::numeric_limits<double>::infinity();
  const long n = std::max<long>(2, opt.solver.stop.max_iters);
  const ScheduleReport s = certify_schedule(sched, n);
  rep.cases = n - 1;
  rep.worst = s.max_ratio;
  rep.threshold = s.ratio_bound;
  if (!s.ratios_ok || !s.within_cap) {
    rep.passed = false;
    rep.counterexample = "mu1=" + fmt(sched.mu1) + " alpha=" + fmt(sched.alpha) +
                         " cap=" + fmt(sched.cap) + ": expected ratios in [1, " +
                         fmt(s.ratio_bound) + "] and mu_k <= cap, got ratios in [" +
                         fmt(s.min_ratio) + ", " + fmt(s.max_ratio) + "]" +
                         (s.within_cap ? "" : ", cap exceeded") +
                         (s.first_violation ? " (first at k=" + std::to_string(s.first_violation) + ")"
                                            : "");
  }
  return rep;
}

std::vector<SuiteReport> run_all_checks(const CheckOptions& opt) {
  return {check_prox(opt), check_projection(opt), check_gradient(opt), check_armijo(opt),
          check_schedule(opt)};
}

}  // namespace dcsmooth

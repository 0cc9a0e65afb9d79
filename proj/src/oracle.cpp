#include "dcsmooth/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace dcsmooth::oracle {

namespace {

long double objective(const ScalarFn& phi, long double w, long double t, long double mu) {
  const long double d = w - t;
  return phi(w) + d * d / (2.0L * mu);
}

void check_prox_args(double t, double mu, Interval bracket) {
  if (!(mu > 0.0)) throw ParameterError("oracle: mu must be positive");
  if (!std::isfinite(t)) throw ParameterError("oracle: t must be finite");
  if (!(bracket.lo < bracket.hi)) throw ParameterError("oracle: empty bracket");
}

}  // namespace

ScalarFn elementwise_reference(const PenaltyPart& part) {
  switch (part.kind()) {
    case PenaltyPart::Kind::L1:
      return [](long double w) { return std::fabs(w); };
    case PenaltyPart::Kind::MCP: {
      const long double lam = part.lambda();
      const long double beta = part.beta();
      return [lam, beta](long double w) {
        const long double a = std::fabs(w);
        if (a <= beta * lam) return lam * a - a * a / (2.0L * beta);
        return beta * lam * lam / 2.0L;
      };
    }
    case PenaltyPart::Kind::CappedSubtrahend: {
      const long double beta = part.beta();
      return [beta](long double w) { return std::max(std::fabs(w) - beta, 0.0L); };
    }
    case PenaltyPart::Kind::Zero:
      return [](long double) { return 0.0L; };
    case PenaltyPart::Kind::TopK:
      break;
  }
  throw ParameterError("oracle: top-K sum is not elementwise");
}

Interval default_bracket(double t, double mu, double lipschitz) {
  const double r = mu * lipschitz + 1.0;
  return {t - r, t + r};
}

double prox_1d_oracle(const ScalarFn& phi, double t, double mu, Interval bracket,
                      const OracleConfig& cfg) {
  check_prox_args(t, mu, bracket);
  const long double invphi = (std::sqrt(5.0L) - 1.0L) / 2.0L;
  long double lo = bracket.lo;
  long double hi = bracket.hi;
  long double x1 = hi - invphi * (hi - lo);
  long double x2 = lo + invphi * (hi - lo);
  long double f1 = objective(phi, x1, t, mu);
  long double f2 = objective(phi, x2, t, mu);
  while (hi - lo > cfg.section_tol) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = objective(phi, x1, t, mu);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = objective(phi, x2, t, mu);
    }
  }

  // Local grid around the section result.
  const long double center = 0.5L * (lo + hi);
  const long double half = 10.0L * cfg.section_tol;
  long double best = center;
  long double best_f = objective(phi, center, t, mu);
  constexpr int kRefine = 200;
  for (int i = 0; i <= kRefine; ++i) {
    const long double w = center - half + 2.0L * half * i / kRefine;
    const long double fw = objective(phi, w, t, mu);
    if (fw < best_f) {
      best_f = fw;
      best = w;
    }
  }

  const long double edge = 2.0L * cfg.section_tol;
  if (best - bracket.lo < edge || bracket.hi - best < edge) {
    throw OracleError("prox oracle minimizer lies on the bracket boundary [" +
                      std::to_string(bracket.lo) + ", " + std::to_string(bracket.hi) + "]");
  }
  return static_cast<double>(best);
}

double prox_1d_grid(const ScalarFn& phi, double t, double mu, Interval bracket, int points,
                    int levels) {
  check_prox_args(t, mu, bracket);
  if (points < 3 || levels < 1) throw ParameterError("oracle: grid needs >= 3 points, >= 1 level");
  long double lo = bracket.lo;
  long double hi = bracket.hi;
  long double best = lo;
  for (int level = 0; level < levels; ++level) {
    const long double step = (hi - lo) / (points - 1);
    long double best_f = objective(phi, lo, t, mu);
    best = lo;
    for (int i = 1; i < points; ++i) {
      const long double w = lo + step * i;
      const long double fw = objective(phi, w, t, mu);
      if (fw < best_f) {
        best_f = fw;
        best = w;
      }
    }
    lo = best - 2.0L * step;
    hi = best + 2.0L * step;
  }
  return static_cast<double>(best);
}

Vector project_l1_ball(const Vector& z, double radius) {
  if (!(radius > 0.0)) throw ParameterError("oracle: l1 radius must be positive");
  if (z.lpNorm<1>() <= radius) return z;
  std::vector<double> u(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) u[static_cast<std::size_t>(i)] = std::abs(z[i]);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double tau = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumsum += u[j];
    const double cand = (cumsum - radius) / static_cast<double>(j + 1);
    if (u[j] - cand > 0.0) tau = cand;
  }
  Vector w(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double a = std::max(std::abs(z[i]) - tau, 0.0);
    w[i] = z[i] < 0.0 ? -a : a;
  }
  return w;
}

Vector dykstra_project(const Vector& z, int k, const OracleConfig& cfg) {
  if (k < 1) throw ParameterError("oracle: projection radius K must be at least 1");
  const Eigen::Index n = z.size();
  Vector x = z;
  Vector p = Vector::Zero(n);
  Vector q = Vector::Zero(n);
  for (long it = 0; it < cfg.dykstra_max_iters; ++it) {
    const Vector y = (x + p).cwiseMax(-1.0).cwiseMin(1.0);
    p = x + p - y;
    const Vector x_next = project_l1_ball(y + q, static_cast<double>(k));
    q = y + q - x_next;
    const double change = (x_next - x).norm();
    const double gap = (x_next - y).norm();
    x = x_next;
    if (change <= cfg.dykstra_tol && gap <= cfg.dykstra_tol) return x;
  }
  throw OracleError("Dykstra projection did not converge in " +
                    std::to_string(cfg.dykstra_max_iters) + " iterations");
}

Vector fd_grad(const std::function<double(const Vector&)>& f, const Vector& x, double h) {
  if (!(h > 0.0)) throw ParameterError("oracle: finite-difference step must be positive");
  Vector g(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double fp = f(probe);
    probe[i] = x[i] - h;
    const double fm = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw OracleError("finite-difference stencil hit a non-finite value at coordinate " +
                        std::to_string(i));
    }
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace dcsmooth::oracle

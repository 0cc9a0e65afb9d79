#include "dcsmooth/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

namespace dcsmooth {

namespace {

double sign(double t) { return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0); }

void require_positive_finite(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ParameterError(std::string(name) + " must be a positive finite number");
  }
}

void check_top_k_dim(const PenaltyPart& part, Eigen::Index n) {
  if (part.kind() == PenaltyPart::Kind::TopK && part.k() > n - 1) {
    throw ParameterError("trimmed K = " + std::to_string(part.k()) +
                         " must be at most dim - 1 = " + std::to_string(n - 1));
  }
}

void check_mu(const PenaltyPart& part, double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw ParameterError("smoothing parameter mu must be positive and finite");
  }
  const double eta = part.weak_modulus();
  if (eta > 0.0 && mu * eta >= 1.0) {
    throw DomainError("mu = " + std::to_string(mu) + " must be below 1/eta = " +
                      std::to_string(1.0 / eta) + " for " + part.describe());
  }
}

double sum_largest_abs(const Vector& z, int k) {
  if (k <= 0) return 0.0;
  std::vector<double> a(static_cast<std::size_t>(z.size()));
  for (Eigen::Index i = 0; i < z.size(); ++i) a[static_cast<std::size_t>(i)] = std::abs(z[i]);
  std::nth_element(a.begin(), a.begin() + (k - 1), a.end(), std::greater<>());
  double s = 0.0;
  for (int i = 0; i < k; ++i) s += a[static_cast<std::size_t>(i)];
  return s;
}

}  // namespace

PenaltyPart PenaltyPart::l1() { return {Kind::L1, 0.0, 0.0, 0}; }

PenaltyPart PenaltyPart::mcp(double lambda, double beta) {
  require_positive_finite(lambda, "MCP lambda");
  require_positive_finite(beta, "MCP beta");
  return {Kind::MCP, lambda, beta, 0};
}

PenaltyPart PenaltyPart::capped_subtrahend(double beta) {
  require_positive_finite(beta, "capped l1 beta");
  return {Kind::CappedSubtrahend, 0.0, beta, 0};
}

PenaltyPart PenaltyPart::top_k(int k) {
  if (k < 0) throw ParameterError("trimmed K must be nonnegative");
  return {Kind::TopK, 0.0, 0.0, k};
}

PenaltyPart PenaltyPart::zero() { return {Kind::Zero, 0.0, 0.0, 0}; }

double PenaltyPart::weak_modulus() const { return kind_ == Kind::MCP ? 1.0 / beta_ : 0.0; }

double PenaltyPart::lipschitz(Eigen::Index n) const {
  const double rn = std::sqrt(static_cast<double>(n));
  switch (kind_) {
    case Kind::L1:
    case Kind::CappedSubtrahend:
      return rn;
    case Kind::MCP:
      return lambda_ * rn;
    case Kind::TopK:
      return std::sqrt(static_cast<double>(k_));
    case Kind::Zero:
      return 0.0;
  }
  return 0.0;
}

std::string PenaltyPart::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::L1:
      os << "l1";
      break;
    case Kind::MCP:
      os << "mcp(lambda=" << lambda_ << ",beta=" << beta_ << ")";
      break;
    case Kind::CappedSubtrahend:
      os << "capped_subtrahend(beta=" << beta_ << ")";
      break;
    case Kind::TopK:
      os << "top_k(K=" << k_ << ")";
      break;
    case Kind::Zero:
      os << "zero";
      break;
  }
  return os.str();
}

DcPenalty::DcPenalty(PenaltyPart f, PenaltyPart g)
    : f_(std::move(f)), g_(std::move(g)), eta_(std::max(f_.weak_modulus(), g_.weak_modulus())) {}

DcPenalty DcPenalty::l1() { return {PenaltyPart::l1(), PenaltyPart::zero()}; }
DcPenalty DcPenalty::mcp(double lambda, double beta) {
  return {PenaltyPart::mcp(lambda, beta), PenaltyPart::zero()};
}
DcPenalty DcPenalty::capped_l1(double beta) {
  return {PenaltyPart::l1(), PenaltyPart::capped_subtrahend(beta)};
}
DcPenalty DcPenalty::trimmed_l1(int k) { return {PenaltyPart::l1(), PenaltyPart::top_k(k)}; }

double DcPenalty::value(const Vector& z) const { return eval_part(f_, z) - eval_part(g_, z); }

namespace {

// Per-entry closed forms for the separable kinds.
double entry_value(const PenaltyPart& part, double t) {
  const double a = std::abs(t);
  switch (part.kind()) {
    case PenaltyPart::Kind::L1:
      return a;
    case PenaltyPart::Kind::MCP: {
      const double lam = part.lambda();
      const double beta = part.beta();
      return a <= beta * lam ? lam * a - a * a / (2.0 * beta) : 0.5 * beta * lam * lam;
    }
    case PenaltyPart::Kind::CappedSubtrahend:
      return std::max(a - part.beta(), 0.0);
    default:
      return 0.0;
  }
}

double entry_prox(const PenaltyPart& part, double t, double mu) {
  const double a = std::abs(t);
  switch (part.kind()) {
    case PenaltyPart::Kind::L1:
      return sign(t) * std::max(a - mu, 0.0);
    case PenaltyPart::Kind::MCP: {
      const double lam = part.lambda();
      const double beta = part.beta();
      if (a <= mu * lam) return 0.0;
      if (a <= beta * lam) return sign(t) * (a - mu * lam) / (1.0 - mu / beta);
      return t;
    }
    case PenaltyPart::Kind::CappedSubtrahend: {
      const double beta = part.beta();
      if (a <= beta) return t;
      if (a <= beta + mu) return sign(t) * beta;
      return t - mu * sign(t);
    }
    default:
      return t;
  }
}

// (t - prox(t)) / mu in forms that avoid the cancellation in t - prox(t) when
// |t| is large; outlier residuals can reach 1e12.
double entry_grad(const PenaltyPart& part, double t, double mu) {
  const double a = std::abs(t);
  switch (part.kind()) {
    case PenaltyPart::Kind::L1:
      return std::clamp(t / mu, -1.0, 1.0);
    case PenaltyPart::Kind::MCP: {
      const double lam = part.lambda();
      const double beta = part.beta();
      if (a <= mu * lam) return t / mu;
      if (a <= beta * lam) return sign(t) * (lam - a / beta) / (1.0 - mu / beta);
      return 0.0;
    }
    case PenaltyPart::Kind::CappedSubtrahend: {
      const double beta = part.beta();
      if (a <= beta) return 0.0;
      if (a <= beta + mu) return sign(t) * (a - beta) / mu;
      return sign(t);
    }
    default:
      return 0.0;
  }
}

}  // namespace

double eval_part(const PenaltyPart& part, const Vector& z) {
  check_top_k_dim(part, z.size());
  if (part.kind() == PenaltyPart::Kind::TopK) return sum_largest_abs(z, part.k());
  if (part.kind() == PenaltyPart::Kind::Zero) return 0.0;
  double s = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) s += entry_value(part, z[i]);
  return s;
}

Vector project_box_l1(const Vector& z, int k) {
  if (k < 1) throw ParameterError("projection radius K must be at least 1");
  const Eigen::Index n = z.size();
  const Eigen::ArrayXd a = z.array().abs();

  // phi(theta) = sum_i min(max(a_i - theta, 0), 1) is piecewise linear and
  // nonincreasing; each entry contributes slope -1 on (max(a_i - 1, 0), a_i).
  double theta = 0.0;
  const double radius = static_cast<double>(k);
  if (a.min(1.0).sum() > radius) {
    // phi(theta) >= #{a_i >= theta + 1}, so phi(a_(K+1) - 1) >= K + 1 and the
    // root lies beyond it; entries with a_i below that bound contribute 0 there.
    double start = 0.0;
    if (k < n) {
      std::vector<double> sorted(a.begin(), a.end());
      std::nth_element(sorted.begin(), sorted.begin() + k, sorted.end(), std::greater<>());
      start = std::max(sorted[static_cast<std::size_t>(k)] - 1.0, 0.0);
    }
    double value = 0.0;
    int slope = 0;
    std::vector<std::pair<double, int>> events;  // (breakpoint, slope change)
    for (Eigen::Index i = 0; i < n; ++i) {
      if (a[i] <= start) continue;
      const double lo = std::max(a[i] - 1.0, 0.0);
      value += std::min(a[i] - start, 1.0);
      if (lo <= start) {
        --slope;
      } else {
        events.emplace_back(lo, -1);
      }
      events.emplace_back(a[i], +1);
    }
    std::sort(events.begin(), events.end());
    theta = start;
    bool found = false;
    for (const auto& [at, delta] : events) {
      const double next = value + slope * (at - theta);
      if (slope < 0 && next <= radius) {
        theta += (value - radius) / static_cast<double>(-slope);
        found = true;
        break;
      }
      value = next;
      theta = at;
      slope += delta;
    }
    // phi reaches 0 at the last breakpoint, so the root is always bracketed.
    if (!found) theta = events.back().first;
  }

  Vector w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    w[i] = sign(z[i]) * std::min(std::max(a[i] - theta, 0.0), 1.0);
  }
  return w;
}

Vector prox_part(const PenaltyPart& part, const Vector& z, double mu) {
  check_mu(part, mu);
  check_top_k_dim(part, z.size());
  switch (part.kind()) {
    case PenaltyPart::Kind::TopK:
      if (part.k() == 0) return z;
      // Moreau decomposition: the conjugate of the top-K sum is the indicator
      // of {|w|_inf <= 1, |w|_1 <= K}.
      return z - mu * project_box_l1(z / mu, part.k());
    case PenaltyPart::Kind::Zero:
      return z;
    default: {
      Vector p(z.size());
      for (Eigen::Index i = 0; i < z.size(); ++i) p[i] = entry_prox(part, z[i], mu);
      return p;
    }
  }
}

namespace {

// Envelope entries are kept in the form slope * |t| + offset, slope in {0, 1}.
// Where two parts are both in their linear regime the |t| terms then cancel
// exactly in f_mu - g_mu, instead of leaving the rounding error of |t|.
struct Affine {
  double slope;
  double offset;
};

Affine entry_envelope(const PenaltyPart& part, double t, double mu) {
  const double a = std::abs(t);
  switch (part.kind()) {
    case PenaltyPart::Kind::L1:
      if (a >= mu) return {1.0, -0.5 * mu};
      return {0.0, t * t / (2.0 * mu)};
    case PenaltyPart::Kind::MCP: {
      const double lam = part.lambda();
      const double beta = part.beta();
      if (a <= mu * lam) return {0.0, t * t / (2.0 * mu)};
      if (a <= beta * lam) {
        const double p = (a - mu * lam) / (1.0 - mu / beta);
        const double d = a - p;
        return {0.0, lam * p - p * p / (2.0 * beta) + d * d / (2.0 * mu)};
      }
      return {0.0, 0.5 * beta * lam * lam};
    }
    case PenaltyPart::Kind::CappedSubtrahend: {
      const double beta = part.beta();
      if (a <= beta) return {0.0, 0.0};
      if (a <= beta + mu) {
        const double d = a - beta;
        return {0.0, d * d / (2.0 * mu)};
      }
      return {1.0, -beta - 0.5 * mu};
    }
    default:
      return {0.0, 0.0};
  }
}

// The top-K sum is the support function of C = {|w|_inf <= 1, |w|_1 <= K}, so
// its envelope is sum_i w_i z_i - mu w_i^2 / 2 with w = P_C(z / mu).
Affine top_k_entry(double t, double w, double mu) {
  if (std::abs(w) == 1.0) return {1.0, -0.5 * mu};
  return {0.0, w * t - 0.5 * mu * w * w};
}

// Envelope gradient weights of a TopK part (zeros for K = 0).
Vector top_k_weights(const PenaltyPart& part, const Vector& z, double mu) {
  if (part.k() == 0) return Vector::Zero(z.size());
  return project_box_l1(z / mu, part.k());
}

void check_envelope_args(const PenaltyPart& part, const Vector& z, double mu) {
  check_mu(part, mu);
  check_top_k_dim(part, z.size());
}

}  // namespace

double moreau_value(const PenaltyPart& part, const Vector& z, double mu) {
  check_envelope_args(part, z, mu);
  double s = 0.0;
  if (part.kind() == PenaltyPart::Kind::TopK) {
    const Vector w = top_k_weights(part, z, mu);
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const Affine e = top_k_entry(z[i], w[i], mu);
      s += e.slope * std::abs(z[i]) + e.offset;
    }
    return s;
  }
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const Affine e = entry_envelope(part, z[i], mu);
    s += e.slope * std::abs(z[i]) + e.offset;
  }
  return s;
}

MoreauEval moreau_value_grad(const PenaltyPart& part, const Vector& z, double mu) {
  check_envelope_args(part, z, mu);
  if (part.kind() == PenaltyPart::Kind::TopK) {
    // grad = (z - prox) / mu is the projection itself.
    Vector w = top_k_weights(part, z, mu);
    double value = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const Affine e = top_k_entry(z[i], w[i], mu);
      value += e.slope * std::abs(z[i]) + e.offset;
    }
    return {value, std::move(w)};
  }
  double value = 0.0;
  Vector grad(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const Affine e = entry_envelope(part, z[i], mu);
    value += e.slope * std::abs(z[i]) + e.offset;
    grad[i] = entry_grad(part, z[i], mu);
  }
  return {value, std::move(grad)};
}

DcEnvelope dc_moreau_value(const DcPenalty& penalty, const Vector& z, double mu) {
  const PenaltyPart& f = penalty.f();
  const PenaltyPart& g = penalty.g();
  check_envelope_args(f, z, mu);
  check_envelope_args(g, z, mu);
  const bool f_top = f.kind() == PenaltyPart::Kind::TopK;
  const bool g_top = g.kind() == PenaltyPart::Kind::TopK;
  const Vector wf = f_top ? top_k_weights(f, z, mu) : Vector();
  const Vector wg = g_top ? top_k_weights(g, z, mu) : Vector();
  DcEnvelope out{0.0, 0.0};
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const Affine ef = f_top ? top_k_entry(z[i], wf[i], mu) : entry_envelope(f, z[i], mu);
    const Affine eg = g_top ? top_k_entry(z[i], wg[i], mu) : entry_envelope(g, z[i], mu);
    const double lin = (ef.slope - eg.slope) * std::abs(z[i]);
    out.value += lin + (ef.offset - eg.offset);
    out.scale += std::abs(lin) + std::abs(ef.offset) + std::abs(eg.offset);
  }
  return out;
}

Vector moreau_grad(const PenaltyPart& part, const Vector& z, double mu) {
  return moreau_value_grad(part, z, mu).grad;
}

double moreau_grad_lipschitz(const PenaltyPart& part, double mu) {
  check_mu(part, mu);
  const double eta = part.weak_modulus();
  if (eta == 0.0) return 1.0 / mu;
  return std::max(1.0 / mu, eta / (1.0 - eta * mu));
}

}  // namespace dcsmooth

#include "dcsmooth/smoothing.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace dcsmooth {

namespace {

void check_x(const CompositeProblem& prob, const Vector& x) {
  if (x.size() != prob.d()) {
    throw ParameterError("x has dimension " + std::to_string(x.size()) + ", expected " +
                         std::to_string(prob.d()));
  }
}

Vector map_value(const CompositeProblem& prob, const Vector& x) {
  Vector z = prob.s().value(x);
  if (z.size() != prob.n()) {
    throw ParameterError("S(x) has dimension " + std::to_string(z.size()) + ", expected " +
                         std::to_string(prob.n()));
  }
  return z;
}

void check_mu(const CompositeProblem& prob, double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw ParameterError("smoothing parameter mu must be positive and finite");
  }
  if (mu > prob.mu_cap()) {
    throw DomainError("mu = " + std::to_string(mu) + " exceeds 1/(2 eta) = " +
                      std::to_string(prob.mu_cap()));
  }
}

}  // namespace

SmoothTerm SmoothTerm::zero() {
  return {[](const Vector&) { return 0.0; },
          [](const Vector& x) -> Vector { return Vector::Zero(x.size()); }, 0.0};
}

SmoothTerm SmoothTerm::half_squared_norm() {
  return {[](const Vector& x) { return 0.5 * x.squaredNorm(); },
          [](const Vector& x) -> Vector { return x; }, 1.0};
}

SmoothMap SmoothMap::identity() {
  return {[](const Vector& x) -> Vector { return x; },
          [](const Vector&, const Vector& v) -> Vector { return v; },
          {}};
}

CompositeProblem::CompositeProblem(SmoothTerm h, SmoothMap s, DcPenalty penalty, Eigen::Index d,
                                   Eigen::Index n)
    : h_(std::move(h)), s_(std::move(s)), penalty_(std::move(penalty)), d_(d), n_(n) {
  if (d_ < 1 || n_ < 1) throw ParameterError("problem dimensions must be positive");
  if (!h_.value || !h_.grad || !s_.value || !s_.adjoint) {
    throw ParameterError("composite problem callbacks must all be set");
  }
}

double CompositeProblem::mu_cap() const {
  const double eta = penalty_.eta();
  return eta > 0.0 ? 1.0 / (2.0 * eta) : std::numeric_limits<double>::infinity();
}

double objective_value(const CompositeProblem& prob, const Vector& x) {
  check_x(prob, x);
  return prob.h().value(x) + prob.penalty().value(map_value(prob, x));
}

SurrogateValue surrogate_value_at(const CompositeProblem& prob, const Vector& x, const Vector& z,
                                  double mu) {
  check_mu(prob, mu);
  if (z.size() != prob.n()) throw ParameterError("S(x) has the wrong dimension");
  const double hv = prob.h().value(x);
  const DcEnvelope env = dc_moreau_value(prob.penalty(), z, mu);
  return {hv + env.value, std::abs(hv) + env.scale};
}

double surrogate_value(const CompositeProblem& prob, const Vector& x, double mu) {
  check_x(prob, x);
  check_mu(prob, mu);
  return surrogate_value_at(prob, x, map_value(prob, x), mu).value;
}

RayFn make_ray(const CompositeProblem& prob, const Vector& x, const Vector& dir) {
  check_x(prob, x);
  if (dir.size() != prob.d()) throw ParameterError("search direction has the wrong dimension");
  if (prob.s().ray) return prob.s().ray(x, dir);
  return [&prob, x, dir](double gamma) -> Vector { return map_value(prob, x - gamma * dir); };
}

SurrogateEval surrogate_value_grad(const CompositeProblem& prob, const Vector& x, double mu) {
  check_x(prob, x);
  check_mu(prob, mu);
  const Vector z = map_value(prob, x);
  const MoreauEval fe = moreau_value_grad(prob.penalty().f(), z, mu);
  const MoreauEval ge = moreau_value_grad(prob.penalty().g(), z, mu);
  Vector grad = prob.h().grad(x) + prob.s().adjoint(x, fe.grad - ge.grad);
  if (grad.size() != prob.d()) {
    throw ParameterError("DS(x)^T v has dimension " + std::to_string(grad.size()) +
                         ", expected " + std::to_string(prob.d()));
  }
  const double hv = prob.h().value(x);
  const DcEnvelope env = dc_moreau_value(prob.penalty(), z, mu);
  return {hv + env.value, std::move(grad), std::abs(hv) + env.scale};
}

Vector surrogate_grad(const CompositeProblem& prob, const Vector& x, double mu) {
  return surrogate_value_grad(prob, x, mu).grad;
}

}  // namespace dcsmooth

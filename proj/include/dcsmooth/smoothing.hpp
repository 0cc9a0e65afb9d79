#pragma once

#include <functional>
#include <limits>

#include "dcsmooth/penalty.hpp"

namespace dcsmooth {

/// Smooth scalar term h with a declared Lipschitz constant for its gradient.
struct SmoothTerm {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> grad;
  double grad_lipschitz = 0.0;

  static SmoothTerm zero();
  /// 0.5 * |x|^2
  static SmoothTerm half_squared_norm();
};

/// gamma -> S(x - gamma * dir) for a fixed (x, dir).
using RayFn = std::function<Vector(double)>;

/// Smooth inner map S: R^d -> R^n, exposed as value and Jacobian-adjoint product.
struct SmoothMap {
  std::function<Vector(const Vector&)> value;
  /// (x, v) -> DS(x)^T v
  std::function<Vector(const Vector&, const Vector&)> adjoint;
  /// Optional. (x, dir) -> ray evaluator that reuses work across the trial
  /// points of a line search. Defaults to calling `value` at x - gamma * dir.
  std::function<RayFn(const Vector&, const Vector&)> ray;

  static SmoothMap identity();
};

/// minimize h(x) + (f - g)(S(x)) over x in R^d.
class CompositeProblem {
 public:
  CompositeProblem(SmoothTerm h, SmoothMap s, DcPenalty penalty, Eigen::Index d, Eigen::Index n);

  const SmoothTerm& h() const { return h_; }
  const SmoothMap& s() const { return s_; }
  const DcPenalty& penalty() const { return penalty_; }
  Eigen::Index d() const { return d_; }
  Eigen::Index n() const { return n_; }

  /// Largest admissible smoothing parameter, 1/(2 eta); +inf when eta = 0.
  double mu_cap() const;

 private:
  SmoothTerm h_;
  SmoothMap s_;
  DcPenalty penalty_;
  Eigen::Index d_;
  Eigen::Index n_;
};

double objective_value(const CompositeProblem& prob, const Vector& x);

/// F^<mu>(x) = h(x) + f_mu(S(x)) - g_mu(S(x)), mu in (0, 1/(2 eta)].
double surrogate_value(const CompositeProblem& prob, const Vector& x, double mu);

/// grad h(x) + DS(x)^T (grad f_mu(S(x)) - grad g_mu(S(x))).
Vector surrogate_grad(const CompositeProblem& prob, const Vector& x, double mu);

struct SurrogateEval {
  double value;
  Vector grad;
  /// |h(x)| plus the per-entry magnitudes of f_mu - g_mu at S(x); bounds the
  /// rounding error of `value`.
  double scale;
};
/// Value and gradient sharing one evaluation of S and the two proxes.
SurrogateEval surrogate_value_grad(const CompositeProblem& prob, const Vector& x, double mu);

struct SurrogateValue {
  double value;
  double scale;
};
/// Surrogate value at x given z = S(x) computed by the caller.
SurrogateValue surrogate_value_at(const CompositeProblem& prob, const Vector& x, const Vector& z,
                                  double mu);

/// Ray evaluator for prob.s() at (x, dir), falling back to `value`.
RayFn make_ray(const CompositeProblem& prob, const Vector& x, const Vector& dir);

}  // namespace dcsmooth

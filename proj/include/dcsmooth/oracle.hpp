#pragma once

#include <functional>

#include "dcsmooth/penalty.hpp"

/// Brute-force verifiers. They share no code path with the closed forms they
/// check and are slow by design; use them in tests and the `check` command.
namespace dcsmooth::oracle {

struct OracleConfig {
  double section_tol = 1e-10;
  double fd_step = 1e-6;
  long dykstra_max_iters = 100000;
  double dykstra_tol = 1e-10;
};

struct Interval {
  double lo;
  double hi;
};

/// Scalar function evaluated in extended precision.
using ScalarFn = std::function<long double(long double)>;

/// Independent per-entry formula of an elementwise part (L1, MCP,
/// CappedSubtrahend, Zero). Throws ParameterError for TopK.
ScalarFn elementwise_reference(const PenaltyPart& part);

/// [t - mu L - 1, t + mu L + 1] for a scalar function with Lipschitz constant L.
Interval default_bracket(double t, double mu, double lipschitz);

/// argmin_w phi(w) + (w - t)^2 / (2 mu) by golden-section search on the
/// bracket, then a local grid refinement. Throws OracleError when the
/// minimizer sits on the bracket boundary.
double prox_1d_oracle(const ScalarFn& phi, double t, double mu, Interval bracket,
                      const OracleConfig& cfg = {});

/// Same minimization by successive zoomed uniform grids; used to cross-check
/// the golden-section result.
double prox_1d_grid(const ScalarFn& phi, double t, double mu, Interval bracket,
                    int points = 2001, int levels = 8);

/// Dykstra's alternating projections onto {|w|_inf <= 1} and {|w|_1 <= k}.
Vector dykstra_project(const Vector& z, int k, const OracleConfig& cfg = {});

/// Euclidean projection onto {|w|_1 <= radius} by sorting.
Vector project_l1_ball(const Vector& z, double radius);

/// Central differences (F(x + h e_i) - F(x - h e_i)) / (2h).
Vector fd_grad(const std::function<double(const Vector&)>& f, const Vector& x, double h = 1e-6);

}  // namespace dcsmooth::oracle

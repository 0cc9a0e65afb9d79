#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dcsmooth/oracle.hpp"
#include "dcsmooth/phase_retrieval.hpp"

namespace dcsmooth {

/// Outcome of one verification suite.
struct SuiteReport {
  std::string name;
  bool passed = true;
  long cases = 0;
  double worst = 0.0;            ///< largest observed error (suite-specific metric)
  double threshold = 0.0;        ///< the bound `worst` is compared against
  std::string counterexample;    ///< first failure: inputs, expected, got
};

struct CheckOptions {
  std::uint64_t seed = 0;
  int samples = 200;          ///< random cases per penalty for the prox and projection suites
  int grad_instances = 20;    ///< random instances for the gradient suite
  double fd_step = 1e-6;
  bool corrupt_prox = false;  ///< negative control: shifts every checked prox value by 1e-3
  PenaltyConfig penalty{"l1", 0, 0, 0};  ///< penalty of the Armijo replay solve
  SolverConfig solver;
};

/// Elementwise parts the prox suite covers: L1, MCP(1,2000), MCP(2,500), CappedSubtrahend(1000).
std::vector<PenaltyPart> reference_elementwise_parts();

/// Half-width scale of the sampled prox arguments: 1 for L1, max(1, beta lambda)
/// for MCP, beta + 1 for CappedSubtrahend, so every branch gets hit.
double prox_sample_scale(const PenaltyPart& part);

/// Threshold multiplier for central differences with step h: the truncation
/// error is O(h^2), so bounds tuned at h = 1e-6 grow by max(1, (h / 1e-6)^2).
double fd_threshold_scale(double h);

inline constexpr double kProxTol = 1e-6;
inline constexpr double kTopKTol = 1e-5;
inline constexpr double kGradRelTol = 1e-4;
inline constexpr double kGradAbsTol = 1e-7;
inline constexpr double kArmijoSlackTol = 1e-10;

/// Closed-form prox against golden-section minimization of the defining problem.
SuiteReport check_prox(const CheckOptions& opt);
/// TopK prox against z - mu * dykstra_project(z / mu, K), n in 2..8, K in 1..n-1.
SuiteReport check_projection(const CheckOptions& opt);
/// surrogate_grad against central differences of surrogate_value on random
/// phase retrieval instances (d = 10, n = 40), four penalty kinds, mu in {1, 0.1, 0.01}.
SuiteReport check_gradient(const CheckOptions& opt);
/// Solves a small instance and replays every accepted step's Armijo inequality.
SuiteReport check_armijo(const CheckOptions& opt);
/// Ratio bound and cap of the smoothing schedule over max_iters steps.
SuiteReport check_schedule(const CheckOptions& opt);

std::vector<SuiteReport> run_all_checks(const CheckOptions& opt);

}  // namespace dcsmooth

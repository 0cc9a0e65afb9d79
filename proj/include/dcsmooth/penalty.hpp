#pragma once

#include <Eigen/Core>
#include <string>

#include "dcsmooth/errors.hpp"

namespace dcsmooth {

using Vector = Eigen::VectorXd;

/// One weakly convex, prox-friendly building block of a DC penalty.
///
/// Kinds:
///   L1               sum |z_i|
///   MCP(l, b)        sum r(z_i), r(t) = l|t| - t^2/(2b) for |t| <= b*l, b*l^2/2 otherwise
///   CappedSubtrahend sum max(|z_i| - b, 0)
///   TopK(K)          sum of the K largest |z_i|
///   Zero             0
///
/// Instances are immutable; construct through the named factories.
class PenaltyPart {
 public:
  enum class Kind { L1, MCP, CappedSubtrahend, TopK, Zero };

  static PenaltyPart l1();
  static PenaltyPart mcp(double lambda, double beta);
  static PenaltyPart capped_subtrahend(double beta);
  static PenaltyPart top_k(int k);
  static PenaltyPart zero();

  Kind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  double beta() const { return beta_; }
  int k() const { return k_; }

  /// Weak-convexity modulus: 1/beta for MCP, 0 for every other kind.
  double weak_modulus() const;
  /// Lipschitz constant of the part on R^n.
  double lipschitz(Eigen::Index n) const;
  bool is_convex() const { return weak_modulus() == 0.0; }

  std::string describe() const;

 private:
  PenaltyPart(Kind kind, double lambda, double beta, int k)
      : kind_(kind), lambda_(lambda), beta_(beta), k_(k) {}

  Kind kind_;
  double lambda_ = 0.0;
  double beta_ = 0.0;
  int k_ = 0;
};

/// phi = f - g with eta = max(eta_f, eta_g).
class DcPenalty {
 public:
  DcPenalty(PenaltyPart f, PenaltyPart g);

  static DcPenalty l1();
  static DcPenalty mcp(double lambda, double beta);
  static DcPenalty capped_l1(double beta);
  static DcPenalty trimmed_l1(int k);

  const PenaltyPart& f() const { return f_; }
  const PenaltyPart& g() const { return g_; }
  double eta() const { return eta_; }

  double value(const Vector& z) const;

 private:
  PenaltyPart f_;
  PenaltyPart g_;
  double eta_;
};

double eval_part(const PenaltyPart& part, const Vector& z);

/// argmin_w part(w) + |w - z|^2 / (2 mu). Requires 0 < mu < 1/eta_part.
Vector prox_part(const PenaltyPart& part, const Vector& z, double mu);

/// Euclidean projection onto {w : |w|_inf <= 1, |w|_1 <= k}.
Vector project_box_l1(const Vector& z, int k);

double moreau_value(const PenaltyPart& part, const Vector& z, double mu);
Vector moreau_grad(const PenaltyPart& part, const Vector& z, double mu);
double moreau_grad_lipschitz(const PenaltyPart& part, double mu);

/// Envelope value and gradient from a single prox evaluation.
struct MoreauEval {
  double value;
  Vector grad;
};
MoreauEval moreau_value_grad(const PenaltyPart& part, const Vector& z, double mu);

struct DcEnvelope {
  double value;  ///< f_mu(z) - g_mu(z)
  double scale;  ///< sum of the magnitudes of the per-entry terms; bounds the rounding error
};
/// f_mu(z) - g_mu(z) accumulated entry by entry, so that entries where f and g
/// grow at the same linear rate cancel exactly.
DcEnvelope dc_moreau_value(const DcPenalty& penalty, const Vector& z, double mu);

}  // namespace dcsmooth

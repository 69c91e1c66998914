#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qpreduce/normal_form.hpp"

namespace qpr {

struct LPVerification {
  double q0_identity_error = 0.0;
  double product_residual = 0.0;
};

// Quasi-periodic coordinate change x = Q(t) u with Q(0) = I and u evolving
// under a constant matrix. Q is stored as real series over a basis holding the
// parametric frequencies plus the corrected mode frequencies; the complex
// modal correction (I + qbar(t)) over the parametric basis is kept alongside
// because the reduction stages work in that frame.
struct LPTransform {
  int n = 0;
  BasisPtr qbasis;
  BasisPtr param_basis;
  std::vector<std::vector<QPSeries>> Q;     // n x n real series over qbasis
  std::vector<std::vector<QPSeries>> qbar;  // n x n complex series over param_basis
  Eigen::MatrixXcd Mp, MpInv;
  Eigen::MatrixXcd K;  // (I + qbar(0))^{-1}
  Eigen::VectorXcd jbar;
  std::vector<int> conj_partner;
  std::vector<int> mode_slot;  // qbasis slot carrying |Im jbar_j|
  std::vector<int> mode_sign;
  int n_param_slots = 0;
  LPVerification verification;

  Eigen::MatrixXd eval(double t) const;
  Eigen::MatrixXd eval_dot(double t) const;
  // Mp (I + qbar(t)): maps the complex LTI frame to physical coordinates.
  Eigen::MatrixXcd modal_map(double t) const;
  // Complex LTI frame value of a physical state: K Mp^{-1} x.
  Eigen::VectorXcd modal_state(const Eigen::VectorXd& x) const;

  static LPTransform identity(int n);
};

// Builds Q from the composed near-identity transform: fictitious variables are
// replaced by their closed-form harmonics, the result is composed with the
// modal matrix, and a constant-similarity gauge factor pins Q(0) = I exactly.
LPTransform assemble_q(const NormalFormResult& nf, const AugmentedSystem& aug,
                       const Spectrum& spec, int trunc_order);

}  // namespace qpr

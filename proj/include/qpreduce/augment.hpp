#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qpreduce/statepoly.hpp"

namespace qpr {

enum class PhaseKind { Cos, Sin };

struct ParametricTerm {
  int row = 0;
  int col = 0;
  double amplitude = 0.0;
  int freq_slot = 0;  // index into the parametric FrequencyBasis
  PhaseKind kind = PhaseKind::Cos;
};

// Linear system xdot = (B0 + B(t)) x with B(t) built from cos/sin entries at
// the basis frequencies.
struct QPLinearSystem {
  Eigen::MatrixXd B0;
  std::vector<ParametricTerm> terms;
  BasisPtr basis;

  int dim() const { return static_cast<int>(B0.rows()); }
  void validate() const;
  // B0 + B(t)
  Eigen::MatrixXd eval(double t) const;
};

struct FictPair {
  int p_index = 0;  // augmented index of the sin-like state
  int q_index = 0;  // augmented index of the cos-like state
  int freq_slot = 0;
};

// Autonomous form: xbar = [x, p_1, q_1, ..., p_k, q_k], with
// pdot_i = w_i q_i, qdot_i = -w_i p_i and initial values (p_i, q_i) = (0, 1).
// Every parametric entry becomes a quadratic monomial coupling a fictitious
// state with a physical one.
struct AugmentedSystem {
  Eigen::MatrixXd Bbar0;
  std::vector<QPStatePoly> coupling;  // one polynomial per augmented component
  std::vector<FictPair> fict;
  int n_phys = 0;
  BasisPtr basis;

  int dim() const { return static_cast<int>(Bbar0.rows()); }
  Eigen::VectorXd initial_state(const Eigen::VectorXd& x0) const;
};

AugmentedSystem augment(const QPLinearSystem& sys);

// Modal data of a constant matrix: B = M J M^{-1} with J = diag(eigenvalues).
// Ordering: physical pairs first by ascending |Im| (then |Re|), fictitious
// pairs last in basis order; conjugate partners adjacent, negative imaginary
// part first. conj_partner[i] gives the index of the paired eigenvalue.
struct Spectrum {
  Eigen::MatrixXcd M;
  Eigen::MatrixXcd Minv;
  Eigen::VectorXcd eigenvalues;
  int n_phys = 0;  // leading eigenvalues belonging to the physical block
  std::vector<int> conj_partner;

  Eigen::MatrixXcd J() const { return eigenvalues.asDiagonal(); }
  double reconstruction_error(const Eigen::MatrixXd& B) const;
};

// Defectiveness is detected through the conditioning of the eigenvector
// matrix (threshold 1e8) and reported as NotSemiSimpleError.
Spectrum modal(const Eigen::MatrixXd& B);
Spectrum modal(const AugmentedSystem& aug);

// Modal initial values of the fictitious pair states for (p, q)(0) = (0, 1).
// Slot 0 holds the -iw coordinate, slot 1 the +iw coordinate.
std::pair<Complex, Complex> fictitious_modal_init();

}  // namespace qpr

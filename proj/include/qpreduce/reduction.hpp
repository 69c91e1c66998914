#pragma once

#include <optional>

#include "qpreduce/inverse.hpp"
#include "qpreduce/simulate.hpp"

namespace qpr {

struct NonlinearMonomial {
  int target = 0;
  StateMonomial exponents;  // over physical states
  double coefficient = 0.0;
};

struct ForcingHarmonic {
  int target = 0;
  double amplitude = 0.0;
  int forcing_slot = 0;  // index into the forcing frequency list
  PhaseKind kind = PhaseKind::Cos;
};

struct TransformOptions {
  int max_degree = 5;
  int trunc_order = 5;
  double fit_span = 100.0;  // least-squares window for the transformed forcing
  double fit_step = 0.01;
};

// The system in the complex LTI frame: vdot = diag(jbar) v + w(v, t) + F(t).
// Slot layout of the basis: [parametric | forcing | mode frequencies]; w and
// the steady manifold never carry mode-slot content.
struct TransformedSystem {
  Eigen::VectorXcd jbar;
  std::vector<QPStatePoly> w;
  std::vector<QPSeries> forcing;
  BasisPtr basis;
  int n_param = 0;
  int n_forcing = 0;
  std::vector<int> conj_partner;
  std::vector<int> mode_slot;  // per modal component
  std::vector<int> mode_sign;
  LPTransform lp;
  double forcing_fit_rms = 0.0;
  double forcing_rms = 0.0;

  int dim() const { return static_cast<int>(jbar.size()); }
  Eigen::VectorXcd initial_modal(const Eigen::VectorXd& x0) const {
    return lp.modal_state(x0);
  }
  Eigen::VectorXcd eval_forcing(double t) const;
  ComplexRhs rhs() const;  // full transformed dynamics
};

TransformedSystem build_transformed(const LPTransform& lp,
                                    const std::vector<NonlinearMonomial>& nonlinear,
                                    const std::vector<double>& forcing_freqs,
                                    const std::vector<std::string>& forcing_labels,
                                    const std::vector<ForcingHarmonic>& forcing,
                                    const TransformOptions& opt);

struct PartitionedSystem {
  Eigen::VectorXcd Jr, Js;
  std::vector<QPStatePoly> wr, ws;  // still over all n modal variables
  std::vector<QPSeries> Fr, Fs;
  std::vector<int> master_indices;
  std::vector<int> slave_indices;
  BasisPtr basis;
  int n_param = 0;
  int n_forcing = 0;
  std::vector<int> conj_partner;  // over the full modal frame
  std::vector<int> mode_slot;
  std::vector<int> mode_sign;

  int n() const { return static_cast<int>(master_indices.size() + slave_indices.size()); }
  int r() const { return static_cast<int>(master_indices.size()); }
  int s() const { return static_cast<int>(slave_indices.size()); }
  // conjugate partner within the master (resp. slave) ordering
  std::vector<int> master_conj() const;
  std::vector<int> slave_conj() const;
};

// Master set must be conjugate-closed; a split pair breaks the realness of the
// recovered response and raises PartitionError.
PartitionedSystem partition(const TransformedSystem& ts, std::vector<int> masters);

// Modes whose |Im jbar| lies nearest the first forcing frequency, pair by
// pair, ties broken toward lower indices.
std::vector<int> default_masters(const TransformedSystem& ts, int count);

struct ReducedModel {
  enum class Provenance { Linear, Manifold };
  Eigen::VectorXcd Jr;
  std::vector<QPStatePoly> wbar;  // over master variables
  std::vector<QPSeries> Fr;
  Provenance provenance = Provenance::Linear;
  std::vector<int> selector;  // master indices into the modal frame
  BasisPtr basis;

  ComplexRhs rhs() const;
};

// Slave contributions are dropped: wbar = wr with every slave variable set to
// zero, relabeled onto the master variable space.
ReducedModel reduce_linear(const PartitionedSystem& part);

// x(t_i) = modal_map(t_i) [z_r; z_s] with z_s either zero (linear route) or a
// caller-supplied map of the master states. Imaginary residue beyond 1e-6
// raises ImaginaryLeak.
using SlaveMapFn =
    std::function<Eigen::VectorXcd(double, const Eigen::VectorXcd&)>;
Trajectory recover_states(const LPTransform& lp, const PartitionedSystem& part,
                          const ComplexTrajectory& zr, const SlaveMapFn& slave_map,
                          double* max_imag_residue = nullptr);

// Exact conjugate-pair symmetry of a modal polynomial vector field.
void enforce_conjugate_structure(std::vector<QPStatePoly>& field,
                                 const std::vector<int>& partner);

}  // namespace qpr

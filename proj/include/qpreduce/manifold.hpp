#pragma once

#include <map>
#include <string>

#include "qpreduce/reduction.hpp"

namespace qpr {

struct TransientTerm {
  Complex coeff{0.0, 0.0};
  Complex lambda{0.0, 0.0};
};

// One solved block of the manifold ansatz: degree k in the master states at
// expansion order m-1. Purely temporal blocks (k = 0) may carry transient
// terms alongside the steady series so that the block vanishes at t = 0.
struct ManifoldStage {
  int k = 0;
  int m = 1;
  std::string condition_id;
  std::vector<QPStatePoly> h;                          // per slave component
  std::vector<std::vector<TransientTerm>> transients;  // per slave component
};

struct ManifoldMap {
  std::vector<ManifoldStage> stages;
  int epsilon_order_used = 0;
  bool keep_transients = true;
  int r = 0, s = 0;
  BasisPtr basis;
  std::vector<int> slave_mode_slot;
  std::vector<int> slave_mode_sign;

  const ManifoldStage* stage(int k, int m) const;
  // summed steady map per slave component
  std::vector<QPStatePoly> steady() const;
  // steady map plus transients rendered as mode-slot harmonics
  std::vector<QPStatePoly> full_map() const;
  Eigen::VectorXcd eval(double t, const Eigen::VectorXcd& zr,
                        bool with_transients) const;
};

struct ReducibilityCheck {
  std::string condition_id;
  int component = 0;  // slave position
  StateMonomial mono;
  FreqIndex p;
  double divisor_abs = 0.0;
  bool violated = false;
};

struct ReducibilityReport {
  std::vector<ReducibilityCheck> checks;
  double tol = 0.0;
  double min_divisor = std::numeric_limits<double>::infinity();
  bool any_violated() const;
};

struct ManifoldOptions {
  double tol = 1e-4;
  int eps_order = 2;  // highest expansion order solved (0, 1 or 2)
  bool keep_transients = true;
};

// Solve a single (k, m) block given the already-solved blocks. Small divisors
// raise LinearResonance at the forced block (0,1) and ReducibilityViolation
// elsewhere; every divisor is recorded in the report first.
ManifoldStage solve_stage(const PartitionedSystem& part,
                          const std::vector<ManifoldStage>& solved, int k, int m,
                          double tol, bool keep_transients,
                          ReducibilityReport& report);

ManifoldStage solve_h01(const PartitionedSystem& part, double tol,
                        bool keep_transients, ReducibilityReport& report);
// blocks (2,2), (1,2), (0,2) in solve order
std::vector<ManifoldStage> solve_order1(const PartitionedSystem& part,
                                        const std::vector<ManifoldStage>& lower,
                                        double tol, ReducibilityReport& report,
                                        bool keep_transients = true);
// blocks (3,3), (2,3), (1,3), (0,3) in solve order
std::vector<ManifoldStage> solve_order2(const PartitionedSystem& part,
                                        const std::vector<ManifoldStage>& lower,
                                        double tol, ReducibilityReport& report,
                                        bool keep_transients = true);

ManifoldMap solve_manifold(const PartitionedSystem& part, const ManifoldOptions& opt,
                           ReducibilityReport& report);

// Substitutes the manifold into the master nonlinearity.
ReducedModel reduce_manifold(const PartitionedSystem& part, const ManifoldMap& map);

// Graded residual of the invariance equation for the steady part of the
// solved manifold (diagnostic; all solved grades should be at the purge floor).
std::map<int, std::vector<QPStatePoly>> manifold_residual(
    const PartitionedSystem& part, const std::vector<ManifoldStage>& stages,
    int max_eps);

}  // namespace qpr

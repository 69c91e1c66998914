#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qpreduce/augment.hpp"
#include "qpreduce/statepoly.hpp"

namespace qpr {

struct ResonanceEntry {
  enum class Cls { Exact, Near, Clear };
  int order = 0;
  int component = 0;
  StateMonomial mono;
  Complex divisor{0.0, 0.0};
  Cls cls = Cls::Clear;
};

struct ResonanceReport {
  std::vector<ResonanceEntry> entries;  // retained (exact/near) terms
  double tol = 0.0;
  double min_clear_divisor = std::numeric_limits<double>::infinity();
};

// Classification is a pure threshold function of |divisor|.
ResonanceEntry::Cls classify_divisor(Complex divisor, double tol);

struct HomologicalResult {
  std::vector<QPStatePoly> h;
  std::vector<QPStatePoly> retained;
  std::vector<ResonanceEntry> entries;
  double min_clear_divisor = std::numeric_limits<double>::infinity();
};

// Solve the degree-r coefficient equations: a term with multi-index m on
// component j is removed with coefficient f / (m.lambda - lambda_j) when the
// divisor magnitude is at least tol; otherwise it is retained untouched.
// Components at index >= solve_components are passed through unchanged.
HomologicalResult homological_solve(const Eigen::VectorXcd& lambda,
                                    const std::vector<QPStatePoly>& f_r, double tol,
                                    int order_label, int solve_components = -1);

struct NearIdentityTransform {
  std::vector<std::vector<QPStatePoly>> h_by_order;  // slot 0 holds degree 2
  std::vector<QPStatePoly> total_map;  // z = total_map(v), identity included
  int max_order = 1;
};

struct NormalFormResult {
  NearIdentityTransform nit;
  Eigen::VectorXcd jbar;    // corrected eigenvalues, physical block
  ResonanceReport report;
  std::vector<QPStatePoly> field;     // transformed vector field, degrees >= 2
  Eigen::VectorXcd lambda;            // modal spectrum of the augmented matrix
  std::vector<Complex> fict_init;     // modal fictitious initial values
  int n_phys = 0;
};

// Order-by-order near-identity normalization of the modal augmented system.
// Retained terms that are linear in one physical variable on its own component
// with a balanced fictitious factor fold into jbar; any other retained
// physical-block term at linear order raises IrreducibleResonance.
NormalFormResult normal_form_iterate(const AugmentedSystem& aug, const Spectrum& spec,
                                     int max_order, double tol);

// Transform a polynomial vector field by v -> v + h (graded pushforward,
// truncated at max_degree). Exposed for the oracle tests.
std::vector<QPStatePoly> pushforward(const Eigen::VectorXcd& lambda,
                                     const std::vector<QPStatePoly>& field,
                                     const std::vector<QPStatePoly>& h,
                                     int max_degree);

}  // namespace qpr

#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "qpreduce/algebra.hpp"

namespace qpr {

// Exponent multi-index over state variables.
using StateMonomial = std::vector<int>;

inline int monomial_degree(const StateMonomial& m) {
  int d = 0;
  for (int e : m) d += e;
  return d;
}

struct PolyKey {
  StateMonomial mono;
  FreqIndex p;
  auto operator<=>(const PolyKey&) const = default;
};

// Polynomial in state variables whose coefficients are truncated
// quasi-periodic series: sum over (m, p) of a_{m,p} exp(i (p.omega) t) z^m.
// Zero polynomial == empty term map; coefficients below 1e-14 are purged.
class QPStatePoly {
 public:
  QPStatePoly() = default;
  QPStatePoly(BasisPtr basis, int state_dim, int max_degree, int trunc_order);

  static QPStatePoly zero(BasisPtr basis, int state_dim, int max_degree,
                          int trunc_order);
  static QPStatePoly variable(BasisPtr basis, int state_dim, int var,
                              int max_degree, int trunc_order);
  static QPStatePoly from_series(const QPSeries& s, int state_dim, int max_degree);
  static QPStatePoly term(BasisPtr basis, int state_dim, int max_degree,
                          int trunc_order, const StateMonomial& mono,
                          const FreqIndex& p, Complex c);

  const BasisPtr& basis() const { return basis_; }
  int state_dim() const { return state_dim_; }
  int max_degree() const { return max_degree_; }
  int trunc_order() const { return trunc_order_; }
  const std::map<PolyKey, Complex>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  void add_term(const StateMonomial& mono, const FreqIndex& p, Complex c);
  void add_series_term(const StateMonomial& mono, const QPSeries& s);

  QPStatePoly& operator+=(const QPStatePoly& other);
  QPStatePoly operator+(const QPStatePoly& other) const;
  QPStatePoly operator-(const QPStatePoly& other) const;
  QPStatePoly scaled(Complex factor) const;
  QPStatePoly mul(const QPStatePoly& other) const;
  QPStatePoly mul_series(const QPSeries& s) const;
  QPStatePoly ddt() const;              // time derivative of the coefficients
  QPStatePoly partial(int var) const;   // d/dz_var
  QPStatePoly degree_part(int d) const;
  QPStatePoly degree_range(int lo, int hi) const;
  int max_term_degree() const;

  // Coefficient of a fixed monomial, gathered as a series.
  QPSeries coefficient_series(const StateMonomial& mono) const;

  Complex apply(double t, const Eigen::VectorXcd& z) const;
  Complex apply(const PhaseTable& table, const Eigen::VectorXcd& z) const;

  // flattened term list for hot evaluation loops
  struct FlatTerm {
    StateMonomial mono;
    FreqIndex p;
    Complex c;
  };
  std::vector<FlatTerm> flattened() const;
  static Complex apply_flat(const std::vector<FlatTerm>& terms,
                            const PhaseTable& table, const Eigen::VectorXcd& z);

  void purge(double eps = kPurgeThreshold);
  double max_abs_coeff() const;

  QPStatePoly with_bounds(int max_degree, int trunc_order) const;

 private:
  BasisPtr basis_;
  int state_dim_ = 0;
  int max_degree_ = 0;
  int trunc_order_ = 0;
  std::map<PolyKey, Complex> terms_;
};

// Substitute every input variable by a polynomial over the output variable
// space. maps.size() must equal poly.state_dim(); all maps share one basis and
// output dimension. The result is truncated to (out_max_degree, out_trunc).
QPStatePoly substitute(const QPStatePoly& poly, const std::vector<QPStatePoly>& maps,
                       int out_max_degree = -1, int out_trunc = -1);

// Replace the slave variables of `poly` (those not in `master_vars`, in
// ascending order) by `slave_map` polynomials over the master variable space;
// master variables are relabeled to 0..r-1.
QPStatePoly poly_substitute(const QPStatePoly& poly,
                            const std::vector<QPStatePoly>& slave_map,
                            const std::vector<int>& master_vars);

// sum_l dpoly/dz_l * g_l
QPStatePoly jacobian_apply(const QPStatePoly& poly, const std::vector<QPStatePoly>& g);

}  // namespace qpr

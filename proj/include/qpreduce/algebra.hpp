#pragma once

#include <complex>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "qpreduce/errors.hpp"

namespace qpr {

using Complex = std::complex<double>;

// Integer multi-index over the base frequencies of a FrequencyBasis.
using FreqIndex = std::vector<int>;

inline int inf_norm(const FreqIndex& p) {
  int m = 0;
  for (int v : p) m = std::max(m, std::abs(v));
  return m;
}

// Ordered set of base angular frequencies (rad/s). A user-facing basis must be
// pairwise incommensurate: no integers |a|,|b| <= 20 with
// |a*w_i - b*w_j| < tol * max(w_i, w_j). Derived bases (assembled internally
// from already-validated data plus computed mode frequencies) skip that check.
class FrequencyBasis {
 public:
  static std::shared_ptr<const FrequencyBasis> create(std::vector<double> omegas,
                                                      std::vector<std::string> labels,
                                                      double incommensurability_tol);
  // No pairwise check; used for bases extended with computed frequencies.
  static std::shared_ptr<const FrequencyBasis> derived(std::vector<double> omegas,
                                                       std::vector<std::string> labels,
                                                       double incommensurability_tol);

  int size() const { return static_cast<int>(omegas_.size()); }
  double omega(int i) const { return omegas_.at(i); }
  const std::vector<double>& omegas() const { return omegas_; }
  const std::string& label(int i) const { return labels_.at(i); }
  const std::vector<std::string>& labels() const { return labels_; }
  double incommensurability_tol() const { return tol_; }
  int find_label(const std::string& name) const;  // -1 if absent

  double dot(const FreqIndex& p) const {
    double s = 0.0;
    for (int i = 0; i < size() && i < static_cast<int>(p.size()); ++i)
      s += p[i] * omegas_[i];
    return s;
  }

 private:
  FrequencyBasis(std::vector<double> o, std::vector<std::string> l, double tol)
      : omegas_(std::move(o)), labels_(std::move(l)), tol_(tol) {}
  std::vector<double> omegas_;
  std::vector<std::string> labels_;
  double tol_;
};

using BasisPtr = std::shared_ptr<const FrequencyBasis>;

inline constexpr double kPurgeThreshold = 1e-14;

// Cached integer powers of exp(i w_b t) per basis slot; shared across many
// coefficient evaluations at one time point.
class PhaseTable {
 public:
  PhaseTable(const FrequencyBasis& basis, int max_pow, double t);
  Complex phase(const FreqIndex& p) const;
  int max_pow() const { return max_pow_; }

 private:
  int max_pow_;
  std::vector<std::vector<Complex>> powers_;  // per slot, index offset max_pow_
};

// Truncated multi-frequency Fourier series: sum_p c_p exp(i (p . omega) t).
// When real_flag is set the coefficient map satisfies c_{-p} = conj(c_p)
// exactly; every operation preserves that symmetry.
class QPSeries {
 public:
  QPSeries() = default;
  QPSeries(BasisPtr basis, int trunc_order, bool real_flag);

  static QPSeries zero(BasisPtr basis, int trunc_order, bool real_flag = false);
  static QPSeries constant(BasisPtr basis, Complex value, int trunc_order,
                           bool real_flag = false);
  static QPSeries harmonic(BasisPtr basis, const FreqIndex& p, Complex c,
                           int trunc_order);
  // cos(w_slot t) and sin(w_slot t) as real series.
  static QPSeries cosine(BasisPtr basis, int slot, int trunc_order);
  static QPSeries sine(BasisPtr basis, int slot, int trunc_order);

  const BasisPtr& basis() const { return basis_; }
  int trunc_order() const { return trunc_order_; }
  bool real_flag() const { return real_flag_; }
  void set_real_flag(bool v) { real_flag_ = v; }
  const std::map<FreqIndex, Complex>& coeffs() const { return coeffs_; }
  bool empty() const { return coeffs_.empty(); }
  std::size_t term_count() const { return coeffs_.size(); }

  Complex coeff(const FreqIndex& p) const;
  // Accumulate into index p; respects the truncation bound (out-of-range
  // indices are dropped).
  void add_coeff(const FreqIndex& p, Complex c);

  Complex eval(double t) const;
  Complex eval(const PhaseTable& table) const;
  double eval_real(double t) const;  // eval + residue check for real series

  QPSeries& operator+=(const QPSeries& other);
  QPSeries& operator-=(const QPSeries& other);
  QPSeries operator+(const QPSeries& other) const;
  QPSeries operator-(const QPSeries& other) const;
  QPSeries scaled(Complex factor) const;
  QPSeries conjugated() const;  // c_p -> conj(c_{-p})
  // Multiply by exp(i (dp . omega) t): shift every index by dp.
  QPSeries shifted(const FreqIndex& dp) const;
  QPSeries truncated(int order) const;

  void purge(double eps = kPurgeThreshold);
  double max_abs_coeff() const;
  double sum_abs_coeff() const;
  // Largest |c_p| among indices with inf-norm above the given order.
  double tail_abs(int order) const;

  // Exact conjugate-symmetry scan; true when c_{-p} == conj(c_p) for all p.
  bool conjugate_symmetric() const;
  // Force exact symmetry by averaging mirror pairs (residue must be small).
  void symmetrize_real();

 private:
  void check_same_basis(const QPSeries& other) const;
  BasisPtr basis_;
  std::map<FreqIndex, Complex> coeffs_;
  int trunc_order_ = 0;
  bool real_flag_ = false;
};

// Product computed exactly up to the combined index bound, then truncated to
// out_trunc (default: max of the operand orders).
QPSeries series_mul(const QPSeries& a, const QPSeries& b, int out_trunc = -1);
QPSeries series_ddt(const QPSeries& a);

// Index-embedding: re-express a series over a basis whose leading slots agree
// with the source basis (extra trailing slots get zero index).
QPSeries embed_series(const QPSeries& s, const BasisPtr& target);

}  // namespace qpr

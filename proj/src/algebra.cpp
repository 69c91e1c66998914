#include "qpreduce/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qpr {

namespace {

void validate_frequencies(const std::vector<double>& omegas,
                          const std::vector<std::string>& labels, double tol) {
  if (omegas.size() != labels.size())
    throw BasisError("frequency basis: omegas and labels differ in length");
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    if (!(omegas[i] > 0.0)) {
      std::ostringstream os;
      os << "frequency basis: frequency '" << labels[i] << "' must be positive";
      throw BasisError(os.str());
    }
  }
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = i + 1; j < labels.size(); ++j)
      if (labels[i] == labels[j])
        throw BasisError("frequency basis: duplicate label '" + labels[i] + "'");
}

void check_incommensurate(const std::vector<double>& omegas,
                          const std::vector<std::string>& labels, double tol) {
  constexpr int kMaxInt = 20;
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    for (std::size_t j = i + 1; j < omegas.size(); ++j) {
      double bound = tol * std::max(omegas[i], omegas[j]);
      for (int a = 1; a <= kMaxInt; ++a) {
        for (int b = 1; b <= kMaxInt; ++b) {
          if (std::abs(a * omegas[i] - b * omegas[j]) < bound) {
            std::ostringstream os;
            os << "frequency basis: '" << labels[i] << "' and '" << labels[j]
               << "' are commensurate within tolerance (" << a << "*" << labels[i]
               << " ~ " << b << "*" << labels[j] << ")";
            throw BasisError(os.str());
          }
        }
      }
    }
  }
}

}  // namespace

std::shared_ptr<const FrequencyBasis> FrequencyBasis::create(
    std::vector<double> omegas, std::vector<std::string> labels, double tol) {
  validate_frequencies(omegas, labels, tol);
  check_incommensurate(omegas, labels, tol);
  return std::shared_ptr<const FrequencyBasis>(
      new FrequencyBasis(std::move(omegas), std::move(labels), tol));
}

std::shared_ptr<const FrequencyBasis> FrequencyBasis::derived(
    std::vector<double> omegas, std::vector<std::string> labels, double tol) {
  validate_frequencies(omegas, labels, tol);
  return std::shared_ptr<const FrequencyBasis>(
      new FrequencyBasis(std::move(omegas), std::move(labels), tol));
}

int FrequencyBasis::find_label(const std::string& name) const {
  for (int i = 0; i < size(); ++i)
    if (labels_[i] == name) return i;
  return -1;
}

QPSeries::QPSeries(BasisPtr basis, int trunc_order, bool real_flag)
    : basis_(std::move(basis)), trunc_order_(trunc_order), real_flag_(real_flag) {}

QPSeries QPSeries::zero(BasisPtr basis, int trunc_order, bool real_flag) {
  return QPSeries(std::move(basis), trunc_order, real_flag);
}

QPSeries QPSeries::constant(BasisPtr basis, Complex value, int trunc_order,
                            bool real_flag) {
  QPSeries s(std::move(basis), trunc_order, real_flag);
  if (real_flag && std::abs(value.imag()) > 0.0) value = Complex(value.real(), 0.0);
  s.add_coeff(FreqIndex(s.basis_->size(), 0), value);
  return s;
}

QPSeries QPSeries::harmonic(BasisPtr basis, const FreqIndex& p, Complex c,
                            int trunc_order) {
  QPSeries s(std::move(basis), trunc_order, false);
  s.add_coeff(p, c);
  return s;
}

QPSeries QPSeries::cosine(BasisPtr basis, int slot, int trunc_order) {
  QPSeries s(std::move(basis), trunc_order, true);
  FreqIndex p(s.basis_->size(), 0);
  p.at(slot) = 1;
  s.add_coeff(p, Complex(0.5, 0.0));
  p[slot] = -1;
  s.add_coeff(p, Complex(0.5, 0.0));
  return s;
}

QPSeries QPSeries::sine(BasisPtr basis, int slot, int trunc_order) {
  QPSeries s(std::move(basis), trunc_order, true);
  FreqIndex p(s.basis_->size(), 0);
  p.at(slot) = 1;
  s.add_coeff(p, Complex(0.0, -0.5));
  p[slot] = -1;
  s.add_coeff(p, Complex(0.0, 0.5));
  return s;
}

Complex QPSeries::coeff(const FreqIndex& p) const {
  auto it = coeffs_.find(p);
  return it == coeffs_.end() ? Complex(0.0, 0.0) : it->second;
}

void QPSeries::add_coeff(const FreqIndex& p, Complex c) {
  if (static_cast<int>(p.size()) != basis_->size())
    throw DimError("series index length does not match basis size");
  if (inf_norm(p) > trunc_order_) return;
  auto [it, inserted] = coeffs_.emplace(p, c);
  if (!inserted) it->second += c;
  if (std::abs(it->second) < kPurgeThreshold) coeffs_.erase(it);
}

PhaseTable::PhaseTable(const FrequencyBasis& basis, int max_pow, double t)
    : max_pow_(max_pow) {
  powers_.resize(basis.size());
  for (int s = 0; s < basis.size(); ++s) {
    auto& row = powers_[s];
    row.assign(2 * max_pow_ + 1, Complex(1.0, 0.0));
    Complex u = std::polar(1.0, basis.omega(s) * t);
    for (int e = 1; e <= max_pow_; ++e) {
      row[max_pow_ + e] = row[max_pow_ + e - 1] * u;
      row[max_pow_ - e] = std::conj(row[max_pow_ + e]);
    }
  }
}

Complex PhaseTable::phase(const FreqIndex& p) const {
  Complex acc(1.0, 0.0);
  for (std::size_t s = 0; s < p.size(); ++s) {
    if (p[s] == 0) continue;
    acc *= powers_[s][max_pow_ + p[s]];
  }
  return acc;
}

Complex QPSeries::eval(double t) const {
  Complex acc(0.0, 0.0);
  for (const auto& [p, c] : coeffs_) {
    double phase = basis_->dot(p) * t;
    acc += c * std::polar(1.0, phase);
  }
  return acc;
}

Complex QPSeries::eval(const PhaseTable& table) const {
  Complex acc(0.0, 0.0);
  for (const auto& [p, c] : coeffs_) acc += c * table.phase(p);
  return acc;
}

double QPSeries::eval_real(double t) const {
  Complex v = eval(t);
  return v.real();
}

void QPSeries::check_same_basis(const QPSeries& other) const {
  if (basis_ != other.basis_)
    throw BasisError("series operands use different frequency bases");
}

QPSeries& QPSeries::operator+=(const QPSeries& other) {
  check_same_basis(other);
  trunc_order_ = std::max(trunc_order_, other.trunc_order_);
  for (const auto& [p, c] : other.coeffs_) add_coeff(p, c);
  real_flag_ = real_flag_ && other.real_flag_;
  return *this;
}

QPSeries& QPSeries::operator-=(const QPSeries& other) {
  check_same_basis(other);
  trunc_order_ = std::max(trunc_order_, other.trunc_order_);
  for (const auto& [p, c] : other.coeffs_) add_coeff(p, -c);
  real_flag_ = real_flag_ && other.real_flag_;
  return *this;
}

QPSeries QPSeries::operator+(const QPSeries& other) const {
  QPSeries r = *this;
  r += other;
  return r;
}

QPSeries QPSeries::operator-(const QPSeries& other) const {
  QPSeries r = *this;
  r -= other;
  return r;
}

QPSeries QPSeries::scaled(Complex factor) const {
  QPSeries r(basis_, trunc_order_,
             real_flag_ && std::abs(factor.imag()) == 0.0);
  for (const auto& [p, c] : coeffs_) r.add_coeff(p, c * factor);
  return r;
}

QPSeries QPSeries::conjugated() const {
  QPSeries r(basis_, trunc_order_, real_flag_);
  for (const auto& [p, c] : coeffs_) {
    FreqIndex q(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) q[i] = -p[i];
    r.add_coeff(q, std::conj(c));
  }
  return r;
}

QPSeries QPSeries::shifted(const FreqIndex& dp) const {
  if (static_cast<int>(dp.size()) != basis_->size())
    throw DimError("shift index length does not match basis size");
  bool pure = true;
  for (int v : dp) pure = pure && (v == 0);
  QPSeries r(basis_, trunc_order_, real_flag_ && pure);
  for (const auto& [p, c] : coeffs_) {
    FreqIndex q(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) q[i] = p[i] + dp[i];
    r.add_coeff(q, c);
  }
  return r;
}

QPSeries QPSeries::truncated(int order) const {
  QPSeries r(basis_, order, real_flag_);
  for (const auto& [p, c] : coeffs_) r.add_coeff(p, c);
  return r;
}

void QPSeries::purge(double eps) {
  for (auto it = coeffs_.begin(); it != coeffs_.end();) {
    if (std::abs(it->second) < eps)
      it = coeffs_.erase(it);
    else
      ++it;
  }
}

double QPSeries::max_abs_coeff() const {
  double m = 0.0;
  for (const auto& [p, c] : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

double QPSeries::sum_abs_coeff() const {
  double m = 0.0;
  for (const auto& [p, c] : coeffs_) m += std::abs(c);
  return m;
}

double QPSeries::tail_abs(int order) const {
  double m = 0.0;
  for (const auto& [p, c] : coeffs_)
    if (inf_norm(p) > order) m = std::max(m, std::abs(c));
  return m;
}

bool QPSeries::conjugate_symmetric() const {
  for (const auto& [p, c] : coeffs_) {
    FreqIndex q(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) q[i] = -p[i];
    auto it = coeffs_.find(q);
    Complex mirror = it == coeffs_.end() ? Complex(0, 0) : it->second;
    if (mirror != std::conj(c)) return false;
  }
  return true;
}

void QPSeries::symmetrize_real() {
  std::map<FreqIndex, Complex> out;
  for (const auto& [p, c] : coeffs_) {
    FreqIndex q(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) q[i] = -p[i];
    Complex avg = 0.5 * (c + std::conj(coeff(q)));
    if (std::abs(avg) >= kPurgeThreshold) out[p] = avg;
  }
  // second pass restores exact mirrors
  std::map<FreqIndex, Complex> fixed;
  for (const auto& [p, c] : out) {
    FreqIndex q(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) q[i] = -p[i];
    if (fixed.count(p)) continue;
    if (p <= q) {
      fixed[p] = c;
      if (q != p) fixed[q] = std::conj(c);
    } else {
      fixed[q] = std::conj(c);
      fixed[p] = c;
    }
  }
  coeffs_ = std::move(fixed);
  real_flag_ = true;
}

QPSeries series_mul(const QPSeries& a, const QPSeries& b, int out_trunc) {
  if (a.basis() != b.basis())
    throw BasisError("series_mul: operands use different frequency bases");
  int trunc = out_trunc >= 0 ? out_trunc : std::max(a.trunc_order(), b.trunc_order());
  QPSeries r(a.basis(), trunc, a.real_flag() && b.real_flag());
  for (const auto& [pa, ca] : a.coeffs()) {
    for (const auto& [pb, cb] : b.coeffs()) {
      FreqIndex p(pa.size());
      for (std::size_t i = 0; i < pa.size(); ++i) p[i] = pa[i] + pb[i];
      r.add_coeff(p, ca * cb);
    }
  }
  // accumulation order differs between mirrored indices; restore the exact
  // conjugate symmetry of real products
  if (r.real_flag()) r.symmetrize_real();
  return r;
}

QPSeries series_ddt(const QPSeries& a) {
  QPSeries r(a.basis(), a.trunc_order(), a.real_flag());
  for (const auto& [p, c] : a.coeffs()) {
    double nu = a.basis()->dot(p);
    r.add_coeff(p, Complex(0.0, nu) * c);
  }
  return r;
}

QPSeries embed_series(const QPSeries& s, const BasisPtr& target) {
  if (s.basis() == target) return s;
  int src = s.basis()->size();
  if (target->size() < src)
    throw BasisError("embed_series: target basis smaller than source");
  for (int i = 0; i < src; ++i)
    if (s.basis()->omega(i) != target->omega(i))
      throw BasisError("embed_series: leading slots of target do not match source");
  QPSeries r(target, s.trunc_order(), s.real_flag());
  for (const auto& [p, c] : s.coeffs()) {
    FreqIndex q(target->size(), 0);
    std::copy(p.begin(), p.end(), q.begin());
    r.add_coeff(q, c);
  }
  return r;
}

}  // namespace qpr

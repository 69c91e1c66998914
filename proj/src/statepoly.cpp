#include "qpreduce/statepoly.hpp"

#include <algorithm>
#include <cmath>

namespace qpr {

QPStatePoly::QPStatePoly(BasisPtr basis, int state_dim, int max_degree,
                         int trunc_order)
    : basis_(std::move(basis)),
      state_dim_(state_dim),
      max_degree_(max_degree),
      trunc_order_(trunc_order) {}

QPStatePoly QPStatePoly::zero(BasisPtr basis, int state_dim, int max_degree,
                              int trunc_order) {
  return QPStatePoly(std::move(basis), state_dim, max_degree, trunc_order);
}

QPStatePoly QPStatePoly::variable(BasisPtr basis, int state_dim, int var,
                                  int max_degree, int trunc_order) {
  QPStatePoly p(std::move(basis), state_dim, max_degree, trunc_order);
  StateMonomial m(state_dim, 0);
  m.at(var) = 1;
  p.add_term(m, FreqIndex(p.basis_->size(), 0), Complex(1.0, 0.0));
  return p;
}

QPStatePoly QPStatePoly::from_series(const QPSeries& s, int state_dim,
                                     int max_degree) {
  QPStatePoly p(s.basis(), state_dim, max_degree, s.trunc_order());
  StateMonomial m(state_dim, 0);
  for (const auto& [idx, c] : s.coeffs()) p.add_term(m, idx, c);
  return p;
}

QPStatePoly QPStatePoly::term(BasisPtr basis, int state_dim, int max_degree,
                              int trunc_order, const StateMonomial& mono,
                              const FreqIndex& p, Complex c) {
  QPStatePoly poly(std::move(basis), state_dim, max_degree, trunc_order);
  poly.add_term(mono, p, c);
  return poly;
}

void QPStatePoly::add_term(const StateMonomial& mono, const FreqIndex& p,
                           Complex c) {
  if (static_cast<int>(mono.size()) != state_dim_)
    throw DimError("poly term monomial length does not match state dimension");
  if (static_cast<int>(p.size()) != basis_->size())
    throw DimError("poly term frequency index does not match basis size");
  if (monomial_degree(mono) > max_degree_ || inf_norm(p) > trunc_order_) return;
  PolyKey key{mono, p};
  auto [it, inserted] = terms_.emplace(key, c);
  if (!inserted) it->second += c;
  if (std::abs(it->second) < kPurgeThreshold) terms_.erase(it);
}

void QPStatePoly::add_series_term(const StateMonomial& mono, const QPSeries& s) {
  for (const auto& [p, c] : s.coeffs()) add_term(mono, p, c);
}

QPStatePoly& QPStatePoly::operator+=(const QPStatePoly& other) {
  if (other.empty()) return *this;
  if (basis_ != other.basis_) throw BasisError("poly add: basis mismatch");
  if (state_dim_ != other.state_dim_) throw DimError("poly add: dimension mismatch");
  for (const auto& [k, c] : other.terms_) add_term(k.mono, k.p, c);
  return *this;
}

QPStatePoly QPStatePoly::operator+(const QPStatePoly& other) const {
  QPStatePoly r = *this;
  r += other;
  return r;
}

QPStatePoly QPStatePoly::operator-(const QPStatePoly& other) const {
  QPStatePoly r = *this;
  r += other.scaled(Complex(-1.0, 0.0));
  return r;
}

QPStatePoly QPStatePoly::scaled(Complex factor) const {
  QPStatePoly r(basis_, state_dim_, max_degree_, trunc_order_);
  for (const auto& [k, c] : terms_) r.add_term(k.mono, k.p, c * factor);
  return r;
}

QPStatePoly QPStatePoly::mul(const QPStatePoly& other) const {
  if (basis_ != other.basis_) throw BasisError("poly mul: basis mismatch");
  if (state_dim_ != other.state_dim_) throw DimError("poly mul: dimension mismatch");
  QPStatePoly r(basis_, state_dim_, max_degree_, trunc_order_);
  for (const auto& [ka, ca] : terms_) {
    for (const auto& [kb, cb] : other.terms_) {
      StateMonomial m(state_dim_);
      for (int i = 0; i < state_dim_; ++i) m[i] = ka.mono[i] + kb.mono[i];
      if (monomial_degree(m) > max_degree_) continue;
      FreqIndex p(ka.p.size());
      for (std::size_t i = 0; i < p.size(); ++i) p[i] = ka.p[i] + kb.p[i];
      r.add_term(m, p, ca * cb);
    }
  }
  return r;
}

QPStatePoly QPStatePoly::mul_series(const QPSeries& s) const {
  if (basis_ != s.basis()) throw BasisError("poly mul_series: basis mismatch");
  QPStatePoly r(basis_, state_dim_, max_degree_, trunc_order_);
  for (const auto& [k, c] : terms_) {
    for (const auto& [ps, cs] : s.coeffs()) {
      FreqIndex p(k.p.size());
      for (std::size_t i = 0; i < p.size(); ++i) p[i] = k.p[i] + ps[i];
      r.add_term(k.mono, p, c * cs);
    }
  }
  return r;
}

QPStatePoly QPStatePoly::ddt() const {
  QPStatePoly r(basis_, state_dim_, max_degree_, trunc_order_);
  for (const auto& [k, c] : terms_) {
    double nu = basis_->dot(k.p);
    r.add_term(k.mono, k.p, Complex(0.0, nu) * c);
  }
  return r;
}

QPStatePoly QPStatePoly::partial(int var) const {
  QPStatePoly r(basis_, state_dim_, max_degree_, trunc_order_);
  for (const auto& [k, c] : terms_) {
    if (k.mono[var] == 0) continue;
    StateMonomial m = k.mono;
    double e = m[var];
    m[var] -= 1;
    r.add_term(m, k.p, c * e);
  }
  return r;
}

QPStatePoly QPStatePoly::degree_part(int d) const { return degree_range(d, d); }

QPStatePoly QPStatePoly::degree_range(int lo, int hi) const {
  QPStatePoly r(basis_, state_dim_, max_degree_, trunc_order_);
  for (const auto& [k, c] : terms_) {
    int d = monomial_degree(k.mono);
    if (d >= lo && d <= hi) r.add_term(k.mono, k.p, c);
  }
  return r;
}

int QPStatePoly::max_term_degree() const {
  int d = 0;
  for (const auto& [k, c] : terms_) d = std::max(d, monomial_degree(k.mono));
  return d;
}

QPSeries QPStatePoly::coefficient_series(const StateMonomial& mono) const {
  QPSeries s(basis_, trunc_order_, false);
  for (const auto& [k, c] : terms_)
    if (k.mono == mono) s.add_coeff(k.p, c);
  return s;
}

Complex QPStatePoly::apply(double t, const Eigen::VectorXcd& z) const {
  PhaseTable table(*basis_, trunc_order_, t);
  return apply(table, z);
}

Complex QPStatePoly::apply(const PhaseTable& table, const Eigen::VectorXcd& z) const {
  if (z.size() != state_dim_)
    throw DimError("poly apply: state vector length does not match dimension");
  Complex acc(0.0, 0.0);
  for (const auto& [k, c] : terms_) {
    Complex v = c * table.phase(k.p);
    for (int i = 0; i < state_dim_; ++i)
      for (int e = 0; e < k.mono[i]; ++e) v *= z[i];
    acc += v;
  }
  return acc;
}

std::vector<QPStatePoly::FlatTerm> QPStatePoly::flattened() const {
  std::vector<FlatTerm> out;
  out.reserve(terms_.size());
  for (const auto& [k, c] : terms_) out.push_back({k.mono, k.p, c});
  return out;
}

Complex QPStatePoly::apply_flat(const std::vector<FlatTerm>& terms,
                                const PhaseTable& table,
                                const Eigen::VectorXcd& z) {
  Complex acc(0.0, 0.0);
  for (const auto& term : terms) {
    Complex v = term.c * table.phase(term.p);
    for (std::size_t i = 0; i < term.mono.size(); ++i)
      for (int e = 0; e < term.mono[i]; ++e) v *= z[static_cast<int>(i)];
    acc += v;
  }
  return acc;
}

void QPStatePoly::purge(double eps) {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (std::abs(it->second) < eps)
      it = terms_.erase(it);
    else
      ++it;
  }
}

double QPStatePoly::max_abs_coeff() const {
  double m = 0.0;
  for (const auto& [k, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

QPStatePoly QPStatePoly::with_bounds(int max_degree, int trunc_order) const {
  QPStatePoly r(basis_, state_dim_, max_degree, trunc_order);
  for (const auto& [k, c] : terms_) r.add_term(k.mono, k.p, c);
  return r;
}

QPStatePoly substitute(const QPStatePoly& poly, const std::vector<QPStatePoly>& maps,
                       int out_max_degree, int out_trunc) {
  if (static_cast<int>(maps.size()) != poly.state_dim())
    throw DimError("substitute: one map required per input variable");
  int out_dim = poly.state_dim();
  BasisPtr out_basis = poly.basis();
  if (!maps.empty()) {
    out_dim = maps.front().state_dim();
    out_basis = maps.front().basis();
    for (const auto& m : maps) {
      if (m.state_dim() != out_dim) throw DimError("substitute: map dimensions differ");
      if (m.basis() != out_basis) throw BasisError("substitute: map bases differ");
    }
  }
  int deg = out_max_degree >= 0 ? out_max_degree : poly.max_degree();
  int trunc = out_trunc >= 0 ? out_trunc : poly.trunc_order();
  QPStatePoly result(out_basis, out_dim, deg, trunc);

  // cached powers per variable
  std::vector<std::vector<QPStatePoly>> powers(maps.size());
  auto power = [&](int var, int e) -> const QPStatePoly& {
    auto& cache = powers[var];
    if (cache.empty()) {
      QPStatePoly one = QPStatePoly::zero(out_basis, out_dim, deg, trunc);
      one.add_term(StateMonomial(out_dim, 0), FreqIndex(out_basis->size(), 0),
                   Complex(1.0, 0.0));
      cache.push_back(one);
    }
    while (static_cast<int>(cache.size()) <= e)
      cache.push_back(cache.back().mul(maps[var].with_bounds(deg, trunc)));
    return cache[e];
  };

  for (const auto& [k, c] : poly.terms()) {
    QPStatePoly acc = QPStatePoly::zero(out_basis, out_dim, deg, trunc);
    acc.add_term(StateMonomial(out_dim, 0), FreqIndex(out_basis->size(), 0), c);
    for (int var = 0; var < poly.state_dim(); ++var) {
      if (k.mono[var] == 0) continue;
      acc = acc.mul(power(var, k.mono[var]));
      if (acc.empty()) break;
    }
    if (acc.empty()) continue;
    // carry the term's own frequency factor (source and target bases must
    // share leading slots when they differ)
    FreqIndex dp(out_basis->size(), 0);
    if (poly.basis() == out_basis) {
      dp = k.p;
    } else {
      if (static_cast<int>(k.p.size()) > out_basis->size())
        throw BasisError("substitute: term basis larger than output basis");
      std::copy(k.p.begin(), k.p.end(), dp.begin());
    }
    for (const auto& [ka, ca] : acc.terms()) {
      FreqIndex p(dp.size());
      for (std::size_t i = 0; i < p.size(); ++i) p[i] = ka.p[i] + dp[i];
      result.add_term(ka.mono, p, ca);
    }
  }
  return result;
}

QPStatePoly poly_substitute(const QPStatePoly& poly,
                            const std::vector<QPStatePoly>& slave_map,
                            const std::vector<int>& master_vars) {
  int n = poly.state_dim();
  int r = static_cast<int>(master_vars.size());
  std::vector<bool> is_master(n, false);
  for (int v : master_vars) {
    if (v < 0 || v >= n) throw DimError("poly_substitute: master index out of range");
    is_master[v] = true;
  }
  if (static_cast<int>(slave_map.size()) != n - r)
    throw DimError("poly_substitute: one map required per slave variable");

  BasisPtr out_basis = slave_map.empty() ? poly.basis() : slave_map.front().basis();
  int max_degree = slave_map.empty() ? poly.max_degree() : slave_map.front().max_degree();
  int trunc = slave_map.empty() ? poly.trunc_order() : slave_map.front().trunc_order();

  std::vector<QPStatePoly> maps;
  maps.reserve(n);
  int master_pos = 0, slave_pos = 0;
  for (int v = 0; v < n; ++v) {
    if (is_master[v]) {
      maps.push_back(
          QPStatePoly::variable(out_basis, r, master_pos++, max_degree, trunc));
    } else {
      const auto& h = slave_map[slave_pos++];
      if (h.state_dim() != r)
        throw DimError("poly_substitute: slave map must be over master variables");
      maps.push_back(h);
    }
  }
  return substitute(poly, maps, max_degree, trunc);
}

QPStatePoly jacobian_apply(const QPStatePoly& poly,
                           const std::vector<QPStatePoly>& g) {
  if (static_cast<int>(g.size()) != poly.state_dim())
    throw DimError("jacobian_apply: one entry required per variable");
  QPStatePoly acc =
      QPStatePoly::zero(poly.basis(), poly.state_dim(), poly.max_degree(),
                        poly.trunc_order());
  for (int v = 0; v < poly.state_dim(); ++v) {
    QPStatePoly d = poly.partial(v);
    if (d.empty() || g[v].empty()) continue;
    acc += d.mul(g[v]);
  }
  return acc;
}

}  // namespace qpr

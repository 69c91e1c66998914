#include "qpreduce/normal_form.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qpr {

ResonanceEntry::Cls classify_divisor(Complex divisor, double tol) {
  double a = std::abs(divisor);
  if (a <= 1e-12) return ResonanceEntry::Cls::Exact;
  if (a < tol) return ResonanceEntry::Cls::Near;
  return ResonanceEntry::Cls::Clear;
}

HomologicalResult homological_solve(const Eigen::VectorXcd& lambda,
                                    const std::vector<QPStatePoly>& f_r, double tol,
                                    int order_label, int solve_components) {
  const int n = static_cast<int>(lambda.size());
  if (static_cast<int>(f_r.size()) != n)
    throw DimError("homological_solve: field length does not match spectrum");
  if (solve_components < 0) solve_components = n;

  HomologicalResult res;
  res.h.reserve(n);
  res.retained.reserve(n);
  for (int j = 0; j < n; ++j) {
    const QPStatePoly& f = f_r[j];
    QPStatePoly h = QPStatePoly::zero(f.basis(), f.state_dim(), f.max_degree(),
                                      f.trunc_order());
    QPStatePoly keep = h;
    for (const auto& [key, c] : f.terms()) {
      if (j >= solve_components) {
        keep.add_term(key.mono, key.p, c);
        continue;
      }
      Complex mdot(0.0, 0.0);
      for (int l = 0; l < n && l < static_cast<int>(key.mono.size()); ++l)
        mdot += static_cast<double>(key.mono[l]) * lambda(l);
      Complex divisor = mdot - lambda(j);
      auto cls = classify_divisor(divisor, tol);
      if (cls == ResonanceEntry::Cls::Clear) {
        h.add_term(key.mono, key.p, c / divisor);
        res.min_clear_divisor = std::min(res.min_clear_divisor, std::abs(divisor));
      } else {
        keep.add_term(key.mono, key.p, c);
        res.entries.push_back({order_label, j, key.mono, divisor, cls});
      }
    }
    res.h.push_back(std::move(h));
    res.retained.push_back(std::move(keep));
  }
  return res;
}

std::vector<QPStatePoly> pushforward(const Eigen::VectorXcd& lambda,
                                     const std::vector<QPStatePoly>& field,
                                     const std::vector<QPStatePoly>& h,
                                     int max_degree) {
  const int n = static_cast<int>(field.size());
  if (static_cast<int>(h.size()) != n)
    throw DimError("pushforward: transform length does not match field");
  const BasisPtr basis = field.front().basis();
  const int dim = field.front().state_dim();
  const int trunc = field.front().trunc_order();

  int h_min_degree = max_degree + 1;
  for (const auto& hj : h)
    for (const auto& [k, c] : hj.terms())
      h_min_degree = std::min(h_min_degree, monomial_degree(k.mono));

  // substitution maps v_j -> v_j + h_j
  std::vector<QPStatePoly> sub;
  sub.reserve(n);
  for (int j = 0; j < n; ++j) {
    QPStatePoly s = QPStatePoly::variable(basis, dim, j, max_degree, trunc);
    s += h[j];
    sub.push_back(std::move(s));
  }

  // G(v + h) with G(z) = Jz + field(z)
  std::vector<QPStatePoly> gsub(n, QPStatePoly::zero(basis, dim, max_degree, trunc));
  for (int j = 0; j < n; ++j) {
    gsub[j] += sub[j].scaled(lambda(j));
    if (!field[j].empty()) gsub[j] += substitute(field[j], sub, max_degree, trunc);
  }

  // apply (I + Dh)^{-1} as a truncated Neumann sum
  std::vector<QPStatePoly> acc = gsub;
  std::vector<QPStatePoly> term = gsub;
  int raised = 0;
  while (true) {
    raised += std::max(1, h_min_degree - 1);
    if (raised + 1 > max_degree) break;
    std::vector<QPStatePoly> next(n, QPStatePoly::zero(basis, dim, max_degree, trunc));
    bool any = false;
    for (int j = 0; j < n; ++j) {
      if (h[j].empty()) continue;
      next[j] = jacobian_apply(h[j], term).scaled(Complex(-1.0, 0.0));
      any = any || !next[j].empty();
    }
    if (!any) break;
    for (int j = 0; j < n; ++j) acc[j] += next[j];
    term = std::move(next);
  }

  for (int j = 0; j < n; ++j) {
    QPStatePoly v = QPStatePoly::variable(basis, dim, j, max_degree, trunc);
    acc[j] += v.scaled(-lambda(j));
    acc[j] = acc[j].degree_range(2, max_degree);
  }
  return acc;
}

namespace {

bool fict_balanced(const StateMonomial& m, const AugmentedSystem& aug, int n_phys) {
  for (std::size_t f = 0; f < aug.fict.size(); ++f) {
    int base = n_phys + 2 * static_cast<int>(f);
    if (m[base] != m[base + 1]) return false;
  }
  return true;
}

}  // namespace

NormalFormResult normal_form_iterate(const AugmentedSystem& aug, const Spectrum& spec,
                                     int max_order, double tol) {
  const int nbar = aug.dim();
  const int n_phys = aug.n_phys;
  const BasisPtr basis = aug.basis;
  const int trunc = 0;  // the modal field carries no explicit time dependence

  NormalFormResult out;
  out.lambda = spec.eigenvalues;
  out.n_phys = n_phys;
  out.report.tol = tol;

  // fictitious modal initial values: (p, q)(0) = (0, 1)
  out.fict_init.assign(nbar, Complex(0.0, 0.0));
  auto [v_minus, v_plus] = fictitious_modal_init();
  for (std::size_t f = 0; f < aug.fict.size(); ++f) {
    int base = n_phys + 2 * static_cast<int>(f);
    out.fict_init[base] = v_minus;
    out.fict_init[base + 1] = v_plus;
  }

  // modal coupling: Minv f(M v)
  std::vector<QPStatePoly> maps;
  maps.reserve(nbar);
  for (int j = 0; j < nbar; ++j) {
    QPStatePoly m = QPStatePoly::zero(basis, nbar, max_order, trunc);
    StateMonomial mono(nbar, 0);
    for (int l = 0; l < nbar; ++l) {
      Complex c = spec.M(j, l);
      if (std::abs(c) < kPurgeThreshold) continue;
      mono[l] = 1;
      m.add_term(mono, FreqIndex(basis->size(), 0), c);
      mono[l] = 0;
    }
    maps.push_back(std::move(m));
  }
  std::vector<QPStatePoly> substituted;
  substituted.reserve(nbar);
  for (int i = 0; i < nbar; ++i)
    substituted.push_back(aug.coupling[i].empty()
                              ? QPStatePoly::zero(basis, nbar, max_order, trunc)
                              : substitute(aug.coupling[i].with_bounds(max_order, trunc),
                                           maps, max_order, trunc));
  std::vector<QPStatePoly> field(nbar, QPStatePoly::zero(basis, nbar, max_order, trunc));
  for (int row = 0; row < nbar; ++row)
    for (int i = 0; i < nbar; ++i) {
      Complex c = spec.Minv(row, i);
      if (std::abs(c) < kPurgeThreshold || substituted[i].empty()) continue;
      field[row] += substituted[i].scaled(c);
    }

  out.nit.max_order = max_order;
  std::vector<ResonanceEntry> retained_entries;

  for (int r = 2; r <= max_order; ++r) {
    std::vector<QPStatePoly> f_r(nbar);
    for (int j = 0; j < nbar; ++j) f_r[j] = field[j].degree_part(r);
    for (int j = n_phys; j < nbar; ++j) {
      if (!f_r[j].empty())
        throw AssemblyError("normal form: fictitious components must stay exact");
    }
    HomologicalResult hr = homological_solve(spec.eigenvalues, f_r, tol, r, n_phys);
    out.report.min_clear_divisor =
        std::min(out.report.min_clear_divisor, hr.min_clear_divisor);
    for (auto& e : hr.entries) retained_entries.push_back(e);
    field = pushforward(spec.eigenvalues, field, hr.h, max_order);
    out.nit.h_by_order.push_back(std::move(hr.h));
  }

  // fold balanced self-terms into jbar; reject other linear-order retentions
  out.jbar = spec.eigenvalues.head(n_phys);
  for (const auto& e : retained_entries) {
    int phys_degree = 0, phys_var = -1;
    for (int l = 0; l < n_phys; ++l) {
      phys_degree += e.mono[l];
      if (e.mono[l] > 0) phys_var = l;
    }
    if (phys_degree != 1) continue;  // resonant nonlinearity, stays in the field
    if (phys_var == e.component && fict_balanced(e.mono, aug, n_phys)) {
      Complex factor(1.0, 0.0);
      for (std::size_t f = 0; f < aug.fict.size(); ++f) {
        int base = n_phys + 2 * static_cast<int>(f);
        for (int rep = 0; rep < e.mono[base]; ++rep)
          factor *= out.fict_init[base] * out.fict_init[base + 1];
      }
      // coefficient of the retained term in the transformed field
      FreqIndex zero(basis->size(), 0);
      Complex c(0.0, 0.0);
      for (const auto& [key, cc] : field[e.component].terms())
        if (key.mono == e.mono) c += cc;
      out.jbar(e.component) += c * factor;
    } else {
      std::ostringstream os;
      os << "irreducible resonance: retained linear term on component "
         << e.component << " (|divisor| = " << std::abs(e.divisor)
         << ") prevents a time-invariant physical block";
      throw IrreducibleResonance(os.str());
    }
  }
  // exact conjugate pairing of the corrected eigenvalues
  for (int j = 0; j < n_phys; ++j) {
    int pj = spec.conj_partner[j];
    if (pj > j && pj < n_phys) out.jbar(pj) = std::conj(out.jbar(j));
  }

  out.report.entries = std::move(retained_entries);
  out.field = field;

  // composed map z = T_2(T_3(...(v)))
  std::vector<QPStatePoly> total;
  total.reserve(nbar);
  for (int j = 0; j < nbar; ++j)
    total.push_back(QPStatePoly::variable(basis, nbar, j, max_order, trunc));
  for (int idx = static_cast<int>(out.nit.h_by_order.size()) - 1; idx >= 0; --idx) {
    const auto& h_r = out.nit.h_by_order[idx];
    std::vector<QPStatePoly> next = total;
    for (int j = 0; j < nbar; ++j) {
      if (h_r[j].empty()) continue;
      next[j] += substitute(h_r[j], total, max_order, trunc);
    }
    total = std::move(next);
  }
  out.nit.total_map = std::move(total);
  return out;
}

}  // namespace qpr

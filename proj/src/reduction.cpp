#include "qpreduce/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace qpr {

Eigen::VectorXcd TransformedSystem::eval_forcing(double t) const {
  Eigen::VectorXcd f(dim());
  for (int j = 0; j < dim(); ++j) f(j) = forcing[j].eval(t);
  return f;
}

ComplexRhs TransformedSystem::rhs() const {
  int max_pow = 0;
  for (const auto& wj : w) max_pow = std::max(max_pow, wj.trunc_order());
  for (const auto& fj : forcing) max_pow = std::max(max_pow, fj.trunc_order());
  auto flat = std::make_shared<std::vector<std::vector<QPStatePoly::FlatTerm>>>();
  for (const auto& wj : w) flat->push_back(wj.flattened());
  return [this, max_pow, flat](double t, const Eigen::VectorXcd& z,
                               Eigen::VectorXcd& dz) {
    PhaseTable table(*basis, max_pow, t);
    dz = jbar.cwiseProduct(z);
    for (int j = 0; j < dim(); ++j) {
      if (!(*flat)[j].empty())
        dz(j) += QPStatePoly::apply_flat((*flat)[j], table, z);
      dz(j) += forcing[j].eval(table);
    }
  };
}

namespace {

// truncated series inverse of (I + D) by Newton-Schulz iteration
std::vector<std::vector<QPSeries>> series_matrix_inverse(
    const std::vector<std::vector<QPSeries>>& D, const BasisPtr& basis, int trunc) {
  const int n = static_cast<int>(D.size());
  auto identity = [&]() {
    std::vector<std::vector<QPSeries>> M(
        n, std::vector<QPSeries>(n, QPSeries::zero(basis, trunc, false)));
    for (int i = 0; i < n; ++i)
      M[i][i] = QPSeries::constant(basis, Complex(1.0, 0.0), trunc);
    return M;
  };
  auto mul_mat = [&](const std::vector<std::vector<QPSeries>>& A,
                     const std::vector<std::vector<QPSeries>>& B) {
    std::vector<std::vector<QPSeries>> C(
        n, std::vector<QPSeries>(n, QPSeries::zero(basis, trunc, false)));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l)
          if (!A[i][l].empty() && !B[l][j].empty())
            C[i][j] += series_mul(A[i][l], B[l][j], trunc);
    return C;
  };
  auto a_mat = identity();  // A = I + D
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a_mat[i][j] += D[i][j];

  auto X = identity();
  for (int iter = 0; iter < 40; ++iter) {
    // R = I - A X ; X <- X (I + R)
    auto AX = mul_mat(a_mat, X);
    double resid = 0.0;
    auto R = identity();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        R[i][j] -= AX[i][j];
        if (i == j) {
          QPSeries d = R[i][j];
          resid = std::max(resid, d.max_abs_coeff());
        } else {
          resid = std::max(resid, R[i][j].max_abs_coeff());
        }
      }
    if (resid < 1e-13) return X;
    auto I_plus_R = identity();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) I_plus_R[i][j] += R[i][j];
    X = mul_mat(X, I_plus_R);
    double growth = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) growth = std::max(growth, X[i][j].max_abs_coeff());
    if (!std::isfinite(growth) || growth > 1e6)
      throw AssemblyError(
          "series inverse diverged; the quasi-periodic correction is too large "
          "for a perturbative inverse");
  }
  throw AssemblyError("series inverse failed to converge");
}

}  // namespace

void enforce_conjugate_structure(std::vector<QPStatePoly>& field,
                                 const std::vector<int>& partner) {
  const int n = static_cast<int>(field.size());
  std::vector<QPStatePoly> out = field;
  for (int j = 0; j < n; ++j) {
    int pj = partner[j];
    if (pj < j) continue;
    if (pj == j) continue;  // unpaired component, leave untouched
    // average the pair: c_{pj, pi(m), -p} = conj(c_{j, m, p})
    QPStatePoly sym = QPStatePoly::zero(field[j].basis(), field[j].state_dim(),
                                        field[j].max_degree(), field[j].trunc_order());
    for (const auto& [key, c] : field[j].terms()) {
      StateMonomial pm(key.mono.size());
      for (std::size_t l = 0; l < key.mono.size(); ++l)
        pm[partner[l]] = key.mono[l];
      FreqIndex np(key.p.size());
      for (std::size_t l = 0; l < key.p.size(); ++l) np[l] = -key.p[l];
      Complex mirror = std::conj(field[pj].terms().count({pm, np})
                                     ? field[pj].terms().at({pm, np})
                                     : Complex(0, 0));
      sym.add_term(key.mono, key.p, 0.5 * (c + mirror));
    }
    out[j] = sym;
    if (pj != j) {
      QPStatePoly mirror = QPStatePoly::zero(field[j].basis(), field[j].state_dim(),
                                             field[j].max_degree(),
                                             field[j].trunc_order());
      for (const auto& [key, c] : sym.terms()) {
        StateMonomial pm(key.mono.size());
        for (std::size_t l = 0; l < key.mono.size(); ++l)
          pm[partner[l]] = key.mono[l];
        FreqIndex np(key.p.size());
        for (std::size_t l = 0; l < key.p.size(); ++l) np[l] = -key.p[l];
        mirror.add_term(pm, np, std::conj(c));
      }
      out[pj] = mirror;
    }
  }
  field = std::move(out);
}

TransformedSystem build_transformed(const LPTransform& lp,
                                    const std::vector<NonlinearMonomial>& nonlinear,
                                    const std::vector<double>& forcing_freqs,
                                    const std::vector<std::string>& forcing_labels,
                                    const std::vector<ForcingHarmonic>& forcing,
                                    const TransformOptions& opt) {
  const int n = lp.n;
  const BasisPtr pbasis = lp.param_basis;
  const int trunc = opt.trunc_order;

  TransformedSystem ts;
  ts.lp = lp;
  ts.jbar = lp.jbar;
  ts.conj_partner = lp.conj_partner;
  ts.n_param = pbasis->size();
  ts.n_forcing = static_cast<int>(forcing_freqs.size());

  // basis layout [param | forcing | modes]
  std::vector<double> omegas = pbasis->omegas();
  std::vector<std::string> labels = pbasis->labels();
  for (int f = 0; f < ts.n_forcing; ++f) {
    omegas.push_back(forcing_freqs[f]);
    labels.push_back(forcing_labels[f]);
  }
  std::vector<double> mode_values;
  for (int s = ts.n_param; s < lp.qbasis->size(); ++s) {
    omegas.push_back(lp.qbasis->omega(s));
    labels.push_back(lp.qbasis->label(s));
    mode_values.push_back(lp.qbasis->omega(s));
  }
  ts.basis = FrequencyBasis::derived(omegas, labels, pbasis->incommensurability_tol());
  ts.mode_slot.assign(n, -1);
  ts.mode_sign.assign(n, 0);
  for (int j = 0; j < n; ++j) {
    // mode slots sit after [param | forcing] in the combined layout
    if (lp.mode_slot[j] >= 0) ts.mode_slot[j] = lp.mode_slot[j] + ts.n_forcing;
    ts.mode_sign[j] = lp.mode_sign[j];
  }

  // w(v, t) = (I + qbar)^{-1} Mp^{-1} f(Mp (I + qbar) v), over the parametric
  // slots, then embedded into the combined basis
  std::vector<QPStatePoly> w_param(
      n, QPStatePoly::zero(pbasis, n, opt.max_degree, trunc));
  if (!nonlinear.empty()) {
    auto n_inv = series_matrix_inverse(lp.qbar, pbasis, trunc);
    // x_s(v, t) = sum_j [Mp (I + qbar)]_{sj} v_j
    std::vector<QPStatePoly> x_of_v(n, QPStatePoly::zero(pbasis, n, opt.max_degree, trunc));
    for (int srow = 0; srow < n; ++srow) {
      for (int j = 0; j < n; ++j) {
        QPSeries g = QPSeries::zero(pbasis, trunc, false);
        for (int l = 0; l < n; ++l) {
          if (lp.qbar[l][j].empty()) continue;
          g += lp.qbar[l][j].scaled(lp.Mp(srow, l));
        }
        g.add_coeff(FreqIndex(pbasis->size(), 0), lp.Mp(srow, j));
        StateMonomial mono(n, 0);
        mono[j] = 1;
        x_of_v[srow].add_series_term(mono, g);
      }
    }
    // Tinv = (I + qbar)^{-1} Mp^{-1}
    std::vector<std::vector<QPSeries>> tinv(
        n, std::vector<QPSeries>(n, QPSeries::zero(pbasis, trunc, false)));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
          if (n_inv[i][l].empty()) continue;
          tinv[i][j] += n_inv[i][l].scaled(lp.MpInv(l, j));
        }
    for (const auto& mono_term : nonlinear) {
      QPStatePoly f_poly = QPStatePoly::zero(pbasis, n, opt.max_degree, trunc);
      FreqIndex zero(pbasis->size(), 0);
      f_poly.add_term(StateMonomial(n, 0), zero, Complex(mono_term.coefficient, 0.0));
      for (int s = 0; s < n; ++s)
        for (int e = 0; e < mono_term.exponents[s]; ++e) f_poly = f_poly.mul(x_of_v[s]);
      for (int row = 0; row < n; ++row) {
        if (tinv[row][mono_term.target].empty()) continue;
        w_param[row] += f_poly.mul_series(tinv[row][mono_term.target]);
      }
    }
  }
  ts.w.clear();
  for (int row = 0; row < n; ++row) {
    QPStatePoly wp = QPStatePoly::zero(ts.basis, n, opt.max_degree, trunc);
    for (const auto& [key, c] : w_param[row].terms()) {
      FreqIndex p(ts.basis->size(), 0);
      std::copy(key.p.begin(), key.p.end(), p.begin());
      wp.add_term(key.mono, p, c);
    }
    ts.w.push_back(std::move(wp));
  }
  enforce_conjugate_structure(ts.w, ts.conj_partner);

  // transformed forcing via the sampled inverse, refit onto harmonics
  ts.forcing.assign(n, QPSeries::zero(ts.basis, trunc, false));
  if (!forcing.empty()) {
    const int samples = static_cast<int>(opt.fit_span / opt.fit_step) + 1;
    std::vector<double> grid(samples);
    for (int i = 0; i < samples; ++i) grid[i] = i * opt.fit_step;
    SampledInverse inv = invert_direct(lp, grid);

    auto physical_forcing = [&](double t) {
      Eigen::VectorXd F = Eigen::VectorXd::Zero(n);
      for (const auto& h : forcing) {
        double w0 = forcing_freqs.at(h.forcing_slot);
        F(h.target) +=
            h.amplitude * (h.kind == PhaseKind::Cos ? std::cos(w0 * t) : std::sin(w0 * t));
      }
      return F;
    };

    // dictionary: parametric combinations times at most one forcing harmonic
    std::vector<FreqIndex> dict;
    FreqIndex base(ts.basis->size(), 0);
    std::vector<FreqIndex> param_combos;
    std::function<void(int, FreqIndex&)> walk = [&](int slot, FreqIndex& cur) {
      if (slot == ts.n_param) {
        param_combos.push_back(cur);
        return;
      }
      for (int v = -trunc; v <= trunc; ++v) {
        cur[slot] = v;
        walk(slot + 1, cur);
      }
      cur[slot] = 0;
    };
    walk(0, base);
    for (const auto& pc : param_combos) {
      dict.push_back(pc);
      for (int f = 0; f < ts.n_forcing; ++f) {
        FreqIndex plus = pc;
        plus[ts.n_param + f] = 1;
        dict.push_back(plus);
        FreqIndex minus = pc;
        minus[ts.n_param + f] = -1;
        dict.push_back(minus);
      }
    }

    Eigen::MatrixXcd A(samples, static_cast<int>(dict.size()));
    for (int i = 0; i < samples; ++i)
      for (std::size_t d = 0; d < dict.size(); ++d)
        A(i, static_cast<int>(d)) = std::polar(1.0, ts.basis->dot(dict[d]) * grid[i]);

    Eigen::MatrixXcd rhs(samples, n);
    double f_rms = 0.0;
    for (int i = 0; i < samples; ++i) {
      double t = grid[i];
      Eigen::VectorXd F = physical_forcing(t);
      f_rms += F.squaredNorm();
      Eigen::VectorXcd m = lp.MpInv * (inv.W[i] * F).cast<Complex>();
      // sandwich exp(Jbar t) K exp(-Jbar t)
      Eigen::VectorXcd out(n);
      for (int a = 0; a < n; ++a) {
        Complex acc(0, 0);
        for (int b = 0; b < n; ++b) {
          if (std::abs(lp.K(a, b)) < kPurgeThreshold) continue;
          acc += lp.K(a, b) * std::exp((lp.jbar(a) - lp.jbar(b)) * t) * m(b);
        }
        out(a) = acc;
      }
      rhs.row(i) = out.transpose();
    }
    ts.forcing_rms = std::sqrt(f_rms / samples);

    Eigen::MatrixXcd AtA = A.adjoint() * A;
    Eigen::MatrixXcd AtB = A.adjoint() * rhs;
    Eigen::MatrixXcd coef = AtA.ldlt().solve(AtB);

    double resid2 = 0.0;
    Eigen::MatrixXcd fit = A * coef;
    for (int i = 0; i < samples; ++i) resid2 += (fit.row(i) - rhs.row(i)).squaredNorm();
    ts.forcing_fit_rms = std::sqrt(resid2 / (samples * std::max(1, n)));

    // drop the numerical floor of the least-squares solution; genuine
    // harmonic content sits orders of magnitude above it
    double coef_scale = coef.cwiseAbs().maxCoeff();
    double floor = std::max(1e-12, 1e-7 * coef_scale);
    for (int j = 0; j < n; ++j) {
      QPSeries s = QPSeries::zero(ts.basis, trunc, false);
      for (std::size_t d = 0; d < dict.size(); ++d) {
        Complex c = coef(static_cast<int>(d), j);
        if (std::abs(c) < floor) continue;
        s.add_coeff(dict[d], c);
      }
      ts.forcing[j] = s;
    }
    // exact conjugate pairing across modal pairs
    for (int j = 0; j < n; ++j) {
      int pj = ts.conj_partner[j];
      if (pj > j) ts.forcing[pj] = ts.forcing[j].conjugated();
    }
  }
  return ts;
}

std::vector<int> PartitionedSystem::master_conj() const {
  std::vector<int> out(master_indices.size());
  for (std::size_t a = 0; a < master_indices.size(); ++a) {
    int partner = conj_partner[master_indices[a]];
    auto it = std::find(master_indices.begin(), master_indices.end(), partner);
    out[a] = static_cast<int>(it - master_indices.begin());
  }
  return out;
}

std::vector<int> PartitionedSystem::slave_conj() const {
  std::vector<int> out(slave_indices.size());
  for (std::size_t a = 0; a < slave_indices.size(); ++a) {
    int partner = conj_partner[slave_indices[a]];
    auto it = std::find(slave_indices.begin(), slave_indices.end(), partner);
    out[a] = static_cast<int>(it - slave_indices.begin());
  }
  return out;
}

PartitionedSystem partition(const TransformedSystem& ts, std::vector<int> masters) {
  std::sort(masters.begin(), masters.end());
  masters.erase(std::unique(masters.begin(), masters.end()), masters.end());
  for (int m : masters)
    if (m < 0 || m >= ts.dim())
      throw PartitionError("partition: master index out of range");
  std::vector<bool> is_master(ts.dim(), false);
  for (int m : masters) is_master[m] = true;
  for (int m : masters)
    if (!is_master[ts.conj_partner[m]])
      throw PartitionError(
          "partition: master set splits a conjugate pair; select both members "
          "of each mode");

  PartitionedSystem part;
  part.basis = ts.basis;
  part.n_param = ts.n_param;
  part.n_forcing = ts.n_forcing;
  part.conj_partner = ts.conj_partner;
  part.mode_slot = ts.mode_slot;
  part.mode_sign = ts.mode_sign;
  part.master_indices = masters;
  for (int j = 0; j < ts.dim(); ++j)
    if (!is_master[j]) part.slave_indices.push_back(j);

  part.Jr.resize(part.r());
  part.Js.resize(part.s());
  for (int a = 0; a < part.r(); ++a) {
    part.Jr(a) = ts.jbar(part.master_indices[a]);
    part.wr.push_back(ts.w[part.master_indices[a]]);
    part.Fr.push_back(ts.forcing[part.master_indices[a]]);
  }
  for (int a = 0; a < part.s(); ++a) {
    part.Js(a) = ts.jbar(part.slave_indices[a]);
    part.ws.push_back(ts.w[part.slave_indices[a]]);
    part.Fs.push_back(ts.forcing[part.slave_indices[a]]);
  }
  return part;
}

std::vector<int> default_masters(const TransformedSystem& ts, int count) {
  double target = 0.0;
  for (int s = ts.n_param; s < ts.n_param + ts.n_forcing; ++s) {
    target = ts.basis->omega(s);
    break;
  }
  // rank conjugate pairs by |  |Im| - target |
  std::vector<std::pair<double, int>> ranked;
  std::vector<bool> seen(ts.dim(), false);
  for (int j = 0; j < ts.dim(); ++j) {
    if (seen[j]) continue;
    seen[j] = true;
    seen[ts.conj_partner[j]] = true;
    double dist = std::abs(std::abs(ts.jbar(j).imag()) - target);
    ranked.push_back({dist, j});
  }
  std::stable_sort(ranked.begin(), ranked.end());
  std::vector<int> masters;
  for (const auto& [dist, j] : ranked) {
    if (static_cast<int>(masters.size()) >= count) break;
    masters.push_back(j);
    if (ts.conj_partner[j] != j) masters.push_back(ts.conj_partner[j]);
  }
  std::sort(masters.begin(), masters.end());
  return masters;
}

ComplexRhs ReducedModel::rhs() const {
  int max_pow = 0;
  for (const auto& wj : wbar) max_pow = std::max(max_pow, wj.trunc_order());
  for (const auto& fj : Fr) max_pow = std::max(max_pow, fj.trunc_order());
  auto flat = std::make_shared<std::vector<std::vector<QPStatePoly::FlatTerm>>>();
  for (const auto& wj : wbar) flat->push_back(wj.flattened());
  return [this, max_pow, flat](double t, const Eigen::VectorXcd& z,
                               Eigen::VectorXcd& dz) {
    PhaseTable table(*basis, max_pow, t);
    dz = Jr.cwiseProduct(z);
    for (std::size_t j = 0; j < wbar.size(); ++j) {
      if (!(*flat)[j].empty())
        dz(static_cast<int>(j)) += QPStatePoly::apply_flat((*flat)[j], table, z);
      dz(static_cast<int>(j)) += Fr[j].eval(table);
    }
  };
}

ReducedModel reduce_linear(const PartitionedSystem& part) {
  ReducedModel model;
  model.Jr = part.Jr;
  model.Fr = part.Fr;
  model.provenance = ReducedModel::Provenance::Linear;
  model.selector = part.master_indices;
  model.basis = part.basis;
  std::vector<QPStatePoly> zero_maps(
      part.s(), QPStatePoly::zero(part.basis, part.r(),
                                  part.wr.empty() ? 5 : part.wr.front().max_degree(),
                                  part.wr.empty() ? 5 : part.wr.front().trunc_order()));
  for (const auto& w : part.wr)
    model.wbar.push_back(poly_substitute(w, zero_maps, part.master_indices));
  return model;
}

Trajectory recover_states(const LPTransform& lp, const PartitionedSystem& part,
                          const ComplexTrajectory& zr, const SlaveMapFn& slave_map,
                          double* max_imag_residue) {
  const int n = part.n();
  Trajectory out;
  out.times = zr.times;
  out.meta = zr.meta;
  out.meta.system_id += "-recovered";
  out.states.resize(static_cast<int>(zr.times.size()), n);
  double worst = 0.0;
  for (std::size_t i = 0; i < zr.times.size(); ++i) {
    double t = zr.times[i];
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
    Eigen::VectorXcd zri = zr.states.row(static_cast<int>(i)).transpose();
    for (int a = 0; a < part.r(); ++a) v(part.master_indices[a]) = zri(a);
    if (slave_map) {
      Eigen::VectorXcd zs = slave_map(t, zri);
      for (int a = 0; a < part.s(); ++a) v(part.slave_indices[a]) = zs(a);
    }
    Eigen::VectorXcd x = lp.modal_map(t) * v;
    worst = std::max(worst, x.imag().cwiseAbs().maxCoeff());
    out.states.row(static_cast<int>(i)) = x.real().transpose();
  }
  if (max_imag_residue) *max_imag_residue = worst;
  if (worst > 1e-6) {
    std::ostringstream os;
    os << "recover_states: imaginary residue " << worst
       << " exceeds 1e-6; conjugate pairing is broken upstream";
    throw ImaginaryLeak(os.str());
  }
  return out;
}

}  // namespace qpr

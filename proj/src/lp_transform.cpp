#include "qpreduce/lp_transform.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qpr {

Eigen::MatrixXd LPTransform::eval(double t) const {
  int max_pow = 0;
  for (const auto& row : Q)
    for (const auto& s : row) max_pow = std::max(max_pow, s.trunc_order());
  PhaseTable table(*qbasis, max_pow, t);
  Eigen::MatrixXd out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = Q[i][j].eval(table).real();
  return out;
}

Eigen::MatrixXd LPTransform::eval_dot(double t) const {
  Eigen::MatrixXd out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = series_ddt(Q[i][j]).eval(t).real();
  return out;
}

Eigen::MatrixXcd LPTransform::modal_map(double t) const {
  int max_pow = 0;
  for (const auto& row : qbar)
    for (const auto& s : row) max_pow = std::max(max_pow, s.trunc_order());
  PhaseTable table(*param_basis, max_pow, t);
  Eigen::MatrixXcd G = Eigen::MatrixXcd::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) += qbar[i][j].eval(table);
  return Mp * G;
}

Eigen::VectorXcd LPTransform::modal_state(const Eigen::VectorXd& x) const {
  return K * (MpInv * x.cast<Complex>());
}

LPTransform LPTransform::identity(int n) {
  LPTransform lp;
  lp.n = n;
  lp.param_basis = FrequencyBasis::derived({}, {}, 1e-6);
  lp.qbasis = lp.param_basis;
  lp.n_param_slots = 0;
  lp.Mp = Eigen::MatrixXcd::Identity(n, n);
  lp.MpInv = lp.Mp;
  lp.K = lp.Mp;
  lp.jbar = Eigen::VectorXcd::Zero(n);
  lp.conj_partner.resize(n);
  for (int i = 0; i < n; ++i) lp.conj_partner[i] = i;
  lp.mode_slot.assign(n, -1);
  lp.mode_sign.assign(n, 0);
  lp.Q.assign(n, std::vector<QPSeries>(n, QPSeries::zero(lp.qbasis, 0, true)));
  lp.qbar.assign(n, std::vector<QPSeries>(n, QPSeries::zero(lp.param_basis, 0, false)));
  for (int i = 0; i < n; ++i)
    lp.Q[i][i] = QPSeries::constant(lp.qbasis, Complex(1.0, 0.0), 0, true);
  return lp;
}

LPTransform assemble_q(const NormalFormResult& nf, const AugmentedSystem& aug,
                       const Spectrum& spec, int trunc_order) {
  const int n = nf.n_phys;
  const int nbar = aug.dim();
  const BasisPtr pbasis = aug.basis;

  LPTransform lp;
  lp.n = n;
  lp.param_basis = pbasis;
  lp.n_param_slots = pbasis->size();
  lp.Mp = spec.M.topLeftCorner(n, n);
  lp.MpInv = spec.Minv.topLeftCorner(n, n);
  lp.jbar = nf.jbar;
  lp.conj_partner.assign(spec.conj_partner.begin(), spec.conj_partner.begin() + n);

  // fictitious variable -> (parametric slot, sign of the modal frequency)
  std::vector<int> fict_slot(nbar, -1), fict_sign(nbar, 0);
  for (std::size_t f = 0; f < aug.fict.size(); ++f) {
    int base = n + 2 * static_cast<int>(f);
    fict_slot[base] = aug.fict[f].freq_slot;
    fict_sign[base] = -1;
    fict_slot[base + 1] = aug.fict[f].freq_slot;
    fict_sign[base + 1] = +1;
  }

  // qbar from the composed map: keep terms linear in one physical variable,
  // substitute fictitious monomials by their harmonics
  lp.qbar.assign(n, std::vector<QPSeries>(n, QPSeries::zero(pbasis, trunc_order, false)));
  for (int j = 0; j < n; ++j) {
    for (const auto& [key, c] : nf.nit.total_map[j].terms()) {
      int phys_var = -1, phys_deg = 0, fict_deg = 0;
      for (int l = 0; l < n; ++l) {
        phys_deg += key.mono[l];
        if (key.mono[l] > 0) phys_var = l;
      }
      for (int l = n; l < nbar; ++l) fict_deg += key.mono[l];
      if (phys_deg == 1 && key.mono[phys_var] == 1 && fict_deg == 0 &&
          phys_var == j && std::abs(c - Complex(1.0, 0.0)) < 1e-12)
        continue;  // identity part
      if (phys_deg != 1) {
        std::ostringstream os;
        os << "assemble_q: transform term on component " << j
           << " is not linear in the physical variables";
        throw AssemblyError(os.str());
      }
      FreqIndex p(pbasis->size(), 0);
      Complex factor(1.0, 0.0);
      for (int l = n; l < nbar; ++l) {
        for (int rep = 0; rep < key.mono[l]; ++rep) {
          factor *= nf.fict_init[l];
          p[fict_slot[l]] += fict_sign[l];
        }
      }
      lp.qbar[j][phys_var].add_coeff(p, c * factor);
    }
  }

  // gauge factor K = (I + qbar(0))^{-1}
  Eigen::MatrixXcd Q0 = Eigen::MatrixXcd::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Q0(i, j) += lp.qbar[i][j].eval(0.0);
  lp.K = Q0.inverse();

  // extended basis: parametric slots + one slot per distinct mode frequency
  double lam_scale = 0.0;
  for (int j = 0; j < n; ++j) lam_scale = std::max(lam_scale, std::abs(lp.jbar(j)));
  for (int j = 0; j < n; ++j) {
    if (std::abs(lp.jbar(j).real()) > 1e-6 * std::max(lam_scale, 1.0))
      throw AssemblyError(
          "assemble_q: corrected spectrum has a significant real part; the "
          "quasi-periodic representation requires an oscillatory LTI block");
  }
  std::vector<double> omegas = pbasis->omegas();
  std::vector<std::string> labels = pbasis->labels();
  lp.mode_slot.assign(n, -1);
  lp.mode_sign.assign(n, 0);
  for (int j = 0; j < n; ++j) {
    double w = std::abs(lp.jbar(j).imag());
    lp.mode_sign[j] = lp.jbar(j).imag() >= 0 ? +1 : -1;
    if (w < 1e-12) continue;
    int slot = -1;
    for (int s = pbasis->size(); s < static_cast<int>(omegas.size()); ++s)
      if (std::abs(omegas[s] - w) < 1e-9 * std::max(1.0, w)) slot = s;
    if (slot < 0) {
      slot = static_cast<int>(omegas.size());
      omegas.push_back(w);
      labels.push_back("mode" + std::to_string(slot - pbasis->size() + 1));
    }
    lp.mode_slot[j] = slot;
  }
  lp.qbasis = FrequencyBasis::derived(omegas, labels, pbasis->incommensurability_tol());

  // A(t) = (I + qbar(t)) exp(Jbar t) K exp(-Jbar t)
  auto shift_index = [&](int l, int m) {
    FreqIndex dp(lp.qbasis->size(), 0);
    if (lp.mode_slot[l] >= 0) dp[lp.mode_slot[l]] += lp.mode_sign[l];
    if (lp.mode_slot[m] >= 0) dp[lp.mode_slot[m]] -= lp.mode_sign[m];
    return dp;
  };
  std::vector<std::vector<QPSeries>> A(
      n, std::vector<QPSeries>(n, QPSeries::zero(lp.qbasis, trunc_order, false)));
  for (int j = 0; j < n; ++j) {
    for (int m = 0; m < n; ++m) {
      for (int l = 0; l < n; ++l) {
        Complex klm = lp.K(l, m);
        if (std::abs(klm) < kPurgeThreshold) continue;
        QPSeries txt = QPSeries::zero(lp.qbasis, trunc_order, false);
        if (l == j) txt.add_coeff(FreqIndex(lp.qbasis->size(), 0), Complex(1.0, 0.0));
        txt += embed_series(lp.qbar[j][l], lp.qbasis);
        A[j][m] += txt.scaled(klm).shifted(shift_index(l, m));
      }
    }
  }

  // Q = Mp A Mp^{-1}, entrywise real
  lp.Q.assign(n, std::vector<QPSeries>(n, QPSeries::zero(lp.qbasis, trunc_order, false)));
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      QPSeries acc = QPSeries::zero(lp.qbasis, trunc_order, false);
      for (int j = 0; j < n; ++j) {
        for (int m = 0; m < n; ++m) {
          Complex c = lp.Mp(a, j) * lp.MpInv(m, b);
          if (std::abs(c) < kPurgeThreshold) continue;
          acc += A[j][m].scaled(c);
        }
      }
      double scale = std::max(acc.max_abs_coeff(), 1.0);
      QPSeries sym = acc;
      sym.symmetrize_real();
      double resid = (acc - sym).max_abs_coeff();
      if (resid > 1e-8 * scale)
        throw AssemblyError("assemble_q: assembled transform is not real");
      lp.Q[a][b] = sym;
    }
  }

  // identity at t = 0 and per-sample inverse consistency on a probe grid
  Eigen::MatrixXd Qt0 = lp.eval(0.0);
  lp.verification.q0_identity_error =
      (Qt0 - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  if (lp.verification.q0_identity_error > 1e-6)
    throw AssemblyError("assemble_q: Q(0) deviates from the identity");
  double worst = 0.0;
  for (int s = 0; s <= 100; ++s) {
    double t = 0.2 * s;
    Eigen::MatrixXd Qt = lp.eval(t);
    Eigen::MatrixXd W = Qt.partialPivLu().solve(Eigen::MatrixXd::Identity(n, n));
    worst = std::max(worst,
                     (Qt * W - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff());
  }
  lp.verification.product_residual = worst;
  return lp;
}

}  // namespace qpr

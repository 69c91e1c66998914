#include "qpreduce/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace qpr {

void QPLinearSystem::validate() const {
  if (B0.rows() != B0.cols()) throw ValidationError("linear system: B0 must be square");
  if (!basis) throw ValidationError("linear system: missing frequency basis");
  for (const auto& t : terms) {
    if (t.row < 0 || t.row >= dim() || t.col < 0 || t.col >= dim())
      throw ValidationError("linear system: parametric term references an invalid entry");
    if (t.freq_slot < 0 || t.freq_slot >= basis->size())
      throw ValidationError("linear system: parametric term references an unknown frequency");
  }
}

Eigen::MatrixXd QPLinearSystem::eval(double t) const {
  Eigen::MatrixXd A = B0;
  for (const auto& term : terms) {
    double w = basis->omega(term.freq_slot);
    double v = term.kind == PhaseKind::Cos ? std::cos(w * t) : std::sin(w * t);
    A(term.row, term.col) += term.amplitude * v;
  }
  return A;
}

Eigen::VectorXd AugmentedSystem::initial_state(const Eigen::VectorXd& x0) const {
  if (x0.size() != n_phys)
    throw DimError("augmented initial state: physical part has wrong length");
  Eigen::VectorXd xb = Eigen::VectorXd::Zero(dim());
  xb.head(n_phys) = x0;
  for (const auto& f : fict) {
    xb(f.p_index) = 0.0;
    xb(f.q_index) = 1.0;
  }
  return xb;
}

AugmentedSystem augment(const QPLinearSystem& sys) {
  sys.validate();
  const int n = sys.dim();

  // fictitious pairs only for frequencies actually present in B(t)
  std::vector<int> used;
  for (const auto& t : sys.terms)
    if (std::find(used.begin(), used.end(), t.freq_slot) == used.end())
      used.push_back(t.freq_slot);
  std::sort(used.begin(), used.end());

  const int k = static_cast<int>(used.size());
  const int nbar = n + 2 * k;

  AugmentedSystem aug;
  aug.n_phys = n;
  aug.basis = sys.basis;
  aug.Bbar0 = Eigen::MatrixXd::Zero(nbar, nbar);
  aug.Bbar0.topLeftCorner(n, n) = sys.B0;

  std::vector<int> slot_of(sys.basis->size(), -1);
  for (int i = 0; i < k; ++i) {
    int p_index = n + 2 * i;
    int q_index = n + 2 * i + 1;
    double w = sys.basis->omega(used[i]);
    aug.Bbar0(p_index, q_index) = w;
    aug.Bbar0(q_index, p_index) = -w;
    aug.fict.push_back({p_index, q_index, used[i]});
    slot_of[used[i]] = i;
  }

  aug.coupling.assign(nbar, QPStatePoly::zero(sys.basis, nbar, 2, 0));
  for (const auto& t : sys.terms) {
    const FictPair& f = aug.fict[slot_of[t.freq_slot]];
    int fict_index = t.kind == PhaseKind::Cos ? f.q_index : f.p_index;
    StateMonomial m(nbar, 0);
    m[t.col] += 1;
    m[fict_index] += 1;
    aug.coupling[t.row].add_term(m, FreqIndex(sys.basis->size(), 0),
                                 Complex(t.amplitude, 0.0));
  }
  return aug;
}

std::pair<Complex, Complex> fictitious_modal_init() {
  // (p, q) = v_minus (1, -i) + v_plus (1, i); (p, q)(0) = (0, 1)
  return {Complex(0.0, 0.5), Complex(0.0, -0.5)};
}

namespace {

struct EigenPair {
  Complex value;
  Eigen::VectorXcd vec;
};

// Deterministic eigenvector scaling: largest entry real positive, unit norm.
void normalize_vector(Eigen::VectorXcd& v) {
  int imax = 0;
  double best = -1.0;
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > best + 1e-12) {
      best = std::abs(v[i]);
      imax = i;
    }
  }
  Complex pivot = v[imax];
  if (std::abs(pivot) > 0) v *= std::conj(pivot) / std::abs(pivot);
  v.normalize();
}

Spectrum assemble_spectrum(std::vector<EigenPair> pairs, int n_phys_eigs) {
  // sort by ascending |Im| then |Re| then Im sign (negative first)
  std::stable_sort(pairs.begin(), pairs.end(), [](const EigenPair& a, const EigenPair& b) {
    double ia = std::abs(a.value.imag()), ib = std::abs(b.value.imag());
    if (std::abs(ia - ib) > 1e-12) return ia < ib;
    double ra = std::abs(a.value.real()), rb = std::abs(b.value.real());
    if (std::abs(ra - rb) > 1e-12) return ra < rb;
    return a.value.imag() < b.value.imag();
  });

  const int n = static_cast<int>(pairs.size());
  Spectrum s;
  s.M.resize(n, n);
  s.eigenvalues.resize(n);
  s.conj_partner.assign(n, -1);

  // group conjugate partners adjacently, negative imaginary first
  std::vector<bool> taken(n, false);
  std::vector<int> order;
  for (int i = 0; i < n; ++i) {
    if (taken[i]) continue;
    if (std::abs(pairs[i].value.imag()) < 1e-12) {
      order.push_back(i);
      taken[i] = true;
      s.conj_partner[order.size() - 1] = static_cast<int>(order.size() - 1);
      continue;
    }
    int partner = -1;
    for (int j = i + 1; j < n; ++j) {
      if (taken[j]) continue;
      if (std::abs(pairs[j].value - std::conj(pairs[i].value)) < 1e-8 *
              (1.0 + std::abs(pairs[i].value))) {
        partner = j;
        break;
      }
    }
    int neg = i, pos = partner;
    if (pairs[i].value.imag() > 0 && partner >= 0) std::swap(neg, pos);
    order.push_back(neg);
    taken[neg] = true;
    if (pos >= 0) {
      // exact conjugation keeps realness identities exact downstream
      pairs[pos].value = std::conj(pairs[neg].value);
      pairs[pos].vec = pairs[neg].vec.conjugate();
      order.push_back(pos);
      taken[pos] = true;
      s.conj_partner[order.size() - 2] = static_cast<int>(order.size() - 1);
      s.conj_partner[order.size() - 1] = static_cast<int>(order.size() - 2);
    } else {
      s.conj_partner[order.size() - 1] = static_cast<int>(order.size() - 1);
    }
  }

  for (int c = 0; c < n; ++c) {
    s.eigenvalues[c] = pairs[order[c]].value;
    s.M.col(c) = pairs[order[c]].vec;
  }
  s.n_phys = n_phys_eigs;

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(s.M);
  double cond = svd.singularValues()(0) /
                std::max(svd.singularValues()(svd.singularValues().size() - 1), 1e-300);
  if (cond > 1e8)
    throw NotSemiSimpleError(
        "modal: eigenvector matrix condition number exceeds 1e8; matrix is not "
        "semi-simple within working precision");
  s.Minv = s.M.inverse();
  return s;
}

}  // namespace

double Spectrum::reconstruction_error(const Eigen::MatrixXd& B) const {
  Eigen::MatrixXcd R = M * eigenvalues.asDiagonal() * Minv;
  double scale = std::max(B.cwiseAbs().maxCoeff(), 1e-300);
  return (R - B.cast<Complex>()).cwiseAbs().maxCoeff() / scale;
}

Spectrum modal(const Eigen::MatrixXd& B) {
  if (B.rows() != B.cols()) throw DimError("modal: matrix must be square");
  const int n = static_cast<int>(B.rows());
  if (n == 0) {
    Spectrum s;
    s.M.resize(0, 0);
    s.Minv.resize(0, 0);
    s.eigenvalues.resize(0);
    return s;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(B);
  if (es.info() != Eigen::Success) throw NotSemiSimpleError("modal: eigensolver failed");
  std::vector<EigenPair> pairs(n);
  for (int i = 0; i < n; ++i) {
    pairs[i].value = es.eigenvalues()(i);
    pairs[i].vec = es.eigenvectors().col(i);
    normalize_vector(pairs[i].vec);
  }
  return assemble_spectrum(std::move(pairs), n);
}

Spectrum modal(const AugmentedSystem& aug) {
  const int n = aug.n_phys;
  const int k = static_cast<int>(aug.fict.size());
  Spectrum phys = modal(Eigen::MatrixXd(aug.Bbar0.topLeftCorner(n, n)));

  const int nbar = n + 2 * k;
  Spectrum s;
  s.M = Eigen::MatrixXcd::Zero(nbar, nbar);
  s.Minv = Eigen::MatrixXcd::Zero(nbar, nbar);
  s.eigenvalues.resize(nbar);
  s.conj_partner.assign(nbar, -1);
  s.n_phys = n;

  s.M.topLeftCorner(n, n) = phys.M;
  s.Minv.topLeftCorner(n, n) = phys.Minv;
  s.eigenvalues.head(n) = phys.eigenvalues;
  for (int i = 0; i < n; ++i) s.conj_partner[i] = phys.conj_partner[i];

  const Complex iu(0.0, 1.0);
  for (int f = 0; f < k; ++f) {
    double w = aug.basis->omega(aug.fict[f].freq_slot);
    int base = n + 2 * f;
    // columns: (p, q) = v_minus (1, -i) + v_plus (1, i)
    s.eigenvalues(base) = Complex(0.0, -w);
    s.eigenvalues(base + 1) = Complex(0.0, w);
    s.conj_partner[base] = base + 1;
    s.conj_partner[base + 1] = base;
    s.M(aug.fict[f].p_index, base) = Complex(1.0, 0.0);
    s.M(aug.fict[f].q_index, base) = -iu;
    s.M(aug.fict[f].p_index, base + 1) = Complex(1.0, 0.0);
    s.M(aug.fict[f].q_index, base + 1) = iu;
    // inverse of [[1, 1], [-i, i]] is 0.5 [[1, i], [1, -i]]
    s.Minv(base, aug.fict[f].p_index) = Complex(0.5, 0.0);
    s.Minv(base, aug.fict[f].q_index) = Complex(0.0, 0.5);
    s.Minv(base + 1, aug.fict[f].p_index) = Complex(0.5, 0.0);
    s.Minv(base + 1, aug.fict[f].q_index) = Complex(0.0, -0.5);
  }
  return s;
}

}  // namespace qpr

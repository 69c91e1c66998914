#include "qpreduce/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qpr {

namespace {

// polynomial in the master variables per expansion order
using GradedPoly = std::map<int, QPStatePoly>;

void graded_add(GradedPoly& acc, int eps, const QPStatePoly& p) {
  if (p.empty()) return;
  auto it = acc.find(eps);
  if (it == acc.end())
    acc.emplace(eps, p);
  else
    it->second += p;
}

GradedPoly graded_mul(const GradedPoly& a, const GradedPoly& b, int max_eps) {
  GradedPoly out;
  for (const auto& [ea, pa] : a)
    for (const auto& [eb, pb] : b) {
      if (ea + eb > max_eps) continue;
      if (pa.empty() || pb.empty()) continue;
      graded_add(out, ea + eb, pa.mul(pb));
    }
  return out;
}

const char* stage_condition_id(int k, int m) {
  if (k == 0 && m == 1) return "Eq33-linear";
  if (m == 2) {
    if (k == 2) return "Eq39";
    if (k == 1) return "Eq43";
    return "Eq45";
  }
  if (m == 3) {
    if (k == 3) return "Eq52";
    if (k == 2) return "Eq55";
    if (k == 1) return "Eq43";
    return "Eq57";
  }
  return "Eq55";
}

struct Frame {
  int r, s;
  int deg, trunc;
  BasisPtr basis;
  std::vector<int> mconj, sconj, mvar_partner;
};

Frame make_frame(const PartitionedSystem& part) {
  Frame f;
  f.r = part.r();
  f.s = part.s();
  f.basis = part.basis;
  f.deg = part.wr.empty() ? 5 : part.wr.front().max_degree();
  f.trunc = part.wr.empty() ? 5 : part.wr.front().trunc_order();
  f.mconj = part.master_conj();
  f.sconj = part.slave_conj();
  f.mvar_partner = f.mconj;
  return f;
}

// expand an n-variable polynomial with the slave variables replaced by the
// graded manifold, keeping the expansion-order bookkeeping: a term of total
// degree d carries intrinsic order d-1 and each substituted block adds m-1
GradedPoly expand_graded(const QPStatePoly& poly, const PartitionedSystem& part,
                         const std::vector<GradedPoly>& slave_h, const Frame& fr,
                         int max_eps) {
  GradedPoly out;
  // intermediate products keep index headroom so that the final truncation is
  // order-independent (a dropped partial index cannot re-enter the bound)
  const int work_trunc = 3 * fr.trunc;
  for (const auto& [key, c] : poly.terms()) {
    int d = monomial_degree(key.mono);
    int intrinsic = std::max(0, d - 1);
    if (intrinsic > max_eps) continue;
    // master part of the monomial
    StateMonomial mm(fr.r, 0);
    for (int a = 0; a < fr.r; ++a) mm[a] = key.mono[part.master_indices[a]];
    GradedPoly acc;
    graded_add(acc, 0,
               QPStatePoly::term(fr.basis, fr.r, fr.deg, work_trunc, mm, key.p, c));
    for (int b = 0; b < fr.s; ++b) {
      int e = key.mono[part.slave_indices[b]];
      for (int rep = 0; rep < e; ++rep) {
        GradedPoly wide;
        for (const auto& [eps, p] : slave_h[b])
          graded_add(wide, eps, p.with_bounds(fr.deg, work_trunc));
        acc = graded_mul(acc, wide, max_eps - intrinsic);
        if (acc.empty()) break;
      }
      if (acc.empty()) break;
    }
    for (const auto& [eps, p] : acc)
      graded_add(out, eps + intrinsic, p.with_bounds(fr.deg, fr.trunc));
  }
  return out;
}

// exact conjugate mirror of a stage across slave pairs and master variables
void symmetrize_stage(std::vector<QPStatePoly>& h, const Frame& fr) {
  std::vector<QPStatePoly> out = h;
  for (int j = 0; j < fr.s; ++j) {
    int pj = fr.sconj[j];
    if (pj <= j && pj != j) continue;
    if (pj == j) continue;  // unpaired component, nothing to mirror against
    QPStatePoly sym = QPStatePoly::zero(fr.basis, fr.r, fr.deg, fr.trunc);
    for (const auto& [key, c] : h[j].terms()) {
      StateMonomial pm(key.mono.size());
      for (std::size_t l = 0; l < key.mono.size(); ++l)
        pm[fr.mvar_partner[l]] = key.mono[l];
      FreqIndex np(key.p.size());
      for (std::size_t l = 0; l < key.p.size(); ++l) np[l] = -key.p[l];
      Complex mirror = std::conj(
          h[pj].terms().count({pm, np}) ? h[pj].terms().at({pm, np}) : Complex(0, 0));
      sym.add_term(key.mono, key.p, 0.5 * (c + mirror));
    }
    out[j] = sym;
    if (pj != j) {
      QPStatePoly mir = QPStatePoly::zero(fr.basis, fr.r, fr.deg, fr.trunc);
      for (const auto& [key, c] : sym.terms()) {
        StateMonomial pm(key.mono.size());
        for (std::size_t l = 0; l < key.mono.size(); ++l)
          pm[fr.mvar_partner[l]] = key.mono[l];
        FreqIndex np(key.p.size());
        for (std::size_t l = 0; l < key.p.size(); ++l) np[l] = -key.p[l];
        mir.add_term(pm, np, std::conj(c));
      }
      out[pj] = mir;
    }
  }
  h = std::move(out);
}

std::map<int, std::vector<QPStatePoly>> residual_impl(
    const PartitionedSystem& part, const std::vector<ManifoldStage>& stages,
    int max_eps) {
  Frame fr = make_frame(part);
  std::map<int, std::vector<QPStatePoly>> res;
  auto ensure = [&](int eps) -> std::vector<QPStatePoly>& {
    auto it = res.find(eps);
    if (it == res.end())
      it = res.emplace(eps, std::vector<QPStatePoly>(
                                fr.s, QPStatePoly::zero(fr.basis, fr.r, fr.deg,
                                                        fr.trunc)))
               .first;
    return it->second;
  };
  for (int e = 0; e <= max_eps; ++e) ensure(e);

  // graded steady manifold per slave component
  std::vector<GradedPoly> H(fr.s);
  for (const auto& st : stages)
    for (int j = 0; j < fr.s; ++j) graded_add(H[j], st.m - 1, st.h[j]);

  // + F_s at order zero
  for (int j = 0; j < fr.s; ++j)
    ensure(0)[j] += QPStatePoly::from_series(part.Fs[j], fr.r, fr.deg);

  // + J_s H - dH/dt - (dH/dz_r) J_r z_r
  for (const auto& st : stages) {
    int eps = st.m - 1;
    if (eps > max_eps) continue;
    auto& slot = ensure(eps);
    for (int j = 0; j < fr.s; ++j) {
      if (st.h[j].empty()) continue;
      slot[j] += st.h[j].scaled(part.Js(j));
      slot[j] += st.h[j].ddt().scaled(Complex(-1.0, 0.0));
      // each term picks up -(m . J_r)
      QPStatePoly drift = QPStatePoly::zero(fr.basis, fr.r, fr.deg, fr.trunc);
      for (const auto& [key, c] : st.h[j].terms()) {
        Complex mdot(0, 0);
        for (int l = 0; l < fr.r; ++l)
          mdot += static_cast<double>(key.mono[l]) * part.Jr(l);
        drift.add_term(key.mono, key.p, -c * mdot);
      }
      slot[j] += drift;
    }
  }

  // + w_s(z_r, H)
  for (int j = 0; j < fr.s; ++j) {
    GradedPoly ws = expand_graded(part.ws[j], part, H, fr, max_eps);
    for (const auto& [eps, p] : ws)
      if (eps <= max_eps) ensure(eps)[j] += p;
  }

  // - (dH/dz_r) (F_r + w_r(z_r, H))
  std::vector<GradedPoly> wr_graded(fr.r);
  for (int l = 0; l < fr.r; ++l)
    wr_graded[l] = expand_graded(part.wr[l], part, H, fr, max_eps);
  for (const auto& st : stages) {
    int eps0 = st.m - 1;
    for (int j = 0; j < fr.s; ++j) {
      if (st.h[j].empty()) continue;
      for (int l = 0; l < fr.r; ++l) {
        QPStatePoly dh = st.h[j].partial(l);
        if (dh.empty()) continue;
        if (!part.Fr[l].empty() && eps0 <= max_eps)
          ensure(eps0)[j] += dh.mul_series(part.Fr[l]).scaled(Complex(-1.0, 0.0));
        for (const auto& [eps1, wl] : wr_graded[l]) {
          if (eps0 + eps1 > max_eps || wl.empty()) continue;
          ensure(eps0 + eps1)[j] += dh.mul(wl).scaled(Complex(-1.0, 0.0));
        }
      }
    }
  }
  return res;
}

}  // namespace

const ManifoldStage* ManifoldMap::stage(int k, int m) const {
  for (const auto& st : stages)
    if (st.k == k && st.m == m) return &st;
  return nullptr;
}

std::vector<QPStatePoly> ManifoldMap::steady() const {
  std::vector<QPStatePoly> out;
  if (stages.empty()) return out;
  out.assign(s, QPStatePoly::zero(basis, r, stages.front().h.front().max_degree(),
                                  stages.front().h.front().trunc_order()));
  for (const auto& st : stages)
    for (int j = 0; j < s; ++j) out[j] += st.h[j];
  return out;
}

std::vector<QPStatePoly> ManifoldMap::full_map() const {
  std::vector<QPStatePoly> out = steady();
  if (!keep_transients || out.empty()) return out;
  for (const auto& st : stages) {
    for (int j = 0; j < s; ++j) {
      for (const auto& tr : st.transients[j]) {
        if (std::abs(tr.coeff) < kPurgeThreshold) continue;
        if (slave_mode_slot[j] < 0)
          throw AssemblyError("manifold: transient carrier frequency missing");
        FreqIndex p(basis->size(), 0);
        p[slave_mode_slot[j]] = slave_mode_sign[j];
        out[j].add_term(StateMonomial(r, 0), p, tr.coeff);
      }
    }
  }
  return out;
}

Eigen::VectorXcd ManifoldMap::eval(double t, const Eigen::VectorXcd& zr,
                                   bool with_transients) const {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(s);
  for (const auto& st : stages) {
    for (int j = 0; j < s; ++j) {
      if (!st.h[j].empty()) out(j) += st.h[j].apply(t, zr);
      if (with_transients)
        for (const auto& tr : st.transients[j])
          out(j) += tr.coeff * std::exp(tr.lambda * t);
    }
  }
  return out;
}

bool ReducibilityReport::any_violated() const {
  for (const auto& c : checks)
    if (c.violated) return true;
  return false;
}

std::map<int, std::vector<QPStatePoly>> manifold_residual(
    const PartitionedSystem& part, const std::vector<ManifoldStage>& stages,
    int max_eps) {
  return residual_impl(part, stages, max_eps);
}

namespace {

// solve one (k, m) block from the eps-level sources already assembled
ManifoldStage solve_block(const PartitionedSystem& part, const Frame& fr,
                          const std::vector<QPStatePoly>& level, int k, int m,
                          double tol, bool keep_transients,
                          ReducibilityReport& report) {
  report.tol = tol;
  ManifoldStage stage;
  stage.k = k;
  stage.m = m;
  stage.condition_id = stage_condition_id(k, m);
  stage.h.assign(fr.s, QPStatePoly::zero(fr.basis, fr.r, fr.deg, fr.trunc));
  stage.transients.assign(fr.s, {});

  for (int j = 0; j < fr.s; ++j) {
    QPStatePoly source = level[j].degree_part(k);
    for (const auto& [key, c] : source.terms()) {
      // steady feedback keeps the mode slots empty
      for (int comp = part.n_param + part.n_forcing;
           comp < static_cast<int>(key.p.size()); ++comp)
        if (key.p[comp] != 0)
          throw AssemblyError("manifold: steady source leaked a mode frequency");
      Complex divisor(0.0, part.basis->dot(key.p));
      for (int l = 0; l < fr.r; ++l)
        divisor += static_cast<double>(key.mono[l]) * part.Jr(l);
      divisor -= part.Js(j);
      double mag = std::abs(divisor);
      bool violated = mag < tol;
      report.checks.push_back({stage.condition_id, j, key.mono, key.p, mag, violated});
      report.min_divisor = std::min(report.min_divisor, mag);
      if (violated) {
        std::ostringstream os;
        os << "condition " << stage.condition_id << " violated on slave component "
           << j << ": |divisor| = " << mag << " < " << tol;
        if (k == 0 && m == 1)
          throw LinearResonance(os.str());
        throw ReducibilityViolation(os.str(), stage.condition_id);
      }
      stage.h[j].add_term(key.mono, key.p, c / divisor);
    }
  }
  symmetrize_stage(stage.h, fr);
  // trim the numerical floor relative to the block scale
  double block_scale = 0.0;
  for (const auto& h : stage.h) block_scale = std::max(block_scale, h.max_abs_coeff());
  for (auto& h : stage.h) h.purge(1e-8 * block_scale);

  if (k == 0 && keep_transients) {
    for (int j = 0; j < fr.s; ++j) {
      Complex at0 = stage.h[j].apply(0.0, Eigen::VectorXcd::Zero(fr.r));
      if (std::abs(at0) >= kPurgeThreshold)
        stage.transients[j].push_back({-at0, part.Js(j)});
    }
  }
  return stage;
}

// after a block is absorbed, the same-level residual changes only through the
// linear parts of the invariance equation
void apply_block_update(const PartitionedSystem& part, const Frame& fr,
                        const ManifoldStage& st, std::vector<QPStatePoly>& level) {
  for (int j = 0; j < fr.s; ++j) {
    const QPStatePoly& h = st.h[j];
    if (h.empty()) continue;
    level[j] += h.scaled(part.Js(j));
    level[j] += h.ddt().scaled(Complex(-1.0, 0.0));
    QPStatePoly drift = QPStatePoly::zero(fr.basis, fr.r, fr.deg, fr.trunc);
    for (const auto& [key, c] : h.terms()) {
      Complex mdot(0, 0);
      for (int l = 0; l < fr.r; ++l)
        mdot += static_cast<double>(key.mono[l]) * part.Jr(l);
      drift.add_term(key.mono, key.p, -c * mdot);
    }
    level[j] += drift;
    for (int l = 0; l < fr.r; ++l) {
      if (part.Fr[l].empty()) continue;
      QPStatePoly dh = h.partial(l);
      if (dh.empty()) continue;
      level[j] += dh.mul_series(part.Fr[l]).scaled(Complex(-1.0, 0.0));
    }
  }
}

std::vector<ManifoldStage> solve_level(const PartitionedSystem& part,
                                       const std::vector<ManifoldStage>& lower,
                                       int m, double tol, bool keep_transients,
                                       ReducibilityReport& report) {
  Frame fr = make_frame(part);
  auto res = residual_impl(part, lower, m - 1);
  std::vector<QPStatePoly> level = res.at(m - 1);
  std::vector<ManifoldStage> out;
  for (int k = m; k >= 0; --k) {
    out.push_back(solve_block(part, fr, level, k, m, tol, keep_transients, report));
    apply_block_update(part, fr, out.back(), level);
  }
  return out;
}

}  // namespace

ManifoldStage solve_stage(const PartitionedSystem& part,
                          const std::vector<ManifoldStage>& solved, int k, int m,
                          double tol, bool keep_transients,
                          ReducibilityReport& report) {
  Frame fr = make_frame(part);
  auto res = residual_impl(part, solved, m - 1);
  return solve_block(part, fr, res.at(m - 1), k, m, tol, keep_transients, report);
}

ManifoldStage solve_h01(const PartitionedSystem& part, double tol,
                        bool keep_transients, ReducibilityReport& report) {
  return solve_stage(part, {}, 0, 1, tol, keep_transients, report);
}

std::vector<ManifoldStage> solve_order1(const PartitionedSystem& part,
                                        const std::vector<ManifoldStage>& lower,
                                        double tol, ReducibilityReport& report,
                                        bool keep_transients) {
  return solve_level(part, lower, 2, tol, keep_transients, report);
}

std::vector<ManifoldStage> solve_order2(const PartitionedSystem& part,
                                        const std::vector<ManifoldStage>& lower,
                                        double tol, ReducibilityReport& report,
                                        bool keep_transients) {
  return solve_level(part, lower, 3, tol, keep_transients, report);
}

ManifoldMap solve_manifold(const PartitionedSystem& part, const ManifoldOptions& opt,
                           ReducibilityReport& report) {
  if (opt.eps_order < 0 || opt.eps_order > 2)
    throw ValidationError("manifold: expansion order must be 0, 1 or 2");
  ManifoldMap map;
  map.r = part.r();
  map.s = part.s();
  map.basis = part.basis;
  map.keep_transients = opt.keep_transients;
  map.epsilon_order_used = opt.eps_order;
  map.slave_mode_slot.resize(part.s());
  map.slave_mode_sign.resize(part.s());
  for (int j = 0; j < part.s(); ++j) {
    map.slave_mode_slot[j] = part.mode_slot[part.slave_indices[j]];
    map.slave_mode_sign[j] = part.mode_sign[part.slave_indices[j]];
  }

  map.stages.push_back(solve_h01(part, opt.tol, opt.keep_transients, report));
  if (opt.eps_order >= 1) {
    auto blocks = solve_order1(part, {map.stages.begin(), map.stages.end()}, opt.tol,
                               report, opt.keep_transients);
    for (auto& b : blocks) map.stages.push_back(std::move(b));
  }
  if (opt.eps_order >= 2) {
    auto blocks = solve_order2(part, {map.stages.begin(), map.stages.end()}, opt.tol,
                               report, opt.keep_transients);
    for (auto& b : blocks) map.stages.push_back(std::move(b));
  }
  return map;
}

ReducedModel reduce_manifold(const PartitionedSystem& part, const ManifoldMap& map) {
  ReducedModel model;
  model.Jr = part.Jr;
  model.Fr = part.Fr;
  model.provenance = ReducedModel::Provenance::Manifold;
  model.selector = part.master_indices;
  model.basis = part.basis;
  std::vector<QPStatePoly> H = map.full_map();
  if (H.empty())
    H.assign(part.s(), QPStatePoly::zero(part.basis, part.r(),
                                         part.wr.empty() ? 5
                                                         : part.wr.front().max_degree(),
                                         part.wr.empty()
                                             ? 5
                                             : part.wr.front().trunc_order()));
  for (const auto& w : part.wr)
    model.wbar.push_back(poly_substitute(w, H, part.master_indices));
  // keep integration cost proportional to the significant content
  double scale = 0.0;
  for (const auto& w : model.wbar) scale = std::max(scale, w.max_abs_coeff());
  for (auto& w : model.wbar) w.purge(1e-7 * scale);
  return model;
}

}  // namespace qpr

#pragma once

// Shared builders for the coupled Mathieu-Hill application system used across
// the test suites.

#include "qpreduce/lp_transform.hpp"
#include "qpreduce/manifold.hpp"
#include "qpreduce/reduction.hpp"

namespace qpr::testing {

struct AppSystem {
  QPLinearSystem linear;
  std::vector<NonlinearMonomial> nonlinear;
  std::vector<double> forcing_freqs;
  std::vector<std::string> forcing_labels;
  std::vector<ForcingHarmonic> forcing;
  Eigen::VectorXd x0;

  // original nonlinear forced dynamics in physical coordinates
  RealRhs rhs() const {
    return [this](double t, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
      dx = linear.eval(t) * x;
      Eigen::VectorXcd z = x.cast<Complex>();
      for (const auto& m : nonlinear) {
        Complex v(m.coefficient, 0.0);
        for (int i = 0; i < static_cast<int>(m.exponents.size()); ++i)
          for (int e = 0; e < m.exponents[i]; ++e) v *= z(i);
        dx(m.target) += v.real();
      }
      for (const auto& f : forcing) {
        double w0 = forcing_freqs[f.forcing_slot];
        dx(f.target) += f.amplitude *
                        (f.kind == PhaseKind::Cos ? std::cos(w0 * t) : std::sin(w0 * t));
      }
    };
  }
};

inline AppSystem app_system(double amp = 2.5, double a1 = 3.0, double a2 = 5.0,
                            double A1 = 1.0, double A2 = 1.0) {
  AppSystem s;
  s.linear.basis = FrequencyBasis::create({2.0 * std::numbers::pi, 7.0},
                                          {"w1", "w2"}, 1e-6);
  s.linear.B0.resize(4, 4);
  s.linear.B0 << 0, 1, 0, 0, -a1, 0, 0, 0, 0, 0, 0, 1, 0, 0, -a2, 0;
  if (amp != 0.0)
    s.linear.terms = {{1, 0, -amp, 0, PhaseKind::Cos},
                      {1, 0, -amp, 1, PhaseKind::Cos},
                      {3, 2, -amp, 0, PhaseKind::Cos},
                      {3, 2, -amp, 1, PhaseKind::Cos}};
  s.nonlinear = {{1, {2, 0, 1, 0}, -1.0}, {3, {1, 0, 2, 0}, -1.0}};
  s.forcing_freqs = {1.0};
  s.forcing_labels = {"wf"};
  s.forcing = {{1, A1, 0, PhaseKind::Cos}, {3, A2, 0, PhaseKind::Cos}};
  s.x0.resize(4);
  s.x0 << 0.1, 0.0, 0.1, 0.0;
  return s;
}

inline LPTransform app_lp(const AppSystem& s, int order = 4, int trunc = 5) {
  AugmentedSystem aug = augment(s.linear);
  Spectrum spec = modal(aug);
  double scale = 0.0;
  for (int i = 0; i < spec.eigenvalues.size(); ++i)
    scale = std::max(scale, std::abs(spec.eigenvalues(i)));
  auto nf = normal_form_iterate(aug, spec, order, 1e-6 * scale);
  return assemble_q(nf, aug, spec, trunc);
}

inline TransformedSystem app_transformed(const AppSystem& s, const LPTransform& lp,
                                         TransformOptions opt = {}) {
  return build_transformed(lp, s.nonlinear, s.forcing_freqs, s.forcing_labels,
                           s.forcing, opt);
}

inline double manifold_tol(const TransformedSystem& ts) {
  double m = 0.0;
  for (int i = 0; i < ts.dim(); ++i) m = std::max(m, std::abs(ts.jbar(i)));
  return 1e-4 * m;
}

// default application pipeline, built once per test binary
struct AppPipeline {
  AppSystem sys;
  LPTransform lp;
  TransformedSystem ts;
};

inline const AppPipeline& app_pipeline() {
  static AppPipeline p = [] {
    AppPipeline q;
    q.sys = app_system();
    q.lp = app_lp(q.sys);
    q.ts = app_transformed(q.sys, q.lp);
    return q;
  }();
  return p;
}

}  // namespace qpr::testing

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qpreduce/lp_transform.hpp"
#include "qpreduce/simulate.hpp"
#include "support/util.hpp"

using namespace qpr;
using namespace qpr::testing;

namespace {

QPLinearSystem mathieu_hill_linear(double amp) {
  QPLinearSystem sys;
  sys.basis = two_freq_basis();
  sys.B0.resize(4, 4);
  sys.B0 << 0, 1, 0, 0, -3, 0, 0, 0, 0, 0, 0, 1, 0, 0, -5, 0;
  sys.terms = {{1, 0, -amp, 0, PhaseKind::Cos},
               {1, 0, -amp, 1, PhaseKind::Cos},
               {3, 2, -amp, 0, PhaseKind::Cos},
               {3, 2, -amp, 1, PhaseKind::Cos}};
  return sys;
}

LPTransform build_lp(const QPLinearSystem& sys, int order = 4, int trunc = 5) {
  AugmentedSystem aug = augment(sys);
  Spectrum spec = modal(aug);
  double scale = 0.0;
  for (int i = 0; i < spec.eigenvalues.size(); ++i)
    scale = std::max(scale, std::abs(spec.eigenvalues(i)));
  auto nf = normal_form_iterate(aug, spec, order, 1e-6 * scale);
  return assemble_q(nf, aug, spec, trunc);
}

}  // namespace

TEST_CASE("no parametric terms: transform is the identity") {
  QPLinearSystem sys = mathieu_hill_linear(0.0);
  sys.terms.clear();
  LPTransform lp = build_lp(sys);
  CHECK(lp.verification.q0_identity_error <= 1e-12);
  for (double t : {0.0, 1.0, 7.7}) {
    Eigen::MatrixXd Qt = lp.eval(t);
    CHECK((Qt - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-12);
  }
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(lp.qbar[i][j].empty());
}

TEST_CASE("application parameters: Q(0) = I within 1e-8") {
  LPTransform lp = build_lp(mathieu_hill_linear(2.5));
  CHECK(lp.verification.q0_identity_error <= 1e-8);
  CHECK(lp.verification.product_residual <= 1e-10);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      CHECK(lp.Q[i][j].real_flag());
      CHECK(lp.Q[i][j].conjugate_symmetric());
    }
}

TEST_CASE("transformed linear flow tracks the direct integration") {
  QPLinearSystem sys = mathieu_hill_linear(0.5);
  LPTransform lp = build_lp(sys);

  Eigen::VectorXd x0(4);
  x0 << 0.1, 0.0, 0.1, 0.0;
  auto rhs = [&sys](double t, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
    dx = sys.eval(t) * x;
  };
  Trajectory direct = integrate(rhs, x0, 0.0, 50.0, 1e-3, "direct");

  // u(0) = x0 since Q(0) = I; u(t) = Mp exp(Jbar t) Mp^{-1} x0
  Eigen::MatrixXcd MpInv = lp.MpInv;
  Eigen::VectorXcd z0 = MpInv * x0.cast<Complex>();
  double err2 = 0.0, sig2 = 0.0;
  for (std::size_t i = 0; i < direct.times.size(); i += 10) {
    double t = direct.times[i];
    Eigen::VectorXcd z(4);
    for (int j = 0; j < 4; ++j) z(j) = z0(j) * std::exp(lp.jbar(j) * t);
    Eigen::VectorXcd u = lp.Mp * z;
    Eigen::VectorXd x_hat = (lp.eval(t) * u.real());
    err2 += (x_hat - direct.states.row(i).transpose()).squaredNorm();
    sig2 += direct.states.row(i).squaredNorm();
  }
  CHECK(std::sqrt(err2) <= 0.02 * std::sqrt(sig2));
}

TEST_CASE("conjugacy residual is small for weak excitation") {
  QPLinearSystem sys = mathieu_hill_linear(0.1);
  LPTransform lp = build_lp(sys);
  Eigen::MatrixXcd Rbar = lp.Mp * lp.jbar.asDiagonal() * lp.MpInv;
  CHECK(Rbar.imag().cwiseAbs().maxCoeff() <= 1e-10);
  for (double t : {0.0, 0.7, 2.9, 11.3}) {
    Eigen::MatrixXd lhs = lp.eval_dot(t);
    Eigen::MatrixXd rhs = sys.eval(t) * lp.eval(t) - lp.eval(t) * Rbar.real();
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 2e-3);
  }
}

TEST_CASE("truncation consistency of the assembled transform") {
  QPLinearSystem sys = mathieu_hill_linear(2.5);
  LPTransform lo = build_lp(sys, 4, 5);
  LPTransform hi = build_lp(sys, 4, 7);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (const auto& [p, c] : lo.Q[i][j].coeffs())
        CHECK(std::abs(hi.Q[i][j].coeff(p) - c) <= 1e-12);
}

TEST_CASE("modal state at t = 0 inverts the modal map") {
  LPTransform lp = build_lp(mathieu_hill_linear(2.5));
  Eigen::VectorXd x0(4);
  x0 << 0.1, -0.2, 0.05, 0.3;
  Eigen::VectorXcd v0 = lp.modal_state(x0);
  Eigen::VectorXcd back = lp.modal_map(0.0) * v0;
  CHECK((back.real() - x0).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(back.imag().cwiseAbs().maxCoeff() <= 1e-10);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qpreduce/inverse.hpp"
#include "support/util.hpp"

using namespace qpr;
using namespace qpr::testing;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = a + (b - a) * i / (n - 1);
  return g;
}

LPTransform rotation_lp(double w) {
  auto basis = FrequencyBasis::derived({w}, {"w"}, 1e-6);
  LPTransform lp = LPTransform::identity(2);
  lp.qbasis = basis;
  lp.param_basis = basis;
  QPSeries c = QPSeries::cosine(basis, 0, 2);
  QPSeries s = QPSeries::sine(basis, 0, 2);
  lp.Q = {{c, s.scaled(Complex(-1, 0))}, {s, c}};
  return lp;
}

LPTransform mathieu_lp() {
  QPLinearSystem sys;
  sys.basis = two_freq_basis();
  sys.B0.resize(4, 4);
  sys.B0 << 0, 1, 0, 0, -3, 0, 0, 0, 0, 0, 0, 1, 0, 0, -5, 0;
  sys.terms = {{1, 0, -2.5, 0, PhaseKind::Cos},
               {1, 0, -2.5, 1, PhaseKind::Cos},
               {3, 2, -2.5, 0, PhaseKind::Cos},
               {3, 2, -2.5, 1, PhaseKind::Cos}};
  AugmentedSystem aug = augment(sys);
  Spectrum spec = modal(aug);
  double scale = 0.0;
  for (int i = 0; i < spec.eigenvalues.size(); ++i)
    scale = std::max(scale, std::abs(spec.eigenvalues(i)));
  auto nf = normal_form_iterate(aug, spec, 4, 1e-6 * scale);
  return assemble_q(nf, aug, spec, 5);
}

}  // namespace

TEST_CASE("identity transform inverts to the identity") {
  LPTransform lp = LPTransform::identity(3);
  SampledInverse inv = invert_direct(lp, linspace(0.0, 10.0, 11));
  for (const auto& W : inv.W)
    CHECK((W - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(inv.max_residual() <= 1e-14);
}

TEST_CASE("rotation inverts to its transpose") {
  LPTransform lp = rotation_lp(1.3);
  auto grid = linspace(0.0, 12.0, 97);
  SampledInverse inv = invert_direct(lp, grid);
  CHECK(inv.max_residual() <= 1e-12);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Eigen::MatrixXd Qt = lp.eval(grid[i]);
    CHECK((inv.W[i] - Qt.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("application transform: direct residuals at 1e-10 on 1000 samples") {
  LPTransform lp = mathieu_lp();
  SampledInverse inv = invert_direct(lp, linspace(0.0, 50.0, 1000));
  CHECK(inv.max_residual() <= 1e-10);
  CHECK((inv.W.front() - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("singular sample raises with the offending time") {
  auto basis = FrequencyBasis::derived({1.0}, {"w"}, 1e-6);
  LPTransform lp = LPTransform::identity(2);
  lp.qbasis = basis;
  lp.param_basis = basis;
  lp.Q = {{QPSeries::cosine(basis, 0, 2), QPSeries::zero(basis, 2, true)},
          {QPSeries::zero(basis, 2, true), QPSeries::constant(basis, 1.0, 2, true)}};
  // cos(t) vanishes at pi/2
  std::vector<double> grid{0.0, 3.14159265358979323846 / 2.0};
  CHECK_THROWS_AS(invert_direct(lp, grid), SingularSampleError);
}

TEST_CASE("znn holds the fixed point exactly") {
  LPTransform lp = LPTransform::identity(3);
  ZNNConfig cfg;
  cfg.grid = linspace(0.0, 2.0, 21);
  SampledInverse inv = invert_znn(lp, cfg);
  for (const auto& W : inv.W)
    CHECK((W - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("perturbed start decays like exp(-gamma t)") {
  const int n = 3;
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  MatrixFn Q = [&](double) { return Eigen::MatrixXd(Eigen::MatrixXd::Identity(n, n)); };
  MatrixFn Qd = [&](double) { return Eigen::MatrixXd(Eigen::MatrixXd::Zero(n, n)); };
  ZNNConfig cfg;
  cfg.gamma = 50.0;
  cfg.step = 1e-3;
  double t_probe = 3.0 / cfg.gamma;
  cfg.grid = {0.0, t_probe};
  Eigen::MatrixXd W0 = I + 0.1 * Eigen::MatrixXd::Ones(n, n);
  SampledInverse inv = znn_integrate(Q, Qd, W0, cfg);
  double e0 = (W0 - I).norm();
  double et = (inv.W.back() - I).norm();
  CHECK(et == doctest::Approx(e0 * std::exp(-3.0)).epsilon(0.01));
}

TEST_CASE("znn matches the direct inverse on the application transform") {
  LPTransform lp = mathieu_lp();
  auto grid = linspace(0.0, 5.0, 101);
  SampledInverse direct = invert_direct(lp, grid);
  ZNNConfig cfg;
  cfg.gamma = 100.0;
  cfg.step = 5e-4;
  cfg.grid = grid;
  SampledInverse znn = invert_znn(lp, cfg);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0.1) continue;
    CHECK((znn.W[i] - direct.W[i]).cwiseAbs().maxCoeff() <= 1e-4);
  }
  CHECK(znn.max_residual() <= 1e-4);
}

TEST_CASE("error norm is non-increasing along znn trajectories") {
  LPTransform lp = mathieu_lp();
  ZNNConfig cfg;
  cfg.gamma = 100.0;
  cfg.step = 5e-4;
  cfg.grid = linspace(0.0, 3.0, 301);
  SampledInverse znn = invert_znn(lp, cfg);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(4, 4);
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < znn.times.size(); ++i) {
    double e = (lp.eval(znn.times[i]) * znn.W[i] - I).norm();
    CHECK(e <= prev + 1e-9);
    prev = e;
  }
}

TEST_CASE("raising gamma never slows the transient") {
  const int n = 2;
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  MatrixFn Q = [&](double) { return Eigen::MatrixXd(Eigen::MatrixXd::Identity(n, n)); };
  MatrixFn Qd = [&](double) { return Eigen::MatrixXd(Eigen::MatrixXd::Zero(n, n)); };
  Eigen::MatrixXd W0 = I + 0.1 * Eigen::MatrixXd::Ones(n, n);
  double prev_time = std::numeric_limits<double>::infinity();
  for (double gamma : {10.0, 50.0, 100.0}) {
    ZNNConfig cfg;
    cfg.gamma = gamma;
    cfg.step = 0.1 / gamma * 0.5;
    cfg.grid = linspace(0.0, 5.0, 5001);
    SampledInverse inv = znn_integrate(Q, Qd, W0, cfg);
    double reach = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < inv.times.size(); ++i) {
      if ((inv.W[i] - I).norm() < 1e-6) {
        reach = inv.times[i];
        break;
      }
    }
    CHECK(reach <= prev_time + 1e-9);
    prev_time = reach;
  }
}

TEST_CASE("config validation enforces the stability product") {
  ZNNConfig cfg;
  cfg.gamma = 100.0;
  cfg.step = 2e-3;  // product 0.2
  cfg.grid = {0.0, 1.0};
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.step = 1e-3;
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("power-sigmoid activation also converges") {
  const int n = 2;
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  MatrixFn Q = [&](double) { return Eigen::MatrixXd(Eigen::MatrixXd::Identity(n, n)); };
  MatrixFn Qd = [&](double) { return Eigen::MatrixXd(Eigen::MatrixXd::Zero(n, n)); };
  ZNNConfig cfg;
  cfg.gamma = 50.0;
  cfg.step = 1e-3;
  cfg.activation = Activation::PowerSigmoid;
  cfg.grid = {0.0, 1.0};
  Eigen::MatrixXd W0 = I + 0.1 * Eigen::MatrixXd::Ones(n, n);
  SampledInverse inv = znn_integrate(Q, Qd, W0, cfg);
  CHECK((inv.W.back() - I).cwiseAbs().maxCoeff() <= 1e-6);
}

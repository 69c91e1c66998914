#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qpreduce/augment.hpp"
#include "qpreduce/simulate.hpp"
#include "support/util.hpp"

using namespace qpr;
using namespace qpr::testing;

namespace {

QPLinearSystem mathieu_hill_linear(double b1, double c1, double b2, double c2) {
  QPLinearSystem sys;
  sys.basis = two_freq_basis();
  sys.B0.resize(4, 4);
  sys.B0 << 0, 1, 0, 0, -3, 0, 0, 0, 0, 0, 0, 1, 0, 0, -5, 0;
  sys.terms = {{1, 0, -b1, 0, PhaseKind::Cos},
               {1, 0, -c1, 1, PhaseKind::Cos},
               {3, 2, -b2, 0, PhaseKind::Cos},
               {3, 2, -c2, 1, PhaseKind::Cos}};
  return sys;
}

RealRhs direct_rhs(const QPLinearSystem& sys) {
  return [&sys](double t, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
    dx = sys.eval(t) * x;
  };
}

RealRhs augmented_rhs(const AugmentedSystem& aug) {
  return [&aug](double t, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
    dx = aug.Bbar0 * x;
    Eigen::VectorXcd z = x.cast<Complex>();
    for (int i = 0; i < aug.dim(); ++i)
      if (!aug.coupling[i].empty()) dx(i) += aug.coupling[i].apply(t, z).real();
  };
}

}  // namespace

TEST_CASE("nothing to augment when B(t) = 0") {
  QPLinearSystem sys;
  sys.basis = two_freq_basis();
  sys.B0.resize(2, 2);
  sys.B0 << 0, 1, -3, 0;
  AugmentedSystem aug = augment(sys);
  CHECK(aug.dim() == 2);
  CHECK(aug.fict.empty());
  CHECK(aug.Bbar0 == sys.B0);
  for (const auto& c : aug.coupling) CHECK(c.empty());
}

TEST_CASE("parametric cosine entry becomes a fictitious quadratic monomial") {
  QPLinearSystem sys = mathieu_hill_linear(2.5, 0.0, 0.0, 0.0);
  sys.terms.resize(1);  // keep only b1 cos(w1 t) on the first oscillator
  AugmentedSystem aug = augment(sys);
  CHECK(aug.dim() == 6);
  REQUIRE(aug.fict.size() == 1);
  int q1 = aug.fict[0].q_index;
  StateMonomial expect(6, 0);
  expect[0] = 1;   // x
  expect[q1] = 1;  // cos-like state
  bool found = false;
  for (const auto& [key, c] : aug.coupling[1].terms())
    if (key.mono == expect && std::abs(c - Complex(-2.5, 0.0)) < 1e-14) found = true;
  CHECK(found);
  // velocity rows of the other oscillator stay clean
  CHECK(aug.coupling[3].empty());
  // fictitious rotation block
  double w1 = sys.basis->omega(0);
  CHECK(aug.Bbar0(aug.fict[0].p_index, aug.fict[0].q_index) == doctest::Approx(w1));
  CHECK(aug.Bbar0(aug.fict[0].q_index, aug.fict[0].p_index) == doctest::Approx(-w1));
}

TEST_CASE("augmented flow reproduces the non-autonomous flow") {
  QPLinearSystem sys = mathieu_hill_linear(2.5, 2.5, 2.5, 2.5);
  AugmentedSystem aug = augment(sys);
  Eigen::VectorXd x0(4);
  x0 << 0.1, 0.0, 0.1, 0.0;
  Trajectory direct = integrate(direct_rhs(sys), x0, 0.0, 20.0, 1e-3, "direct");
  Trajectory lifted =
      integrate(augmented_rhs(aug), aug.initial_state(x0), 0.0, 20.0, 1e-3, "augmented");
  for (int j = 0; j < 4; ++j) {
    Eigen::VectorXd diff = lifted.states.col(j) - direct.states.col(j);
    CHECK(rms(diff) <= 1e-6);
  }
}

TEST_CASE("round-trip flow equivalence on randomized small systems") {
  for (int rep = 0; rep < 4; ++rep) {
    int n = 2 * uniform_int(1, 2);
    QPLinearSystem sys;
    sys.basis = two_freq_basis();
    sys.B0 = Eigen::MatrixXd::Zero(n, n);
    for (int osc = 0; osc < n / 2; ++osc) {
      sys.B0(2 * osc, 2 * osc + 1) = 1.0;
      sys.B0(2 * osc + 1, 2 * osc) = -uniform(2.0, 6.0);
    }
    int terms = uniform_int(1, 3);
    for (int i = 0; i < terms; ++i)
      sys.terms.push_back({uniform_int(0, n - 1), uniform_int(0, n - 1),
                           uniform(-1.0, 1.0), uniform_int(0, 1),
                           uniform_int(0, 1) ? PhaseKind::Cos : PhaseKind::Sin});
    AugmentedSystem aug = augment(sys);
    Eigen::VectorXd x0 = Eigen::VectorXd::Constant(n, 0.1);
    Trajectory direct = integrate(direct_rhs(sys), x0, 0.0, 10.0, 1e-3, "direct");
    Trajectory lifted =
        integrate(augmented_rhs(aug), aug.initial_state(x0), 0.0, 10.0, 1e-3, "aug");
    for (int j = 0; j < n; ++j)
      CHECK(rms(Eigen::VectorXd(lifted.states.col(j) - direct.states.col(j))) <= 1e-6);
  }
}

TEST_CASE("modal of a diagonal matrix is trivial") {
  Eigen::MatrixXd D = Eigen::Vector3d(0.5, -1.0, 2.0).asDiagonal();
  Spectrum s = modal(D);
  CHECK(s.reconstruction_error(D) <= 1e-10);
  // ordering: all-real spectrum, ascending |Re|
  CHECK(s.eigenvalues(0).real() == doctest::Approx(0.5));
  CHECK(s.eigenvalues(1).real() == doctest::Approx(-1.0));
  CHECK(s.eigenvalues(2).real() == doctest::Approx(2.0));
}

TEST_CASE("oscillator block eigenvalues") {
  Eigen::MatrixXd B(2, 2);
  B << 0, 1, -3, 0;
  Spectrum s = modal(B);
  double r = std::sqrt(3.0);
  CHECK(s.eigenvalues(0).imag() == doctest::Approx(-r).epsilon(1e-10));
  CHECK(s.eigenvalues(1).imag() == doctest::Approx(r).epsilon(1e-10));
  CHECK(std::abs(s.eigenvalues(0).real()) < 1e-12);
  CHECK(s.conj_partner[0] == 1);
  CHECK(s.reconstruction_error(B) <= 1e-10);
}

TEST_CASE("fictitious rotation block eigenvalues are the excitation frequencies") {
  QPLinearSystem sys = mathieu_hill_linear(1.0, 1.0, 1.0, 1.0);
  AugmentedSystem aug = augment(sys);
  Spectrum s = modal(aug);
  double w1 = sys.basis->omega(0), w2 = sys.basis->omega(1);
  CHECK(s.eigenvalues(4) == Complex(0.0, -w1));
  CHECK(s.eigenvalues(5) == Complex(0.0, w1));
  CHECK(s.eigenvalues(6) == Complex(0.0, -w2));
  CHECK(s.eigenvalues(7) == Complex(0.0, w2));
  CHECK(s.reconstruction_error(aug.Bbar0) <= 1e-10);
  // physical pairs first, ascending |Im|, negative first
  CHECK(s.eigenvalues(0).imag() == doctest::Approx(-std::sqrt(3.0)));
  CHECK(s.eigenvalues(2).imag() == doctest::Approx(-std::sqrt(5.0)));
}

TEST_CASE("conjugate pairing is exact for real input") {
  for (int rep = 0; rep < 10; ++rep) {
    int n = 4;
    Eigen::MatrixXd B = Eigen::MatrixXd::Random(n, n);
    Spectrum s;
    try {
      s = modal(B);
    } catch (const NotSemiSimpleError&) {
      continue;
    }
    for (int j = 0; j < n; ++j) {
      int pj = s.conj_partner[j];
      CHECK(s.eigenvalues(pj) == std::conj(s.eigenvalues(j)));
    }
  }
}

TEST_CASE("defective matrix is rejected") {
  Eigen::MatrixXd B(2, 2);
  B << 0, 1, 0, 0;
  CHECK_THROWS_AS(modal(B), NotSemiSimpleError);
}

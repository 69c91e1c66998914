#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qpreduce/algebra.hpp"
#include "support/util.hpp"

using namespace qpr;
using namespace qpr::testing;

TEST_CASE("frequency basis rejects commensurate pairs") {
  CHECK_THROWS_AS(FrequencyBasis::create({2.0, 3.0}, {"a", "b"}, 1e-6), BasisError);
  CHECK_THROWS_AS(FrequencyBasis::create({1.0, 0.25}, {"a", "b"}, 1e-6), BasisError);
  CHECK_THROWS_AS(FrequencyBasis::create({-1.0}, {"a"}, 1e-6), BasisError);
  CHECK_THROWS_AS(FrequencyBasis::create({1.0, 1.0}, {"a", "a2"}, 1e-6), BasisError);
  CHECK_NOTHROW(FrequencyBasis::create({2.0 * std::numbers::pi, 7.0}, {"a", "b"}, 1e-6));
  // near-commensurate within tolerance fails, outside passes
  CHECK_THROWS_AS(FrequencyBasis::create({1.0, 2.0 + 1e-9}, {"a", "b"}, 1e-6),
                  BasisError);
  CHECK_NOTHROW(FrequencyBasis::create({1.0, 2.0 + 1e-3}, {"a", "b"}, 1e-6));
}

TEST_CASE("multiplicative identity") {
  auto basis = two_freq_basis();
  QPSeries one = QPSeries::constant(basis, Complex(1.0, 0.0), 5, true);
  QPSeries s = random_series(basis, 6, 5, true);
  QPSeries prod = series_mul(one, s);
  for (double t : {0.0, 0.3, 1.7, 4.4})
    CHECK(std::abs(prod.eval(t) - s.eval(t)) < 1e-13);
  CHECK(prod.coeffs() == s.coeffs());
}

TEST_CASE("cos squared gives product-to-sum coefficients") {
  auto basis = two_freq_basis();
  QPSeries c = QPSeries::cosine(basis, 0, 5);
  QPSeries sq = series_mul(c, c);
  CHECK(sq.coeff({0, 0}).real() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(sq.coeff({2, 0}).real() == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(sq.coeff({-2, 0}).real() == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(sq.coeff({1, 0}) == Complex(0.0, 0.0));
  CHECK(sq.term_count() == 3);
}

TEST_CASE("product evaluation matches pointwise products") {
  auto basis = two_freq_basis();
  for (int rep = 0; rep < 20; ++rep) {
    QPSeries a = random_series(basis, 5, 3, false);
    QPSeries b = random_series(basis, 5, 3, false);
    QPSeries ab = series_mul(a, b, 6);  // exact product order
    for (int g = 0; g < 100; ++g) {
      double t = 0.07 * g;
      CHECK(std::abs(ab.eval(t) - a.eval(t) * b.eval(t)) <= 1e-10);
    }
  }
}

TEST_CASE("basis mismatch raises BasisError") {
  auto basis = two_freq_basis();
  auto other = FrequencyBasis::create({1.3}, {"w"}, 1e-6);
  QPSeries a = QPSeries::constant(basis, Complex(1, 0), 2, true);
  QPSeries b = QPSeries::constant(other, Complex(1, 0), 2, true);
  CHECK_THROWS_AS(series_mul(a, b), BasisError);
}

TEST_CASE("derivative of a constant vanishes") {
  auto basis = two_freq_basis();
  QPSeries c = QPSeries::constant(basis, Complex(3.25, 0.0), 5, true);
  CHECK(series_ddt(c).empty());
}

TEST_CASE("derivative of cosine") {
  auto basis = two_freq_basis();
  double w1 = basis->omega(0);
  QPSeries c = QPSeries::cosine(basis, 0, 5);
  QPSeries d = series_ddt(c);
  // -w sin(wt) has coefficients -(w/2i) at +e1 and +(w/2i) at -e1
  CHECK(std::abs(d.coeff({1, 0}) - Complex(0.0, 0.5 * w1)) < 1e-14);
  CHECK(std::abs(d.coeff({-1, 0}) - Complex(0.0, -0.5 * w1)) < 1e-14);
  QPSeries s = QPSeries::sine(basis, 0, 5);
  for (double t : {0.1, 0.9, 2.3})
    CHECK(d.eval_real(t) == doctest::Approx(-w1 * std::sin(w1 * t)).epsilon(1e-12));
}

TEST_CASE("derivative matches centered finite differences") {
  auto basis = two_freq_basis();
  for (int rep = 0; rep < 10; ++rep) {
    QPSeries a = random_series(basis, 6, 4, false);
    QPSeries d = series_ddt(a);
    double h = 1e-5;
    for (int g = 0; g < 25; ++g) {
      double t = 0.21 * g + 0.05;
      Complex fd = (a.eval(t + h) - a.eval(t - h)) / (2.0 * h);
      Complex ex = d.eval(t);
      double scale = std::max(1.0, std::abs(ex));
      CHECK(std::abs(fd - ex) / scale < 1e-6);
    }
  }
}

TEST_CASE("conjugate symmetry closure under mul and ddt") {
  auto basis = two_freq_basis();
  for (int rep = 0; rep < 200; ++rep) {
    QPSeries a = random_series(basis, 4, 3, true);
    QPSeries b = random_series(basis, 4, 3, true);
    CHECK(a.conjugate_symmetric());
    CHECK(series_mul(a, b, 6).conjugate_symmetric());
    CHECK(series_ddt(a).conjugate_symmetric());
    CHECK((a + b).conjugate_symmetric());
  }
}

TEST_CASE("canonicalization idempotence") {
  auto basis = two_freq_basis();
  QPSeries a = random_series(basis, 8, 4, false);
  a.add_coeff({1, 1}, Complex(1e-16, 0.0));
  QPSeries once = a;
  once.purge();
  QPSeries twice = once;
  twice.purge();
  CHECK(once.coeffs() == twice.coeffs());
}

TEST_CASE("truncation consistency of products") {
  auto basis = two_freq_basis();
  for (int rep = 0; rep < 50; ++rep) {
    QPSeries a = random_series(basis, 5, 2, false);
    QPSeries b = random_series(basis, 5, 2, false);
    const int P = 3;
    QPSeries lo = series_mul(a, b, P);
    QPSeries hi = series_mul(a, b, P + 2);
    for (const auto& [p, c] : lo.coeffs()) CHECK(std::abs(hi.coeff(p) - c) < 1e-14);
    // restriction of the higher-order result reproduces the lower one
    QPSeries restricted = hi.truncated(P);
    CHECK(restricted.coeffs() == lo.coeffs());
  }
}

TEST_CASE("shift multiplies by a pure harmonic") {
  auto basis = two_freq_basis();
  QPSeries a = random_series(basis, 5, 3, false);
  FreqIndex dp{1, -1};
  QPSeries sh = a.shifted(dp);
  double nu = basis->dot(dp);
  for (double t : {0.0, 0.4, 1.9}) {
    Complex expect = a.eval(t) * std::polar(1.0, nu * t);
    CHECK(std::abs(sh.eval(t) - expect) < 1e-12);
  }
}

TEST_CASE("embedding preserves evaluation") {
  auto basis = two_freq_basis();
  auto wide = FrequencyBasis::derived({basis->omega(0), basis->omega(1), 1.0},
                                      {"w1", "w2", "wf"}, 1e-6);
  QPSeries a = random_series(basis, 5, 3, false);
  QPSeries e = embed_series(a, wide);
  for (double t : {0.0, 0.8, 3.1}) CHECK(std::abs(e.eval(t) - a.eval(t)) < 1e-13);
}

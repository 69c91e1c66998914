#pragma once

#include <complex>
#include <random>
#include <vector>

#include "qpreduce/algebra.hpp"
#include "qpreduce/statepoly.hpp"

namespace qpr::testing {

inline std::mt19937& rng() {
  static std::mt19937 gen(0x5eed1234u);
  return gen;
}

inline double uniform(double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(rng());
}

inline int uniform_int(int lo, int hi) {
  std::uniform_int_distribution<int> d(lo, hi);
  return d(rng());
}

inline Complex random_complex(double scale = 1.0) {
  return Complex(uniform(-scale, scale), uniform(-scale, scale));
}

inline BasisPtr two_freq_basis() {
  static BasisPtr b = FrequencyBasis::create({2.0 * 3.14159265358979323846, 7.0},
                                             {"w1", "w2"}, 1e-6);
  return b;
}

// random series with the given number of terms; real series get mirrored pairs
inline QPSeries random_series(const BasisPtr& basis, int terms, int trunc,
                              bool real_flag) {
  QPSeries s = QPSeries::zero(basis, trunc, real_flag);
  for (int i = 0; i < terms; ++i) {
    FreqIndex p(basis->size());
    for (auto& v : p) v = uniform_int(-trunc, trunc);
    Complex c = random_complex();
    if (real_flag) {
      FreqIndex q(p.size());
      for (std::size_t k = 0; k < p.size(); ++k) q[k] = -p[k];
      s.add_coeff(p, c);
      s.add_coeff(q, std::conj(c));
    } else {
      s.add_coeff(p, c);
    }
  }
  return s;
}

inline QPStatePoly random_poly(const BasisPtr& basis, int dim, int terms,
                               int max_degree, int trunc) {
  QPStatePoly poly = QPStatePoly::zero(basis, dim, max_degree, trunc);
  for (int i = 0; i < terms; ++i) {
    StateMonomial m(dim, 0);
    int deg = uniform_int(0, max_degree);
    for (int d = 0; d < deg; ++d) m[uniform_int(0, dim - 1)] += 1;
    FreqIndex p(basis->size());
    for (auto& v : p) v = uniform_int(-trunc, trunc);
    poly.add_term(m, p, random_complex());
  }
  return poly;
}

}  // namespace qpr::testing

#pragma once

// Minimal standalone polynomial arithmetic used as an independent oracle for
// the library's graded computations. Deliberately naive: flat term vectors,
// quadratic-time collection, no shared code with qpreduce beyond std types.

#include <complex>
#include <map>
#include <vector>

namespace dense {

using C = std::complex<double>;
using Mono = std::vector<int>;

struct Term {
  Mono mono;
  C c;
};

using Poly = std::map<Mono, C>;
using PolyVec = std::vector<Poly>;

inline int degree(const Mono& m) {
  int d = 0;
  for (int e : m) d += e;
  return d;
}

inline void add_term(Poly& p, const Mono& m, C c) {
  auto [it, fresh] = p.emplace(m, c);
  if (!fresh) it->second += c;
  if (std::abs(it->second) < 1e-15) p.erase(it);
}

inline Poly add(const Poly& a, const Poly& b) {
  Poly r = a;
  for (const auto& [m, c] : b) add_term(r, m, c);
  return r;
}

inline Poly scale(const Poly& a, C f) {
  Poly r;
  for (const auto& [m, c] : a) add_term(r, m, c * f);
  return r;
}

inline Poly mul(const Poly& a, const Poly& b, int max_degree) {
  Poly r;
  for (const auto& [ma, ca] : a) {
    for (const auto& [mb, cb] : b) {
      Mono m(ma.size());
      for (std::size_t i = 0; i < m.size(); ++i) m[i] = ma[i] + mb[i];
      if (degree(m) > max_degree) continue;
      add_term(r, m, ca * cb);
    }
  }
  return r;
}

inline Poly truncate(const Poly& a, int lo, int hi) {
  Poly r;
  for (const auto& [m, c] : a)
    if (degree(m) >= lo && degree(m) <= hi) add_term(r, m, c);
  return r;
}

inline Poly partial(const Poly& a, int var) {
  Poly r;
  for (const auto& [m, c] : a) {
    if (m[var] == 0) continue;
    Mono d = m;
    d[var] -= 1;
    add_term(r, d, c * static_cast<double>(m[var]));
  }
  return r;
}

// substitute variable i by maps[i] everywhere
inline Poly compose(const Poly& a, const PolyVec& maps, int dim, int max_degree) {
  Poly r;
  for (const auto& [m, c] : a) {
    Poly acc;
    add_term(acc, Mono(dim, 0), c);
    for (int v = 0; v < static_cast<int>(m.size()); ++v)
      for (int e = 0; e < m[v]; ++e) acc = mul(acc, maps[v], max_degree);
    r = add(r, acc);
  }
  return r;
}

inline PolyVec compose_vec(const PolyVec& a, const PolyVec& maps, int dim,
                           int max_degree) {
  PolyVec r;
  for (const auto& p : a) r.push_back(compose(p, maps, dim, max_degree));
  return r;
}

// pushforward of zdot = diag(lambda) z + field(z) under z = v + h(v)
inline PolyVec dense_pushforward(const std::vector<C>& lambda, const PolyVec& field,
                                 const PolyVec& h, int max_degree) {
  const int n = static_cast<int>(field.size());
  PolyVec sub(n);
  for (int j = 0; j < n; ++j) {
    Mono e(n, 0);
    e[j] = 1;
    add_term(sub[j], e, C(1.0, 0.0));
    sub[j] = add(sub[j], h[j]);
  }
  PolyVec gsub(n);
  for (int j = 0; j < n; ++j) {
    gsub[j] = scale(sub[j], lambda[j]);
    gsub[j] = add(gsub[j], compose(field[j], sub, n, max_degree));
  }
  PolyVec acc = gsub, term = gsub;
  for (int guard = 0; guard < max_degree + 2; ++guard) {
    PolyVec next(n);
    bool any = false;
    for (int j = 0; j < n; ++j) {
      Poly s;
      for (int v = 0; v < n; ++v) s = add(s, mul(partial(h[j], v), term[v], max_degree));
      next[j] = scale(s, C(-1.0, 0.0));
      any = any || !next[j].empty();
    }
    if (!any) break;
    for (int j = 0; j < n; ++j) acc[j] = add(acc[j], next[j]);
    term = next;
  }
  PolyVec out(n);
  for (int j = 0; j < n; ++j) {
    Mono e(n, 0);
    e[j] = 1;
    add_term(acc[j], e, -lambda[j]);
    out[j] = truncate(acc[j], 2, max_degree);
  }
  return out;
}

}  // namespace dense

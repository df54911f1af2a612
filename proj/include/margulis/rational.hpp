#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace margulis {

// Exact rational scalar and small dense rational linear algebra.
// All combinatorial modules (root systems, weight sets, X0 selection) work
// over these types; floats only enter in the dynamics layer.

using Rat = mpq_class;
using RatVec = std::vector<Rat>;
using RatMat = std::vector<RatVec>;

inline Rat rat_from_string(const std::string& s) {
  Rat q;
  if (q.set_str(s, 10) != 0) throw std::invalid_argument("bad rational literal: " + s);
  q.canonicalize();
  return q;
}

inline std::string rat_to_string(const Rat& q) { return q.get_str(); }

inline int sign(const Rat& q) { return sgn(q); }

inline RatVec rv_zero(std::size_t n) { return RatVec(n, Rat(0)); }

inline Rat dot(const RatVec& a, const RatVec& b) {
  Rat s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline RatVec add(const RatVec& a, const RatVec& b) {
  RatVec r(a);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

inline RatVec sub(const RatVec& a, const RatVec& b) {
  RatVec r(a);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

inline RatVec scale(const Rat& c, const RatVec& a) {
  RatVec r(a);
  for (auto& x : r) x *= c;
  return r;
}

inline RatVec neg(const RatVec& a) { return scale(Rat(-1), a); }

inline bool is_zero(const RatVec& a) {
  for (const auto& x : a)
    if (x != 0) return false;
  return true;
}

inline RatMat rm_identity(std::size_t n) {
  RatMat m(n, rv_zero(n));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
  return m;
}

inline RatVec matvec(const RatMat& m, const RatVec& v) {
  RatVec r = rv_zero(m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) r[i] += m[i][j] * v[j];
  return r;
}

inline RatMat matmul(const RatMat& a, const RatMat& b) {
  const std::size_t n = a.size(), k = b.size(), m = b[0].size();
  RatMat r(n, rv_zero(m));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < k; ++l) {
      if (a[i][l] == 0) continue;
      for (std::size_t j = 0; j < m; ++j) r[i][j] += a[i][l] * b[l][j];
    }
  return r;
}

inline RatMat transpose(const RatMat& m) {
  RatMat r(m[0].size(), rv_zero(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[0].size(); ++j) r[j][i] = m[i][j];
  return r;
}

// Solves A x = b by Gauss-Jordan elimination. Returns std::nullopt when the
// system is singular or inconsistent; for underdetermined consistent systems
// one solution is returned (free variables set to zero).
std::optional<RatVec> solve_linear(RatMat a, RatVec b);

// Inverse of a square rational matrix; throws on singular input.
RatMat invert(const RatMat& m);

// Exact LP feasibility: is `target` a convex combination of `points`?
// Phase-1 simplex with Bland's rule over the rationals.
bool in_convex_hull_lp(const std::vector<RatVec>& points, const RatVec& target);

// Canonical string key for exact dedup/hashing of rational matrices.
std::string rm_key(const RatMat& m);
std::string rv_key(const RatVec& v);

}  // namespace margulis

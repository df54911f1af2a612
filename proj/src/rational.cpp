#include "margulis/rational.hpp"

#include <cassert>

namespace margulis {

std::optional<RatVec> solve_linear(RatMat a, RatVec b) {
  const std::size_t rows = a.size();
  const std::size_t cols = rows ? a[0].size() : 0;
  std::vector<std::size_t> pivot_col;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && a[p][c] == 0) ++p;
    if (p == rows) continue;
    std::swap(a[p], a[r]);
    std::swap(b[p], b[r]);
    const Rat inv = 1 / a[r][c];
    for (std::size_t j = c; j < cols; ++j) a[r][j] *= inv;
    b[r] *= inv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || a[i][c] == 0) continue;
      const Rat f = a[i][c];
      for (std::size_t j = c; j < cols; ++j) a[i][j] -= f * a[r][j];
      b[i] -= f * b[r];
    }
    pivot_col.push_back(c);
    ++r;
  }
  for (std::size_t i = r; i < rows; ++i)
    if (b[i] != 0) return std::nullopt;
  RatVec x = rv_zero(cols);
  for (std::size_t i = 0; i < pivot_col.size(); ++i) x[pivot_col[i]] = b[i];
  return x;
}

RatMat invert(const RatMat& m) {
  const std::size_t n = m.size();
  RatMat a = m;
  RatMat inv = rm_identity(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && a[p][c] == 0) ++p;
    if (p == n) throw std::invalid_argument("invert: singular matrix");
    std::swap(a[p], a[c]);
    std::swap(inv[p], inv[c]);
    const Rat f = 1 / a[c][c];
    for (std::size_t j = 0; j < n; ++j) {
      a[c][j] *= f;
      inv[c][j] *= f;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == c || a[i][c] == 0) continue;
      const Rat g = a[i][c];
      for (std::size_t j = 0; j < n; ++j) {
        a[i][j] -= g * a[c][j];
        inv[i][j] -= g * inv[c][j];
      }
    }
  }
  return inv;
}

// Phase-1 simplex: minimize the sum of artificial variables for
//   sum_i c_i * points[i] = target,  sum_i c_i = 1,  c >= 0.
// Feasible iff the optimum is zero. Bland's rule guarantees termination.
bool in_convex_hull_lp(const std::vector<RatVec>& points, const RatVec& target) {
  if (points.empty()) return false;
  const std::size_t dim = target.size();
  const std::size_t m = dim + 1;            // equality rows
  const std::size_t n = points.size();      // combination variables
  // Tableau columns: n point vars, m artificials, then RHS.
  RatMat t(m, rv_zero(n + m + 1));
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < n; ++j) t[i][j] = points[j][i];
    t[i][n + m] = target[i];
  }
  for (std::size_t j = 0; j < n; ++j) t[dim][j] = 1;
  t[dim][n + m] = 1;
  // Make RHS nonnegative, then add artificial basis.
  for (std::size_t i = 0; i < m; ++i) {
    if (t[i][n + m] < 0)
      for (auto& x : t[i]) x = -x;
    t[i][n + i] = 1;
  }
  std::vector<std::size_t> basis(m);
  RatVec obj = rv_zero(n + m + 1);  // reduced costs of phase-1 objective
  for (std::size_t i = 0; i < m; ++i) {
    basis[i] = n + i;
    for (std::size_t j = 0; j <= n + m; ++j) obj[j] -= t[i][j];
  }
  for (std::size_t i = 0; i < m; ++i) obj[n + i] += 1;  // basic artificials price to zero
  for (;;) {
    std::size_t enter = n + m;
    for (std::size_t j = 0; j < n; ++j)      // artificials never re-enter;
      if (obj[j] < 0) {                      // Bland: smallest eligible index
        enter = j;
        break;
      }
    if (enter == n + m) break;
    std::size_t leave = m;
    for (std::size_t i = 0; i < m; ++i) {
      if (t[i][enter] <= 0) continue;
      if (leave == m) {
        leave = i;
        continue;
      }
      const Rat cur = t[i][n + m] / t[i][enter];
      const Rat best = t[leave][n + m] / t[leave][enter];
      if (cur < best || (cur == best && basis[i] < basis[leave])) leave = i;
    }
    if (leave == m) return false;  // unbounded: cannot happen for this LP
    const Rat piv = 1 / t[leave][enter];
    for (auto& x : t[leave]) x *= piv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == leave || t[i][enter] == 0) continue;
      const Rat f = t[i][enter];
      for (std::size_t j = 0; j <= n + m; ++j) t[i][j] -= f * t[leave][j];
    }
    const Rat fo = obj[enter];
    if (fo != 0)
      for (std::size_t j = 0; j <= n + m; ++j) obj[j] -= fo * t[leave][j];
    basis[leave] = enter;
  }
  return -obj[n + m] == 0;  // optimum value of sum of artificials
}

std::string rv_key(const RatVec& v) {
  std::string k;
  for (const auto& x : v) {
    k += x.get_str();
    k += ',';
  }
  return k;
}

std::string rm_key(const RatMat& m) {
  std::string k;
  for (const auto& row : m) {
    k += rv_key(row);
    k += ';';
  }
  return k;
}

}  // namespace margulis

#include "margulis/concrete_rep.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>

namespace margulis::concrete_rep {

namespace {

double to_double(const Rat& q) { return q.get_d(); }

VectorXd to_vector(const RatVec& v) {
  VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out(i) = to_double(v[i]);
  return out;
}

// ---- multi-index helpers for symmetric powers -----------------------------

std::vector<std::vector<int>> monomials(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(n, 0);
  // graded-lex enumeration of exponent vectors summing to k
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == n - 1) {
      cur[pos] = left;
      out.push_back(cur);
      return;
    }
    for (int a = left; a >= 0; --a) {
      cur[pos] = a;
      rec(pos + 1, left - a);
    }
  };
  rec(0, k);
  return out;
}

double log_factorial(int k) { return std::lgamma(k + 1.0); }

double bombieri_scale(const std::vector<int>& a) {
  // sqrt(k!/prod a_i!) keeps rho(K) orthogonal on monomials.
  const int k = std::accumulate(a.begin(), a.end(), 0);
  double s = log_factorial(k);
  for (int ai : a) s -= log_factorial(ai);
  return std::exp(0.5 * s);
}

// Action of g on Sym^k in the normalized monomial basis.
MatrixXd sym_power(const MatrixXd& g, int k) {
  const int n = static_cast<int>(g.rows());
  const auto mons = monomials(n, k);
  std::map<std::vector<int>, int> index;
  for (std::size_t i = 0; i < mons.size(); ++i) index[mons[i]] = static_cast<int>(i);
  const int d = static_cast<int>(mons.size());
  MatrixXd out = MatrixXd::Zero(d, d);
  for (int col = 0; col < d; ++col) {
    // expand prod_i (g e_i)^{a_i}
    std::map<std::vector<int>, double> poly;
    poly[std::vector<int>(n, 0)] = 1.0;
    for (int var = 0; var < n; ++var) {
      for (int rep = 0; rep < mons[col][var]; ++rep) {
        std::map<std::vector<int>, double> next;
        for (const auto& [mono, c] : poly)
          for (int j = 0; j < n; ++j) {
            if (g(j, var) == 0.0) continue;
            std::vector<int> m2 = mono;
            ++m2[j];
            next[m2] += c * g(j, var);
          }
        poly = std::move(next);
      }
    }
    const double ca = bombieri_scale(mons[col]);
    for (const auto& [mono, c] : poly) out(index.at(mono), col) = c * ca / bombieri_scale(mono);
  }
  return out;
}

// Derivation action on Sym^k in the same basis.
MatrixXd sym_power_derivation(const MatrixXd& a, int k) {
  const int n = static_cast<int>(a.rows());
  const auto mons = monomials(n, k);
  std::map<std::vector<int>, int> index;
  for (std::size_t i = 0; i < mons.size(); ++i) index[mons[i]] = static_cast<int>(i);
  const int d = static_cast<int>(mons.size());
  MatrixXd out = MatrixXd::Zero(d, d);
  for (int col = 0; col < d; ++col) {
    const auto& mono = mons[col];
    const double ca = bombieri_scale(mono);
    for (int var = 0; var < n; ++var) {
      if (mono[var] == 0) continue;
      for (int j = 0; j < n; ++j) {
        if (a(j, var) == 0.0) continue;
        std::vector<int> m2 = mono;
        --m2[var];
        ++m2[j];
        out(index.at(m2), col) += mono[var] * a(j, var) * ca / bombieri_scale(m2);
      }
    }
  }
  return out;
}

std::vector<std::vector<int>> subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(cur.size()) == k) {
      out.push_back(cur);
      return;
    }
    for (int i = start; i < n; ++i) {
      cur.push_back(i);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

MatrixXd wedge_power(const MatrixXd& g, int k) {
  const int n = static_cast<int>(g.rows());
  const auto idx = subsets(n, k);
  const int d = static_cast<int>(idx.size());
  MatrixXd out(d, d);
  MatrixXd minor(k, k);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) {
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) minor(i, j) = g(idx[r][i], idx[c][j]);
      out(r, c) = minor.determinant();
    }
  return out;
}

MatrixXd wedge_power_derivation(const MatrixXd& a, int k) {
  const int n = static_cast<int>(a.rows());
  const auto idx = subsets(n, k);
  std::map<std::vector<int>, int> index;
  for (std::size_t i = 0; i < idx.size(); ++i) index[idx[i]] = static_cast<int>(i);
  const int d = static_cast<int>(idx.size());
  MatrixXd out = MatrixXd::Zero(d, d);
  for (int c = 0; c < d; ++c) {
    for (int pos = 0; pos < k; ++pos) {
      const int from = idx[c][pos];
      for (int to = 0; to < n; ++to) {
        if (a(to, from) == 0.0) continue;
        std::vector<int> target = idx[c];
        target[pos] = to;
        // sort with sign; duplicate entries wedge to zero
        double sign = 1.0;
        bool zero = false;
        for (int i = 0; i < k && !zero; ++i)
          for (int j = i + 1; j < k; ++j) {
            if (target[i] == target[j]) {
              zero = true;
              break;
            }
            if (target[i] > target[j]) {
              std::swap(target[i], target[j]);
              sign = -sign;
            }
          }
        if (zero) continue;
        out(index.at(target), c) += sign * a(to, from);
      }
    }
  }
  return out;
}

}  // namespace

std::string rep_kind_name(RepKind k) {
  switch (k) {
    case RepKind::Standard: return "standard";
    case RepKind::Sym: return "sym";
    case RepKind::Wedge: return "wedge";
    case RepKind::Adjoint: return "adjoint";
  }
  return "?";
}

std::string RepSpec::name() const {
  std::string g = group == GroupFamily::SL ? "sl" + std::to_string(n)
                                           : "so" + std::to_string(n + 1) + std::to_string(n);
  std::string k = rep_kind_name(kind);
  if (kind == RepKind::Sym || kind == RepKind::Wedge) k += std::to_string(degree);
  return g + "_" + k;
}

MatrixXd ConcreteRep::rho(const MatrixXd& g_std) const {
  switch (spec_.kind) {
    case RepKind::Standard: return g_std;
    case RepKind::Sym: return sym_power(g_std, spec_.degree);
    case RepKind::Wedge: return wedge_power(g_std, spec_.degree);
    case RepKind::Adjoint: {
      const MatrixXd gi = g_std.inverse();
      MatrixXd out(dim_v_, dim_v_);
      for (int c = 0; c < dim_v_; ++c) {
        const MatrixXd img = g_std * lie_basis_[c] * gi;
        for (int r = 0; r < dim_v_; ++r) out(r, c) = (img.array() * lie_basis_[r].array()).sum();
      }
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

MatrixXd ConcreteRep::drho(const MatrixXd& a_std) const {
  switch (spec_.kind) {
    case RepKind::Standard: return a_std;
    case RepKind::Sym: return sym_power_derivation(a_std, spec_.degree);
    case RepKind::Wedge: return wedge_power_derivation(a_std, spec_.degree);
    case RepKind::Adjoint: {
      MatrixXd out(dim_v_, dim_v_);
      for (int c = 0; c < dim_v_; ++c) {
        const MatrixXd img = a_std * lie_basis_[c] - lie_basis_[c] * a_std;
        for (int r = 0; r < dim_v_; ++r) out(r, c) = (img.array() * lie_basis_[r].array()).sum();
      }
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

MatrixXd ConcreteRep::cartan_matrix_std(const VectorXd& coords) const {
  MatrixXd m = MatrixXd::Zero(dim_std_, dim_std_);
  if (spec_.group == GroupFamily::SL) {
    for (int i = 0; i < dim_std_; ++i) m(i, i) = coords(i);
  } else {
    const int p = spec_.n;
    for (int i = 0; i < p; ++i) {
      m(i, p + 1 + i) = coords(i);
      m(p + 1 + i, i) = coords(i);
    }
  }
  return m;
}

MatrixXd ConcreteRep::cartan_matrix_std(const RatVec& coords) const {
  return cartan_matrix_std(to_vector(coords));
}

long ConcreteRep::weight_multiplicity(const RatVec& w) const {
  for (const auto& [lam, basis] : weight_decomp_)
    if (lam == w) return basis.cols();
  return 0;
}

MatrixXd ConcreteRep::fundamental_rep(int i, const MatrixXd& g_std) const {
  return wedge_power(g_std, fundamental_wedge_degree_[i]);
}

VectorXd ConcreteRep::cartan_from_pi_values(const VectorXd& pi_values) const {
  return pi_solve_ * pi_values;
}

MatrixXd ConcreteRep::random_compact(std::mt19937_64& rng) const {
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_special_orthogonal = [&](int m) {
    MatrixXd a(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) a(i, j) = gauss(rng);
    Eigen::HouseholderQR<MatrixXd> qr(a);
    MatrixXd q = qr.householderQ();
    MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < m; ++i)
      if (r(i, i) < 0) q.col(i) *= -1.0;
    if (q.determinant() < 0) q.col(0) *= -1.0;
    return q;
  };
  if (spec_.group == GroupFamily::SL) return random_special_orthogonal(dim_std_);
  const int p = spec_.n;
  MatrixXd k = MatrixXd::Zero(dim_std_, dim_std_);
  k.topLeftCorner(p + 1, p + 1) = random_special_orthogonal(p + 1);
  k.bottomRightCorner(p, p) = random_special_orthogonal(p);
  return k;
}

bool ConcreteRep::in_group(const MatrixXd& g, double tol) const {
  if (spec_.group == GroupFamily::SL)
    return std::abs(g.determinant() - 1.0) < tol * std::pow(g.norm(), dim_std_);
  const int p = spec_.n;
  VectorXd jdiag(dim_std_);
  jdiag.head(p + 1).setOnes();
  jdiag.tail(p).setConstant(-1.0);
  const MatrixXd j = jdiag.asDiagonal();
  if ((g.transpose() * j * g - j).norm() > tol * g.norm() * g.norm()) return false;
  if (g.determinant() < 0) return false;
  // identity component: positive orientation on the positive-definite part
  return g.topLeftCorner(p + 1, p + 1).determinant() > 0;
}

MatrixXd ConcreteRep::v0_basis() const {
  const RatVec zero = rv_zero(rs_.ambient_dim);
  for (const auto& [lam, basis] : weight_decomp_)
    if (lam == zero) return basis;
  return MatrixXd(dim_v_, 0);
}

void ConcreteRep::build_weight_decomposition() {
  // Find a rational Cartan vector separating the weights of Omega, then
  // cluster the eigenvectors of the (self-adjoint) derivation action.
  // geometric candidates (1, b, b^2, ...) separate any fixed finite weight
  // set for all but finitely many ratios b
  RatVec xsep;
  const int d = rs_.ambient_dim;
  for (long trial = 0;; ++trial) {
    if (trial > 50) throw std::logic_error("no separating Cartan vector found");
    RatVec cand = rv_zero(d);
    long pw = 1;
    for (int i = 0; i < d; ++i) {
      cand[i] = Rat(pw);
      pw *= trial + 2;
    }
    if (spec_.group == GroupFamily::SL) {
      Rat tr = 0;
      for (const auto& c : cand) tr += c;
      for (auto& c : cand) c -= tr / d;
    }
    std::set<std::string> vals;
    bool ok = true;
    for (const auto& w : omega_.weights)
      if (!vals.insert(dot(w, cand).get_str()).second) ok = false;
    if (ok) {
      xsep = cand;
      break;
    }
  }

  const MatrixXd h = drho(cartan_matrix_std(xsep));
  if ((h - h.transpose()).norm() > 1e-9 * (1.0 + h.norm()))
    throw std::logic_error("Cartan derivation action is not self-adjoint in this basis");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (h + h.transpose()));

  weight_decomp_.clear();
  std::vector<int> assigned(dim_v_, -1);
  for (std::size_t wi = 0; wi < omega_.weights.size(); ++wi) {
    const double target = to_double(dot(omega_.weights[wi], xsep));
    std::vector<int> cols;
    for (int c = 0; c < dim_v_; ++c)
      if (assigned[c] < 0 && std::abs(es.eigenvalues()(c) - target) < 1e-7 * (1.0 + std::abs(target))) {
        cols.push_back(c);
        assigned[c] = static_cast<int>(wi);
      }
    if (cols.empty())
      throw std::logic_error("weight space missing in the realization: eigenvalue cluster not found");
    MatrixXd basis(dim_v_, cols.size());
    for (std::size_t k = 0; k < cols.size(); ++k) basis.col(k) = es.eigenvectors().col(cols[k]);
    weight_decomp_.emplace_back(omega_.weights[wi], std::move(basis));
  }
  for (int c = 0; c < dim_v_; ++c)
    if (assigned[c] < 0)
      throw std::logic_error("realization carries an eigenvalue outside the expected weight set");

  // Residual checks: every stored weight vector is an exact-enough
  // eigenvector of every Cartan element, and the w0 representative permutes
  // the weight spaces as prescribed.
  for (std::size_t bi = 0; bi < cartan_basis_std_.size(); ++bi) {
    const MatrixXd hv = drho(cartan_basis_std_[bi]);
    for (const auto& [lam, basis] : weight_decomp_) {
      const double ev = to_double(dot(lam, cartan_coords_[bi]));
      const double resid = (hv * basis - ev * basis).norm();
      if (resid > 1e-10 * (1.0 + hv.norm()))
        throw std::logic_error("weight decomposition residual too large");
    }
  }
  for (const auto& [lam, basis] : weight_decomp_) {
    const RatVec target = matvec(rs_.w0, lam);
    const MatrixXd* target_basis = nullptr;
    for (const auto& [mu, b2] : weight_decomp_)
      if (mu == target) target_basis = &b2;
    if (!target_basis) throw std::logic_error("w0 image weight missing");
    const MatrixXd img = w0_rep_ * basis;
    const MatrixXd proj = (*target_basis) * (target_basis->transpose() * img);
    if ((img - proj).norm() > 1e-9 * (1.0 + img.norm()))
      throw std::logic_error("w0 representative does not permute the weight spaces correctly");
  }
}

ConcreteRep ConcreteRep::realize(const RepSpec& spec) {
  ConcreteRep r;
  r.spec_ = spec;
  using root_system::Family;
  if (spec.group == GroupFamily::SL) {
    if (spec.n < 2) throw std::invalid_argument("SL(n) needs n >= 2");
    r.rs_ = root_system::build_root_system(Family::A, spec.n - 1);
    r.dim_std_ = spec.n;
  } else {
    if (spec.n < 1) throw std::invalid_argument("SO+(p+1,p) needs p >= 1");
    r.rs_ = root_system::build_root_system(Family::B, spec.n);
    r.dim_std_ = 2 * spec.n + 1;
  }

  // Exact weight set of the fixture representation.
  const int d = r.rs_.ambient_dim;
  RatVec highest = rv_zero(d);
  auto sl_sum_zero = [&](RatVec v) {
    if (spec.group != GroupFamily::SL) return v;
    Rat tr = 0;
    for (const auto& c : v) tr += c;
    for (auto& c : v) c -= tr / d;
    return v;
  };
  switch (spec.kind) {
    case RepKind::Standard:
      highest[0] = 1;
      highest = sl_sum_zero(highest);
      break;
    case RepKind::Sym:
      if (spec.group != GroupFamily::SL) throw std::invalid_argument("sym fixtures are SL-only");
      if (spec.degree < 0) throw std::invalid_argument("sym degree must be >= 0");
      // degree 0 is the trivial representation
      highest[0] = spec.degree;
      highest = sl_sum_zero(highest);
      break;
    case RepKind::Wedge:
      if (spec.group != GroupFamily::SL) throw std::invalid_argument("wedge fixtures are SL-only");
      if (spec.degree < 1 || spec.degree >= r.dim_std_)
        throw std::invalid_argument("wedge degree out of range");
      for (int i = 0; i < spec.degree; ++i) highest[i] = 1;
      highest = sl_sum_zero(highest);
      break;
    case RepKind::Adjoint:
      r.omega_ = rep_weights::adjoint_weight_set(r.rs_);
      break;
  }
  if (spec.kind != RepKind::Adjoint) r.omega_ = rep_weights::weight_set(r.rs_, highest);

  // Cartan basis, M generators, w0 representative (standard level).
  if (spec.group == GroupFamily::SL) {
    const int n = spec.n;
    for (int i = 0; i + 1 < n; ++i) {
      MatrixXd m = MatrixXd::Zero(n, n);
      m(i, i) = 1;
      m(i + 1, i + 1) = -1;
      r.cartan_basis_std_.push_back(m);
      RatVec coords = rv_zero(n);
      coords[i] = 1;
      coords[i + 1] = -1;
      r.cartan_coords_.push_back(coords);
    }
    // M is the diagonal sign group of determinant one; flips at {i, n-1}
    // generate it.
    for (int i = 0; i + 1 < n; ++i) {
      MatrixXd m = MatrixXd::Identity(n, n);
      m(i, i) = -1;
      m(n - 1, n - 1) = -1;
      r.m_generators_std_.push_back(m);
    }
    // reversal rotation: e_i -> e_{n+1-i} with signs making it special
    MatrixXd w0 = MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) w0(n - 1 - i, i) = 1.0;
    for (int i = 0; i < n / 2; ++i) w0.col(n - 1 - i) *= -1.0;  // pi-rotations pairwise
    if (w0.determinant() < 0) throw std::logic_error("w0 representative not special");
    r.w0_std_ = w0;
    for (int i = 1; i < n; ++i) r.fundamental_wedge_degree_.push_back(i), r.fundamental_n_.push_back(1);
  } else {
    const int p = spec.n;
    const int n = 2 * p + 1;
    for (int i = 0; i < p; ++i) {
      MatrixXd m = MatrixXd::Zero(n, n);
      m(i, p + 1 + i) = 1;
      m(p + 1 + i, i) = 1;
      r.cartan_basis_std_.push_back(m);
      RatVec coords = rv_zero(p);
      coords[i] = 1;
      r.cartan_coords_.push_back(coords);
    }
    for (int i = 0; i + 1 < p; ++i) {
      // joint sign flip of hyperbolic pairs i and i+1
      MatrixXd m = MatrixXd::Identity(n, n);
      m(i, i) = m(p + 1 + i, p + 1 + i) = -1;
      m(i + 1, i + 1) = m(p + 2 + i, p + 2 + i) = -1;
      r.m_generators_std_.push_back(m);
    }
    MatrixXd w0 = MatrixXd::Identity(n, n);
    if (p % 2 == 0) {
      for (int i = 0; i < p; ++i) w0(p + 1 + i, p + 1 + i) = -1;
    } else {
      w0(0, 0) = -1;
      w0(p, p) = -1;  // the residual positive direction
      for (int i = 1; i < p; ++i) w0(p + 1 + i, p + 1 + i) = -1;
    }
    r.w0_std_ = w0;
    for (int i = 1; i <= p; ++i) {
      r.fundamental_wedge_degree_.push_back(i);
      r.fundamental_n_.push_back(i == p ? 2 : 1);
    }
  }

  // Lie algebra basis for the adjoint functor (orthonormal for Frobenius).
  if (spec.kind == RepKind::Adjoint) {
    const int n = r.dim_std_;
    if (spec.group == GroupFamily::SL) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (i == j) continue;
          MatrixXd m = MatrixXd::Zero(n, n);
          m(i, j) = 1;
          r.lie_basis_.push_back(m);
        }
      // orthonormal traceless diagonals
      for (int i = 0; i + 1 < n; ++i) {
        VectorXd v = VectorXd::Zero(n);
        for (int j = 0; j <= i; ++j) v(j) = 1.0;
        v(i + 1) = -(i + 1.0);
        v /= v.norm();
        MatrixXd m = MatrixXd::Zero(n, n);
        for (int j = 0; j < n; ++j) m(j, j) = v(j);
        r.lie_basis_.push_back(m);
      }
    } else {
      const int p = spec.n;
      const int pos = p + 1;
      auto push = [&](MatrixXd m) { r.lie_basis_.push_back(m / m.norm()); };
      for (int i = 0; i < pos; ++i)
        for (int j = i + 1; j < pos; ++j) {
          MatrixXd m = MatrixXd::Zero(n, n);
          m(i, j) = 1;
          m(j, i) = -1;
          push(m);
        }
      for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) {
          MatrixXd m = MatrixXd::Zero(n, n);
          m(pos + i, pos + j) = 1;
          m(pos + j, pos + i) = -1;
          push(m);
        }
      for (int i = 0; i < pos; ++i)
        for (int j = 0; j < p; ++j) {
          MatrixXd m = MatrixXd::Zero(n, n);
          m(i, pos + j) = 1;
          m(pos + j, i) = 1;
          push(m);
        }
    }
    r.dim_v_ = static_cast<int>(r.lie_basis_.size());
  } else if (spec.kind == RepKind::Standard) {
    r.dim_v_ = r.dim_std_;
  } else if (spec.kind == RepKind::Sym) {
    r.dim_v_ = static_cast<int>(monomials(r.dim_std_, spec.degree).size());
  } else {
    r.dim_v_ = static_cast<int>(subsets(r.dim_std_, spec.degree).size());
  }

  r.w0_rep_ = r.rho(r.w0_std_);
  r.build_weight_decomposition();

  // Exact solve mapping fundamental-weight values to e-coordinates; for SL a
  // sum-zero row makes the system square.
  {
    const int rank = r.rs_.rank;
    const int dim = r.rs_.ambient_dim;
    RatMat sys;
    for (int i = 0; i < rank; ++i) sys.push_back(r.rs_.fundamental_weights[i]);
    if (spec.group == GroupFamily::SL) sys.push_back(RatVec(dim, Rat(1)));
    const RatMat inv = invert(sys);
    r.pi_solve_ = MatrixXd::Zero(dim, rank);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < rank; ++j) r.pi_solve_(i, j) = to_double(inv[i][j]);
  }

  return r;
}

CriterionReport check_criterion(const ConcreteRep& rep, double svd_tol) {
  CriterionReport out;
  const int d = rep.dim_v();
  // Common fixed space of A and M: stack the Cartan derivations and the
  // (rho(m) - Id) blocks and take the SVD nullspace.
  std::vector<MatrixXd> blocks;
  for (const auto& h : rep.cartan_basis_std()) blocks.push_back(rep.drho(h));
  for (const auto& m : rep.m_generators_std())
    blocks.push_back(rep.rho(m) - MatrixXd::Identity(d, d));
  MatrixXd stacked(static_cast<int>(blocks.size()) * d, d);
  for (std::size_t i = 0; i < blocks.size(); ++i) stacked.middleRows(static_cast<int>(i) * d, d) = blocks[i];

  Eigen::JacobiSVD<MatrixXd> svd(stacked, Eigen::ComputeThinV);
  const double cutoff = svd_tol * svd.singularValues()(0);
  int null_dim = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) <= cutoff) ++null_dim;
  if (svd.singularValues()(0) == 0.0) null_dim = d;
  out.vt0_dim = null_dim;
  out.vt0_basis = svd.matrixV().rightCols(null_dim);

  out.v0_dim = static_cast<int>(rep.v0_basis().cols());

  if (null_dim == 0) {
    out.moved_by_w0 = false;
    return out;
  }
  const MatrixXd moved = (rep.w0_rep() - MatrixXd::Identity(d, d)) * out.vt0_basis;
  Eigen::JacobiSVD<MatrixXd> msvd(moved, Eigen::ComputeThinV);
  const double top = msvd.singularValues()(0);
  out.moved_by_w0 = top > 1e-8;
  if (out.moved_by_w0) {
    const VectorXd coeff = msvd.matrixV().col(0);
    out.witness = out.vt0_basis * coeff;
    // residual of the witness under the fixed-space conditions
    double resid = 0;
    for (const auto& h : rep.cartan_basis_std()) resid = std::max(resid, (rep.drho(h) * out.witness).norm());
    for (const auto& m : rep.m_generators_std())
      resid = std::max(resid, (rep.rho(m) * out.witness - out.witness).norm());
    out.witness_residual = resid;
  }
  return out;
}

std::map<std::string, long> restricted_weight_diag(const ConcreteRep& rep) {
  std::map<std::string, long> out;
  for (const auto& [lam, basis] : rep.weight_decomp()) out[rv_key(lam)] = basis.cols();
  return out;
}

}  // namespace margulis::concrete_rep

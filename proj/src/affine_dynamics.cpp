#include "margulis/affine_dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace margulis::affine_dynamics {

namespace {

double to_double(const Rat& q) { return q.get_d(); }

VectorXd to_vector(const RatVec& v) {
  VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out(i) = to_double(v[i]);
  return out;
}

double operator_norm(const MatrixXd& m) {
  return Eigen::JacobiSVD<MatrixXd>(m).singularValues()(0);
}

MatrixXd orth(const MatrixXd& m) {
  if (m.cols() == 0) return m;
  Eigen::HouseholderQR<MatrixXd> qr(m);
  MatrixXd q = qr.householderQ();
  return q.leftCols(m.cols());
}

// exp of a symmetric matrix (the Cartan elements are symmetric in every
// basis used here)
MatrixXd sym_exp(const MatrixXd& h) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(h);
  return es.eigenvectors() * es.eigenvalues().array().exp().matrix().asDiagonal() *
         es.eigenvectors().transpose();
}

// Real basis of the span of eigenvectors whose eigenvalue indices are given.
MatrixXd real_eigenbasis(const Eigen::EigenSolver<MatrixXd>& es, const std::vector<int>& idx) {
  std::vector<VectorXd> cols;
  for (int i : idx) {
    const std::complex<double> lam = es.eigenvalues()(i);
    const Eigen::VectorXcd v = es.eigenvectors().col(i);
    const double scale = v.norm();
    if (std::abs(lam.imag()) <= 1e-12 * (1.0 + std::abs(lam.real()))) {
      cols.push_back(v.real() / scale);
    } else if (lam.imag() > 0) {
      cols.push_back(v.real() / scale);
      cols.push_back(v.imag() / scale);
    }  // conjugate partner contributes the same plane
  }
  if (cols.empty()) return MatrixXd(es.eigenvectors().rows(), 0);
  MatrixXd m(cols[0].size(), cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i) m.col(i) = cols[i];
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// Proximal layer

ProximalReport proximal_report(const MatrixXd& m, double gap_tol) {
  ProximalReport out;
  Eigen::EigenSolver<MatrixXd> es(m);
  const int n = static_cast<int>(m.rows());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(es.eigenvalues()(a)) > std::abs(es.eigenvalues()(b));
  });
  const double r1 = std::abs(es.eigenvalues()(order[0]));
  const double r2 = n > 1 ? std::abs(es.eigenvalues()(order[1])) : 0.0;
  out.spectral_radius = r1;
  out.gap = r2 > 0 ? r1 / r2 : std::numeric_limits<double>::infinity();
  if (std::abs(es.eigenvalues()(order[0]).imag()) > 1e-12 * r1) {
    out.status = Proximality::NotProximal;  // top modulus shared by a conjugate pair
    return out;
  }
  if (std::abs(out.gap - 1.0) <= gap_tol) {
    out.status = Proximality::Indeterminate;
    return out;
  }
  if (out.gap < 1.0) {
    out.status = Proximality::NotProximal;
    return out;
  }
  out.status = Proximality::Proximal;
  out.attracting = es.eigenvectors().col(order[0]).real();
  out.attracting.normalize();
  // E^u is the invariant complement: orthogonal to the top left eigenvector.
  Eigen::EigenSolver<MatrixXd> est(m.transpose());
  std::vector<int> tor(n);
  std::iota(tor.begin(), tor.end(), 0);
  std::sort(tor.begin(), tor.end(), [&](int a, int b) {
    return std::abs(est.eigenvalues()(a)) > std::abs(est.eigenvalues()(b));
  });
  out.repelling_normal = est.eigenvectors().col(tor[0]).real();
  out.repelling_normal.normalize();
  // restriction norm on E^u: orthonormal complement of the normal vector
  Eigen::HouseholderQR<MatrixXd> qr(MatrixXd(out.repelling_normal));
  MatrixXd q = qr.householderQ();
  MatrixXd basis_u = q.rightCols(n - 1);
  out.s_tilde = operator_norm(m * basis_u) / r1;
  return out;
}

double line_angle(const VectorXd& a, const VectorXd& b) {
  const double c = std::abs(a.dot(b)) / (a.norm() * b.norm());
  return std::acos(std::min(1.0, std::max(0.0, c)));
}

double subspace_angle(const MatrixXd& a, const MatrixXd& b) {
  const MatrixXd qa = orth(a), qb = orth(b);
  const MatrixXd pa = qa * qa.transpose(), pb = qb * qb.transpose();
  const double s = operator_norm(pa - pb);
  return std::asin(std::min(1.0, s));
}

ProximalProductStats proximal_product_experiment(int dim, int trials, int power,
                                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.5, 2.0);
  ProximalProductStats stats;
  stats.trials = trials;
  stats.min_radius_ratio = std::numeric_limits<double>::infinity();
  std::vector<double> angle_ratios;
  auto random_conjugator = [&] {
    MatrixXd a(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) a(i, j) = gauss(rng) + (i == j ? 3.0 : 0.0);
    return a;
  };
  auto planted = [&] {
    VectorXd spec(dim);
    spec(0) = 4.0 * unif(rng);
    for (int i = 1; i < dim; ++i) spec(i) = unif(rng) * std::pow(0.6, i);
    MatrixXd c = random_conjugator();
    MatrixXd g = c * spec.asDiagonal() * c.inverse();
    MatrixXd out = MatrixXd::Identity(dim, dim);
    for (int i = 0; i < power; ++i) out = out * g;
    return out;
  };
  for (int t = 0; t < trials; ++t) {
    const MatrixXd g1 = planted(), g2 = planted();
    const ProximalReport r1 = proximal_report(g1), r2 = proximal_report(g2);
    const ProximalReport rp = proximal_report(g1 * g2);
    if (!r1.is_proximal() || !r2.is_proximal() || !rp.is_proximal()) continue;
    ++stats.proximal_products;
    const double ar = line_angle(rp.attracting, r1.attracting) / std::max(r1.s_tilde, 1e-300);
    angle_ratios.push_back(ar);
    stats.max_angle_ratio = std::max(stats.max_angle_ratio, ar);
    stats.max_strength_ratio =
        std::max(stats.max_strength_ratio, rp.s_tilde / (r1.s_tilde * r2.s_tilde));
    const double rr = rp.spectral_radius / (operator_norm(g1) * operator_norm(g2));
    stats.max_radius_ratio = std::max(stats.max_radius_ratio, rr);
    stats.min_radius_ratio = std::min(stats.min_radius_ratio, rr);
  }
  if (!angle_ratios.empty()) {
    std::sort(angle_ratios.begin(), angle_ratios.end());
    stats.med_angle_ratio = angle_ratios[angle_ratios.size() / 2];
  }
  return stats;
}

// ---------------------------------------------------------------------------
// Context

Context::Context(ConcreteRep rep, x0_select::X0Certificate cert)
    : rep_(std::move(rep)), cert_(std::move(cert)) {
  const int d = rep_.dim_v();
  std::vector<MatrixXd> gt, lt, eq;
  for (const auto& [lam, basis] : rep_.weight_decomp()) {
    const int s = sign(dot(lam, cert_.x0));
    (s > 0 ? gt : s < 0 ? lt : eq).push_back(basis);
  }
  auto hcat = [&](const std::vector<MatrixXd>& blocks) {
    int cols = 0;
    for (const auto& b : blocks) cols += static_cast<int>(b.cols());
    MatrixXd m(d, cols);
    int at = 0;
    for (const auto& b : blocks) {
      m.middleCols(at, b.cols()) = b;
      at += static_cast<int>(b.cols());
    }
    return m;
  };
  v_gt_ = hcat(gt);
  v_lt_ = hcat(lt);
  v_eq_ = hcat(eq);

  const auto crit = concrete_rep::check_criterion(rep_);
  vt0_ = crit.vt0_basis;
  // V^a0: orthocomplement of V^t0 inside V^=0.
  MatrixXd residual = v_eq_ - vt0_ * (vt0_.transpose() * v_eq_);
  Eigen::JacobiSVD<MatrixXd> svd(residual, Eigen::ComputeThinU);
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 1e-10) ++rank;
  va0_ = svd.matrixU().leftCols(rank);

  if (vt0_.cols() > 0) {
    const MatrixXd img = rep_.w0_rep() * vt0_;
    w0_on_t_ = vt0_.transpose() * img;
    if ((img - vt0_ * w0_on_t_).norm() > 1e-8 * (1.0 + img.norm()))
      throw std::logic_error("w0 representative does not preserve V^t0");
  } else {
    w0_on_t_ = MatrixXd(0, 0);
  }

  // Standard-representation weights (for eigenvalue clustering).
  const auto std_ws = [&] {
    std::vector<RatVec> ws;
    if (rep_.spec().group == concrete_rep::GroupFamily::SL) {
      const int n = rep_.dim_std();
      for (int i = 0; i < n; ++i) {
        RatVec w = rv_zero(n);
        for (int j = 0; j < n; ++j) w[j] = (i == j) ? Rat(n - 1, n) : Rat(-1, n);
        ws.push_back(w);
      }
    } else {
      const int p = rep_.spec().n;
      for (int i = 0; i < p; ++i) {
        RatVec w = rv_zero(p);
        w[i] = 1;
        ws.push_back(w);
      }
      ws.push_back(rv_zero(p));
      for (int i = 0; i < p; ++i) {
        RatVec w = rv_zero(p);
        w[i] = -1;
        ws.push_back(w);
      }
    }
    return ws;
  }();
  std_weights_exact_ = std_ws;
  for (const auto& w : std_ws)
    std_weights_.emplace_back(to_vector(w), to_double(dot(w, cert_.x0)));

  if (rep_.spec().group == concrete_rep::GroupFamily::SOpq) {
    const int p = rep_.spec().n;
    const int n = 2 * p + 1;
    to_uvw_ = MatrixXd::Zero(n, n);
    const double s = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < p; ++i) {
      // u_i in slot i, v_i in slot p+1+i, w in slot p
      to_uvw_(i, i) = s;
      to_uvw_(p + 1 + i, i) = s;
      to_uvw_(i, p + 1 + i) = s;
      to_uvw_(p + 1 + i, p + 1 + i) = -s;
    }
    to_uvw_(p, p) = 1.0;
  }
}

Context Context::make(const concrete_rep::RepSpec& spec, std::uint64_t x0_seed) {
  ConcreteRep rep = ConcreteRep::realize(spec);
  auto cert = x0_select::select_x0(rep.rs(), rep.omega(), x0_seed);
  return Context(std::move(rep), std::move(cert));
}

MatrixXd Context::w0_cartan() const {
  const auto& w0 = rep_.rs().w0;
  const int d = rep_.rs().ambient_dim;
  MatrixXd m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = to_double(w0[i][j]);
  return m;
}

AffineElement Context::element(const MatrixXd& g_std, const VectorXd& trans) const {
  if (trans.size() != rep_.dim_v()) throw std::invalid_argument("translation dimension mismatch");
  return AffineElement{g_std, trans};
}

AffineElement Context::linear_element(const MatrixXd& g_std) const {
  return AffineElement{g_std, VectorXd::Zero(rep_.dim_v())};
}

AffineElement Context::compose(const AffineElement& a, const AffineElement& b) const {
  return AffineElement{a.std_mat * b.std_mat, rep_.rho(a.std_mat) * b.trans + a.trans};
}

AffineElement Context::inverse(const AffineElement& g) const {
  const MatrixXd inv_std = g.std_mat.inverse();
  return AffineElement{inv_std, -(rep_.rho(inv_std) * g.trans)};
}

AffineElement Context::power(const AffineElement& g, int n) const {
  if (n < 0) return power(inverse(g), -n);
  AffineElement acc = linear_element(MatrixXd::Identity(rep_.dim_std(), rep_.dim_std()));
  AffineElement base = g;
  while (n > 0) {
    if (n & 1) acc = compose(acc, base);
    base = compose(base, base);
    n >>= 1;
  }
  return acc;
}

VectorXd Context::apply(const AffineElement& g, const VectorXd& x) const {
  return rep_.rho(g.std_mat) * x + g.trans;
}

MatrixXd Context::extended_matrix(const AffineElement& g) const {
  const int d = rep_.dim_v();
  MatrixXd m = MatrixXd::Zero(d + 1, d + 1);
  m.topLeftCorner(d, d) = rep_.rho(g.std_mat);
  m.topRightCorner(d, 1) = g.trans;
  m(d, d) = 1.0;
  return m;
}

VectorXd Context::cartan_projection(const MatrixXd& g_std) const {
  const int r = rep_.fundamental_count();
  VectorXd pi_values(r);
  for (int i = 0; i < r; ++i)
    pi_values(i) =
        std::log(operator_norm(rep_.fundamental_rep(i, g_std))) / rep_.fundamental_multiplier(i);
  return rep_.cartan_from_pi_values(pi_values);
}

JordanResult Context::jordan_projection(const MatrixXd& g_std) const {
  return jordan_projection(g_std, tol_.jordan, 14);
}

JordanResult Context::jordan_projection(const MatrixXd& g_std, double tol,
                                        int max_doublings) const {
  const int r = rep_.fundamental_count();
  JordanResult out;

  VectorXd eigen_pi(r);
  for (int i = 0; i < r; ++i) {
    const MatrixXd m = rep_.fundamental_rep(i, g_std);
    Eigen::EigenSolver<MatrixXd> es(m);
    double top = 0;
    for (int j = 0; j < es.eigenvalues().size(); ++j)
      top = std::max(top, std::abs(es.eigenvalues()(j)));
    eigen_pi(i) = std::log(top) / rep_.fundamental_multiplier(i);
  }
  out.eigen_route = rep_.cartan_from_pi_values(eigen_pi);

  // Gelfand limit via normalized repeated squaring; the estimate for each
  // fundamental value is the difference quotient (L(2N) - L(N)) / N.
  std::vector<MatrixXd> b(r);
  std::vector<double> lognorm(r);
  for (int i = 0; i < r; ++i) {
    b[i] = rep_.fundamental_rep(i, g_std);
    const double nn = operator_norm(b[i]);
    lognorm[i] = std::log(nn);
    b[i] /= nn;
  }
  VectorXd prev_est = VectorXd::Zero(r);
  bool have_prev = false;
  out.converged = false;
  for (int k = 0; k < max_doublings; ++k) {
    VectorXd est(r);
    for (int i = 0; i < r; ++i) {
      const MatrixXd sq = b[i] * b[i];
      const double nn = operator_norm(sq);
      const double next_lognorm = 2.0 * lognorm[i] + std::log(nn);
      est(i) = (next_lognorm - lognorm[i]) / std::pow(2.0, k) / rep_.fundamental_multiplier(i);
      b[i] = sq / nn;
      lognorm[i] = next_lognorm;
    }
    if (have_prev) {
      const double diff = (est - prev_est).lpNorm<Eigen::Infinity>();
      if (diff < tol) {
        out.value = rep_.cartan_from_pi_values(est);
        out.converged = true;
        out.error_estimate = diff;
        return out;
      }
    }
    prev_est = est;
    have_prev = true;
  }
  out.value = rep_.cartan_from_pi_values(prev_est);
  out.error_estimate = (out.value - out.eigen_route).lpNorm<Eigen::Infinity>();
  return out;
}

FloatPredicates Context::float_predicates(const VectorXd& jd, double tol) const {
  FloatPredicates out;
  out.x0_regular = true;
  for (int i = 0; i < rep_.rs().rank; ++i) {
    if (dot(rep_.rs().simple_roots[i], cert_.x0) == 0) continue;
    if (to_vector(rep_.rs().simple_roots[i]).dot(jd) <= tol) out.x0_regular = false;
  }
  double max_lt = -std::numeric_limits<double>::infinity();
  double min_ge = std::numeric_limits<double>::infinity();
  bool strict_ok = true;
  for (const auto& lam : cert_.partition.lt) {
    const double v = to_vector(lam).dot(jd);
    max_lt = std::max(max_lt, v);
    if (std::abs(v) <= tol) strict_ok = false;
  }
  for (const auto& lam : cert_.partition.gt) {
    const double v = to_vector(lam).dot(jd);
    min_ge = std::min(min_ge, v);
    if (std::abs(v) <= tol) strict_ok = false;
  }
  for (const auto& lam : cert_.partition.eq) min_ge = std::min(min_ge, to_vector(lam).dot(jd));
  out.rho_regular = out.x0_regular && strict_ok;
  out.asymptotically_contracting = cert_.partition.lt.empty() || max_lt < min_ge - tol;
  out.compatible = true;
  for (const auto& lam : cert_.partition.lt)
    if (to_vector(lam).dot(jd) >= -tol) out.compatible = false;
  for (const auto& lam : cert_.partition.gt)
    if (to_vector(lam).dot(jd) <= tol) out.compatible = false;
  return out;
}

double Context::linear_contraction_strength(const MatrixXd& g_std) const {
  const VectorXd ct = cartan_projection(g_std);
  double min_alpha = std::numeric_limits<double>::infinity();
  for (int i = 0; i < rep_.rs().rank; ++i) {
    if (dot(rep_.rs().simple_roots[i], cert_.x0) == 0) continue;
    min_alpha = std::min(min_alpha, to_vector(rep_.rs().simple_roots[i]).dot(ct));
  }
  return std::exp(-min_alpha);
}

MatrixXd Context::canonize_std(const MatrixXd& g_std, const VectorXd& jd,
                               double cluster_tol) const {
  const int n = rep_.dim_std();
  // Predicted log-moduli of the standard representation at Jd.
  std::vector<double> predicted;
  for (const auto& [w, x0v] : std_weights_) predicted.push_back(w.dot(jd));
  std::vector<int> order(predicted.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return predicted[a] > predicted[b]; });

  Eigen::EigenSolver<MatrixXd> es(g_std);
  std::vector<int> eig_order(n);
  std::iota(eig_order.begin(), eig_order.end(), 0);
  std::sort(eig_order.begin(), eig_order.end(), [&](int a, int b) {
    return std::abs(es.eigenvalues()(a)) > std::abs(es.eigenvalues()(b));
  });
  // Tolerance per eigenvalue: small moduli of a large matrix are only known
  // to an absolute accuracy of machine-epsilon times the norm.
  const double scale = 1.0 + std::abs(predicted[order[0]]);
  const double gnorm = g_std.norm();
  for (int i = 0; i < n; ++i) {
    const double lm = std::log(std::abs(es.eigenvalues()(eig_order[i])));
    const double tol =
        1e-4 * scale + 1e-6 + 64.0 * 2.2e-16 * gnorm / std::exp(predicted[order[i]]);
    if (std::abs(lm - predicted[order[i]]) > tol)
      throw NearDegenerateError("eigenvalue moduli do not match the weight pattern at Jd");
  }

  // Group consecutive predicted values into clusters.
  std::vector<std::vector<int>> clusters;  // indices into eig_order positions
  for (int i = 0; i < n; ++i) {
    if (!clusters.empty() &&
        std::abs(predicted[order[i]] - predicted[order[static_cast<int>(
                                           clusters.back().front())]]) <= cluster_tol * scale)
      clusters.back().push_back(i);
    else
      clusters.push_back({i});
  }

  if (rep_.spec().group == concrete_rep::GroupFamily::SL) {
    MatrixXd p(n, n);
    int at = 0;
    for (const auto& cl : clusters) {
      std::vector<int> idx;
      for (int pos : cl) idx.push_back(eig_order[pos]);
      MatrixXd basis = real_eigenbasis(es, idx);
      if (basis.cols() != static_cast<int>(cl.size()))
        throw NearDegenerateError("defective eigenvalue cluster");
      basis = orth(basis);
      p.middleCols(at, basis.cols()) = basis;
      at += static_cast<int>(basis.cols());
    }
    double det = p.determinant();
    if (std::abs(det) < 1e-12) throw NearDegenerateError("canonizing frame is singular");
    if (det < 0) {
      p.col(0) *= -1.0;
      det = -det;
    }
    p *= std::pow(det, -1.0 / n);
    return p.inverse();
  }

  // SO+(p+1,p): build a Q-adapted frame (xi_1..xi_p, zeta, eta_1..eta_p).
  const int pp = rep_.spec().n;
  VectorXd jdiag(n);
  jdiag.head(pp + 1).setOnes();
  jdiag.tail(pp).setConstant(-1.0);
  const MatrixXd J = jdiag.asDiagonal();

  // positive clusters in descending order, their negatives, and the neutral
  MatrixXd xi(n, pp), eta(n, pp);
  int slot = 0;
  VectorXd zeta;
  for (const auto& cl : clusters) {
    const double val = predicted[order[cl.front()]];
    if (std::abs(val) <= cluster_tol * scale) {
      std::vector<int> idx;
      for (int pos : cl) idx.push_back(eig_order[pos]);
      MatrixXd basis = real_eigenbasis(es, idx);
      if (basis.cols() != 1) throw NearDegenerateError("neutral cluster is not a line");
      zeta = basis.col(0);
      continue;
    }
    if (val < 0) continue;  // handled through its positive partner
    std::vector<int> idx_pos, idx_neg;
    for (int pos : cl) idx_pos.push_back(eig_order[pos]);
    // find the partner cluster with predicted value ~ -val
    bool found = false;
    for (const auto& cl2 : clusters) {
      const double val2 = predicted[order[cl2.front()]];
      if (std::abs(val2 + val) <= cluster_tol * scale) {
        for (int pos : cl2) idx_neg.push_back(eig_order[pos]);
        found = true;
        break;
      }
    }
    if (!found || idx_neg.size() != idx_pos.size())
      throw NearDegenerateError("unpaired eigenvalue cluster");
    MatrixXd bp = orth(real_eigenbasis(es, idx_pos));
    MatrixXd bn = real_eigenbasis(es, idx_neg);
    if (bp.cols() != static_cast<int>(idx_pos.size()) || bn.cols() != bp.cols())
      throw NearDegenerateError("defective eigenvalue cluster");
    // normalize the dual pairing Q(xi_i, eta_j) = delta_ij
    const MatrixXd gram = bp.transpose() * J * bn;
    if (std::abs(gram.determinant()) < 1e-12)
      throw NearDegenerateError("isotropic pairing is degenerate");
    bn = bn * gram.inverse();
    xi.middleCols(slot, bp.cols()) = bp;
    eta.middleCols(slot, bn.cols()) = bn;
    slot += static_cast<int>(bp.cols());
  }
  if (slot != pp || zeta.size() == 0) throw NearDegenerateError("cluster bookkeeping failed");
  const double q = zeta.dot(J * zeta);
  if (q <= 0) throw NearDegenerateError("neutral vector is not spacelike");
  zeta /= std::sqrt(q);

  MatrixXd f(n, n);
  f.leftCols(pp) = xi;
  f.col(pp) = zeta;
  f.rightCols(pp) = eta;

  // component correction: flip zeta and/or the first hyperbolic pair
  for (int variant = 0; variant < 4; ++variant) {
    MatrixXd fc = f;
    if (variant & 1) fc.col(pp) *= -1.0;
    if (variant & 2) {
      fc.col(0) *= -1.0;
      fc.col(pp + 1) *= -1.0;
    }
    const MatrixXd phi = to_uvw_ * fc.inverse();
    if (rep_.in_group(phi, 1e-6)) return phi;
  }
  throw NearDegenerateError("no component correction lands in the identity component");
}

DynamicalSplit Context::ideal_split(const AffineElement& g) const {
  return ideal_split(g, tol_.cluster, tol_.leakage);
}

DynamicalSplit Context::ideal_split(const AffineElement& g, double cluster_tol,
                                    double leakage_tol) const {
  DynamicalSplit out;
  const JordanResult jr = jordan_projection(g.std_mat);
  out.jd = jr.value;
  const FloatPredicates pred = float_predicates(out.jd);
  if (!pred.rho_regular)
    throw NotRhoRegularError("ideal_split: element is not rho-regular for this X0");

  out.phi_std = canonize_std(g.std_mat, out.jd, cluster_tol);
  out.phi_rho = rep_.rho(out.phi_std);
  const MatrixXd phi_inv = out.phi_rho.inverse();
  out.v_gg = orth(phi_inv * v_gt_);
  out.v_ll = orth(phi_inv * v_lt_);
  out.v_approx = orth(phi_inv * v_eq_);

  // invariance defect measured as a perturbation of the map itself: a wrong
  // space shows up at O(1), basis roundoff at machine scale
  const MatrixXd r = rep_.rho(g.std_mat);
  const double rnorm = operator_norm(r);
  auto leak = [&](const MatrixXd& basis) {
    if (basis.cols() == 0) return 0.0;
    const MatrixXd img = r * basis;
    const MatrixXd resid = img - basis * (basis.transpose() * img);
    return operator_norm(resid) / rnorm;
  };
  out.leakage = std::max({leak(out.v_gg), leak(out.v_ll), leak(out.v_approx)});
  if (out.leakage > leakage_tol)
    throw NearDegenerateError("ideal spaces are not invariant within tolerance");

  // translation part: solve (R - I) x = -v modulo the neutral block
  const int d = rep_.dim_v();
  const int ngg = static_cast<int>(out.v_gg.cols());
  const int neq = static_cast<int>(out.v_approx.cols());
  const int nll = static_cast<int>(out.v_ll.cols());
  MatrixXd s(d, d);
  s.leftCols(ngg) = out.v_gg;
  s.middleCols(ngg, neq) = out.v_approx;
  s.rightCols(nll) = out.v_ll;
  const MatrixXd sinv = s.inverse();
  const MatrixXd rt = sinv * r * s;
  const VectorXd vt = sinv * g.trans;
  std::vector<int> widx;
  for (int i = 0; i < ngg; ++i) widx.push_back(i);
  for (int i = 0; i < nll; ++i) widx.push_back(ngg + neq + i);
  MatrixXd m(widx.size(), widx.size());
  VectorXd rhs(widx.size());
  for (std::size_t i = 0; i < widx.size(); ++i) {
    rhs(i) = -vt(widx[i]);
    for (std::size_t j = 0; j < widx.size(); ++j)
      m(i, j) = rt(widx[i], widx[j]) - (i == j ? 1.0 : 0.0);
  }
  const VectorXd cw = m.partialPivLu().solve(rhs);
  VectorXd coords = VectorXd::Zero(d);
  for (std::size_t i = 0; i < widx.size(); ++i) coords(widx[i]) = cw(i);
  const VectorXd xstar = s * coords;
  out.base_point = xstar - out.v_approx * (out.v_approx.transpose() * xstar);
  return out;
}

double Context::affine_contraction_strength(const DynamicalSplit& split,
                                            const AffineElement& g) const {
  const MatrixXd r = rep_.rho(g.std_mat);
  const double contracting = operator_norm(r * split.v_ll);
  const MatrixXd ext = extended_matrix(g);
  const MatrixXd a_ge = extended_noncontracting(split);
  return contracting * operator_norm(ext.inverse() * a_ge);
}

MatrixXd Context::extended_noncontracting(const DynamicalSplit& split) const {
  const int d = rep_.dim_v();
  const int cols = static_cast<int>(split.v_gg.cols() + split.v_approx.cols()) + 1;
  MatrixXd m = MatrixXd::Zero(d + 1, cols);
  m.block(0, 0, d, split.v_gg.cols()) = split.v_gg;
  m.block(0, split.v_gg.cols(), d, split.v_approx.cols()) = split.v_approx;
  VectorXd last(d + 1);
  last.head(d) = split.base_point;
  last(d) = 1.0;
  m.col(cols - 1) = last / last.norm();
  return orth(m);
}

MatrixXd Context::extended_nonexpanding(const DynamicalSplit& split) const {
  const int d = rep_.dim_v();
  const int cols = static_cast<int>(split.v_ll.cols() + split.v_approx.cols()) + 1;
  MatrixXd m = MatrixXd::Zero(d + 1, cols);
  m.block(0, 0, d, split.v_ll.cols()) = split.v_ll;
  m.block(0, split.v_ll.cols(), d, split.v_approx.cols()) = split.v_approx;
  VectorXd last(d + 1);
  last.head(d) = split.base_point;
  last(d) = 1.0;
  m.col(cols - 1) = last / last.norm();
  return orth(m);
}

VectorXd Context::margulis_invariant(const DynamicalSplit& split, const AffineElement& g) const {
  return margulis_invariant(split, g, tol_.margulis_independence);
}

VectorXd Context::margulis_invariant(const DynamicalSplit& split, const AffineElement& g,
                                     double independence_tol) const {
  if (vt0_.cols() == 0) return VectorXd(0);
  const MatrixXd r = rep_.rho(g.std_mat);
  auto m_at = [&](const VectorXd& x) {
    const VectorXd delta = r * x + g.trans - x;
    return VectorXd(vt0_.transpose() * (split.phi_rho * delta));
  };
  const VectorXd m0 = m_at(split.base_point);
  if (split.v_approx.cols() > 0) {
    VectorXd dir = split.v_approx * VectorXd::Ones(split.v_approx.cols()).normalized();
    const VectorXd m1 = m_at(split.base_point + dir);
    if ((m1 - m0).norm() > independence_tol * (1.0 + m0.norm()))
      throw std::runtime_error("quasi-translation violation: Margulis invariant depends on the base point");
  }
  return m0;
}

double Context::nondegeneracy_bound(const MatrixXd& a_nc, const MatrixXd& a_ne) const {
  const int d = rep_.dim_v();
  const int eq_ext = static_cast<int>(v_eq_.cols()) + 1;
  // intersection of the two extended spaces via the right null space of
  // [a_nc | -a_ne]
  const int pc = static_cast<int>(a_nc.cols()), qc = static_cast<int>(a_ne.cols());
  MatrixXd stack(d + 1, pc + qc);
  stack.leftCols(pc) = a_nc;
  stack.rightCols(qc) = -a_ne;
  Eigen::JacobiSVD<MatrixXd> svd(stack, Eigen::ComputeFullV);
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 1e-9 * svd.singularValues()(0)) ++rank;
  const int nullity = pc + qc - rank;
  if (nullity != eq_ext)
    throw std::invalid_argument("degenerate pair: intersection has unexpected dimension");
  MatrixXd inter(d + 1, eq_ext);
  for (int i = 0; i < eq_ext; ++i)
    inter.col(i) = a_nc * svd.matrixV().col(pc + qc - 1 - i).head(pc);
  inter = orth(inter);

  // The constructed map is affine: a linear part matching the three linear
  // blocks plus the translation bringing the intersection's base point to
  // the origin. Drift away from V_Aff's origin therefore shows up in nu.
  auto linear_part = [&](const MatrixXd& u) {
    const VectorXd lastrow = u.row(d).transpose();
    if (lastrow.norm() < 1e-12)
      throw std::invalid_argument("degenerate pair: space is contained in V");
    Eigen::HouseholderQR<MatrixXd> qr{MatrixXd(lastrow)};
    const MatrixXd q = qr.householderQ();
    return MatrixXd(u * q.rightCols(u.cols() - 1));
  };
  auto affine_base = [&](const MatrixXd& u) {
    const VectorXd lastrow = u.row(d).transpose();
    const VectorXd pt = u * (lastrow / lastrow.squaredNorm());
    return VectorXd(pt.head(d));
  };
  const MatrixXd n_lin = linear_part(inter);
  VectorXd base = affine_base(inter);
  base -= n_lin * (n_lin.transpose() * base);

  auto complement_in = [&](const MatrixXd& space, const MatrixXd& inside) {
    MatrixXd resid = space - inside * (inside.transpose() * space);
    Eigen::JacobiSVD<MatrixXd> s2(resid, Eigen::ComputeThinU);
    const int want = static_cast<int>(space.cols() - inside.cols());
    return MatrixXd(s2.matrixU().leftCols(want));
  };
  const MatrixXd e = complement_in(linear_part(a_nc), n_lin);
  const MatrixXd f = complement_in(linear_part(a_ne), n_lin);

  MatrixXd from(d, d), to(d, d);
  from.leftCols(e.cols()) = e;
  from.middleCols(e.cols(), n_lin.cols()) = n_lin;
  from.rightCols(f.cols()) = f;
  to.leftCols(v_gt_.cols()) = v_gt_;
  to.middleCols(v_gt_.cols(), v_eq_.cols()) = v_eq_;
  to.rightCols(v_lt_.cols()) = v_lt_;
  const MatrixXd lin = to * from.inverse();
  MatrixXd phi = MatrixXd::Zero(d + 1, d + 1);
  phi.topLeftCorner(d, d) = lin;
  phi.topRightCorner(d, 1) = -lin * base;
  phi(d, d) = 1.0;
  return std::max(operator_norm(phi), operator_norm(phi.inverse()));
}

MargulisData Context::margulis_data(const AffineElement& g) const {
  MargulisData out;
  out.ct = cartan_projection(g.std_mat);
  const DynamicalSplit split = ideal_split(g);
  out.jd = split.jd;
  out.m = margulis_invariant(split, g);
  out.s_x0_fwd = affine_contraction_strength(split, g);
  const AffineElement gi = inverse(g);
  const DynamicalSplit split_i = ideal_split(gi);
  out.s_x0_bwd = affine_contraction_strength(split_i, gi);
  out.nondeg_bound =
      nondegeneracy_bound(extended_noncontracting(split), extended_nonexpanding(split));
  return out;
}

// ---------------------------------------------------------------------------
// Experiments

double max_weight_value(const Context& ctx, const VectorXd& y) {
  double m = 0.0;
  for (const auto& lam : ctx.rep().omega().weights) {
    double v = 0.0;
    for (std::size_t i = 0; i < lam.size(); ++i) v += lam[i].get_d() * y(i);
    m = std::max(m, std::abs(v));
  }
  return m;
}

std::vector<std::pair<AffineElement, AffineElement>> sample_regular_pairs(
    const Context& ctx, int count, int base_power, std::uint64_t seed, double weight_scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::pair<AffineElement, AffineElement>> out;
  const auto& rs = ctx.rep().rs();
  const auto& omega = ctx.rep().omega();
  auto make_one = [&](std::uint64_t cone_seed) {
    const RatVec y = x0_select::compatible_cone_sample(rs, omega, ctx.cert(), cone_seed);
    VectorXd yf = to_vector(y);
    yf *= weight_scale / max_weight_value(ctx, yf);
    const MatrixXd h = ctx.rep().cartan_matrix_std(yf);
    const MatrixXd a = sym_exp(h);
    const MatrixXd k = ctx.rep().random_compact(rng);
    MatrixXd g = (k * a * k.transpose()).eval();
    MatrixXd acc = MatrixXd::Identity(g.rows(), g.cols());
    for (int i = 0; i < base_power; ++i) acc = acc * g;
    // translation pulled back from the reference neutral space: the affine
    // axis passes through the origin, so translation parts of powers grow
    // linearly rather than exponentially
    const auto split = ctx.ideal_split(ctx.linear_element(acc));
    VectorXd u(ctx.ref_neutral().cols());
    for (int i = 0; i < u.size(); ++i) u(i) = gauss(rng);
    u.normalize();
    const VectorXd v = split.phi_rho.inverse() * (ctx.ref_neutral() * u);
    return ctx.element(acc, v);
  };
  for (int t = 0; t < count; ++t) {
    out.emplace_back(make_one(seed * 977 + 2 * t), make_one(seed * 977 + 2 * t + 1));
  }
  return out;
}

AdditivityStats additivity_experiment(const Context& ctx, int trials,
                                      const std::vector<int>& powers, std::uint64_t seed) {
  AdditivityStats stats;
  const auto pairs = sample_regular_pairs(ctx, trials, 1, seed);
  std::vector<VectorXd> pis;
  for (const auto& w : ctx.rep().rs().fundamental_weights) pis.push_back(to_vector(w));
  for (int t = 0; t < trials; ++t) {
    const auto& [g, h] = pairs[t];
    for (int n : powers) {
      AdditivityTrialRow row;
      row.trial = t;
      row.power = n;
      const AffineElement gn = ctx.power(g, n), hn = ctx.power(h, n);
      const AffineElement prod = ctx.compose(gn, hn);
      const VectorXd jd_prod = ctx.jordan_projection(prod.std_mat).value;
      const VectorXd ct_g = ctx.cartan_projection(gn.std_mat);
      const VectorXd ct_h = ctx.cartan_projection(hn.std_mat);
      row.max_trapezoid = -std::numeric_limits<double>::infinity();
      for (const auto& pi : pis)
        row.max_trapezoid = std::max(row.max_trapezoid, pi.dot(jd_prod - ct_g - ct_h));
      stats.max_trapezoid = std::max(stats.max_trapezoid, row.max_trapezoid);
      if (!ctx.float_predicates(jd_prod).rho_regular) {
        row.product_rho_regular = false;
        ++stats.irregular_products;
        stats.rows.push_back(row);
        continue;
      }
      const VectorXd mg = ctx.margulis_invariant(ctx.ideal_split(gn), gn);
      const VectorXd mh = ctx.margulis_invariant(ctx.ideal_split(hn), hn);
      const VectorXd mp = ctx.margulis_invariant(ctx.ideal_split(prod), prod);
      row.dev_m = (mp - mg - mh).norm();
      row.m_norm_g = mg.norm();
      stats.max_dev_m = std::max(stats.max_dev_m, row.dev_m);
      stats.rows.push_back(row);
    }
  }
  return stats;
}

}  // namespace margulis::affine_dynamics

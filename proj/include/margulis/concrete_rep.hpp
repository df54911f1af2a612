#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "margulis/rep_weights.hpp"

namespace margulis::concrete_rep {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using rep_weights::WeightSet;
using root_system::RootSystemData;

enum class GroupFamily : std::uint8_t { SL, SOpq };  // SL(n,R); SO+(p+1,p)
enum class RepKind : std::uint8_t { Standard, Sym, Wedge, Adjoint };

std::string rep_kind_name(RepKind k);

/// A fixture choice: which group and which representation to realize.
struct RepSpec {
  GroupFamily group = GroupFamily::SL;
  int n = 3;        // SL(n); for SOpq the signature is (p+1, p) with p = n
  RepKind kind = RepKind::Standard;
  int degree = 1;   // for Sym / Wedge

  std::string name() const;
};

/// An explicit matrix realization of (G, rho, V) with exact weight
/// bookkeeping. Group elements are carried as matrices of the standard
/// representation (d_std x d_std) and mapped into V by `rho`.
///
/// Basis conventions keep the K-invariant inner product equal to the identity
/// in every representation space, with restricted weight spaces pairwise
/// orthogonal. For SO+(p+1,p) the standard basis is the compact-adapted one:
/// p unit vectors of positive square, then the residual positive vector, then
/// p of negative square; the Cartan subspace consists of the p commuting
/// boosts.
class ConcreteRep {
 public:
  static ConcreteRep realize(const RepSpec& spec);

  const RepSpec& spec() const { return spec_; }
  const RootSystemData& rs() const { return rs_; }
  const WeightSet& omega() const { return omega_; }
  int dim_std() const { return dim_std_; }
  int dim_v() const { return dim_v_; }

  /// rho(g) for a standard-representation group matrix.
  MatrixXd rho(const MatrixXd& g_std) const;
  /// drho(A) for a Lie algebra element given as a standard-rep matrix.
  MatrixXd drho(const MatrixXd& a_std) const;

  /// The standard-rep matrix of the Cartan element with the given ambient
  /// coordinates (sum-zero for SL).
  MatrixXd cartan_matrix_std(const VectorXd& coords) const;
  MatrixXd cartan_matrix_std(const RatVec& coords) const;

  const std::vector<MatrixXd>& cartan_basis_std() const { return cartan_basis_std_; }
  const std::vector<MatrixXd>& m_generators_std() const { return m_generators_std_; }
  const MatrixXd& w0_std() const { return w0_std_; }
  const MatrixXd& w0_rep() const { return w0_rep_; }

  /// Weight decomposition of V: exact weight and an orthonormal basis of the
  /// corresponding weight space (as columns).
  const std::vector<std::pair<RatVec, MatrixXd>>& weight_decomp() const { return weight_decomp_; }
  long weight_multiplicity(const RatVec& w) const;

  /// Fundamental representations used to read off Cartan projections:
  /// pi_i(Ct(g)) = (1/n_i) log |rho_i(g)|.
  int fundamental_count() const { return static_cast<int>(fundamental_n_.size()); }
  int fundamental_multiplier(int i) const { return fundamental_n_[i]; }
  MatrixXd fundamental_rep(int i, const MatrixXd& g_std) const;

  /// Exact e-coordinates of a Cartan vector from its fundamental-weight
  /// values (the linear system is precomputed).
  VectorXd cartan_from_pi_values(const VectorXd& pi_values) const;

  /// Random element of K (the maximal compact), deterministic per rng.
  MatrixXd random_compact(std::mt19937_64& rng) const;
  /// Membership fix-up: returns a variant of g (column sign adjustments among
  /// the provided candidates) lying in the identity component; SL needs
  /// nothing, SOpq picks among four sign corrections.
  bool in_group(const MatrixXd& g_std, double tol = 1e-8) const;

  /// V^0 (zero restricted weight space) as an orthonormal basis.
  MatrixXd v0_basis() const;

 private:
  RepSpec spec_;
  RootSystemData rs_;
  WeightSet omega_;
  int dim_std_ = 0;
  int dim_v_ = 0;
  std::vector<MatrixXd> cartan_basis_std_;
  std::vector<MatrixXd> m_generators_std_;
  MatrixXd w0_std_;
  MatrixXd w0_rep_;
  std::vector<std::pair<RatVec, MatrixXd>> weight_decomp_;
  std::vector<RatVec> cartan_coords_;  // e-coordinates of each Cartan basis element
  std::vector<int> fundamental_n_;
  std::vector<int> fundamental_wedge_degree_;
  Eigen::MatrixXd pi_solve_;  // maps (pi_i values) to e-coordinates

  // basis of sl(n)/so(p+1,p) used by the adjoint functor
  std::vector<MatrixXd> lie_basis_;

  void build_weight_decomposition();
};

struct CriterionReport {
  int v0_dim = 0;
  int vt0_dim = 0;
  MatrixXd vt0_basis;       // columns orthonormal
  bool moved_by_w0 = false;
  VectorXd witness;         // unit vector in V^t0 maximizing |w0 v - v|; empty if none
  double witness_residual = 0.0;  // fixed-space residual of the witness
};

/// Main criterion evaluation: V^t0 = fixed vectors of L = MA inside V,
/// moved_by_w0 says whether the w0 representative acts nontrivially on it.
CriterionReport check_criterion(const ConcreteRep& rep, double svd_tol = 1e-8);

/// Numerical joint-eigenspace weight diagnostics; multiplicities must match
/// the exact side on split fixtures.
std::map<std::string, long> restricted_weight_diag(const ConcreteRep& rep);

}  // namespace margulis::concrete_rep

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "margulis/concrete_rep.hpp"
#include "margulis/x0_select.hpp"

namespace margulis::affine_dynamics {

using concrete_rep::ConcreteRep;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Proximal layer (plain matrices, no group structure)

enum class Proximality : std::uint8_t { Proximal, NotProximal, Indeterminate };

struct ProximalReport {
  Proximality status = Proximality::NotProximal;
  double spectral_radius = 0.0;
  double gap = 0.0;               // |lambda_1| / |lambda_2|
  VectorXd attracting;            // unit vector spanning E^s
  VectorXd repelling_normal;      // unit normal of the hyperplane E^u
  double s_tilde = 0.0;           // |gamma restricted to E^u| / spectral radius

  bool is_proximal() const { return status == Proximality::Proximal; }
};

ProximalReport proximal_report(const MatrixXd& m, double gap_tol = 1e-9);

/// Angle between lines spanned by two vectors, in [0, pi/2].
double line_angle(const VectorXd& a, const VectorXd& b);
/// Largest principal angle between the column spans (Hausdorff metric on the
/// Grassmannian via orthoprojector differences).
double subspace_angle(const MatrixXd& a, const MatrixXd& b);

struct ProximalProductStats {
  int trials = 0;
  int proximal_products = 0;
  double max_angle_ratio = 0.0;    // angle(E^s_{g1g2}, E^s_{g1}) / s~(g1)
  double med_angle_ratio = 0.0;
  double max_strength_ratio = 0.0; // s~(g1g2) / (s~(g1) s~(g2))
  double max_radius_ratio = 0.0;   // r(g1g2) / (|g1| |g2|)
  double min_radius_ratio = 0.0;
};

/// Seeded experiment for the proximal product estimates: random conjugated
/// planted-spectrum pairs raised to the given power.
ProximalProductStats proximal_product_experiment(int dim, int trials, int power,
                                                 std::uint64_t seed);

// ---------------------------------------------------------------------------
// Group-level dynamics

/// Element of G x| V: standard-representation matrix for the linear part plus
/// a translation in the fixture representation space V.
struct AffineElement {
  MatrixXd std_mat;
  VectorXd trans;
};

struct JordanResult {
  VectorXd value;          // e-coordinates, from the Gelfand limit
  VectorXd eigen_route;    // cross-check from eigenvalue moduli
  bool converged = false;
  double error_estimate = 0.0;
};

struct FloatPredicates {
  bool x0_regular = false;
  bool rho_regular = false;
  bool asymptotically_contracting = false;
  bool compatible = false;
};

struct NearDegenerateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotRhoRegularError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Canonized data of a rho-regular affine map: a group-level canonizing map
/// (computed in the standard representation and pushed through rho), the
/// ideal dynamical spaces, and the base point of the affine ideally neutral
/// space.
struct DynamicalSplit {
  VectorXd jd;
  MatrixXd phi_std;       // group element with phi g_h phi^-1 = exp(Jd)
  MatrixXd phi_rho;       // rho(phi_std)
  MatrixXd v_gg, v_ll, v_approx;  // orthonormal bases of the linear ideal spaces
  VectorXd base_point;    // point of A^approx_g in V_Aff closest to the origin
  double leakage = 0.0;   // invariance residual of the ideal spaces
};

struct MargulisData {
  VectorXd jd, ct;            // e-coordinates
  VectorXd m;                 // Margulis invariant, coordinates in the V^t0 basis
  double s_x0_fwd = 0.0, s_x0_bwd = 0.0;
  double nondeg_bound = 0.0;  // nu of the constructed canonizing map for (A>~, A<~)
};

/// Numeric knobs used by the dynamics operations (overridable from the CLI).
struct NumericTolerances {
  double cluster = 1e-6;               // relative eigenvalue-cluster grouping
  double leakage = 1e-8;               // invariance defect of ideal spaces
  double jordan = 1e-6;                // Gelfand limit convergence
  double margulis_independence = 1e-8; // base-point independence of M
};

/// Everything needed to run affine dynamics for one fixture: the realization,
/// the reference vector X0 with its certificate, and the reference dynamical
/// spaces.
class Context {
 public:
  Context(ConcreteRep rep, x0_select::X0Certificate cert);

  static Context make(const concrete_rep::RepSpec& spec, std::uint64_t x0_seed = 1);

  void set_tolerances(const NumericTolerances& tol) { tol_ = tol; }
  const NumericTolerances& tolerances() const { return tol_; }

  const ConcreteRep& rep() const { return rep_; }
  const x0_select::X0Certificate& cert() const { return cert_; }
  int dim_v() const { return rep_.dim_v(); }
  int vt0_dim() const { return static_cast<int>(vt0_.cols()); }

  const MatrixXd& ref_expanding() const { return v_gt_; }
  const MatrixXd& ref_contracting() const { return v_lt_; }
  const MatrixXd& ref_neutral() const { return v_eq_; }
  const MatrixXd& vt0_basis() const { return vt0_; }
  const MatrixXd& w0_on_t() const { return w0_on_t_; }
  MatrixXd w0_cartan() const;  // action of w0 on e-coordinates (floats)

  AffineElement element(const MatrixXd& g_std, const VectorXd& trans) const;
  AffineElement linear_element(const MatrixXd& g_std) const;
  AffineElement compose(const AffineElement& a, const AffineElement& b) const;
  AffineElement inverse(const AffineElement& g) const;
  AffineElement power(const AffineElement& g, int n) const;
  MatrixXd rho(const MatrixXd& g_std) const { return rep_.rho(g_std); }

  VectorXd apply(const AffineElement& g, const VectorXd& x) const;

  VectorXd cartan_projection(const MatrixXd& g_std) const;
  JordanResult jordan_projection(const MatrixXd& g_std) const;
  JordanResult jordan_projection(const MatrixXd& g_std, double tol, int max_doublings) const;
  FloatPredicates float_predicates(const VectorXd& jd, double tol = 1e-7) const;

  /// exp(-min over simple roots off Pi_X0 of alpha(Ct(g))).
  double linear_contraction_strength(const MatrixXd& g_std) const;

  DynamicalSplit ideal_split(const AffineElement& g) const;
  DynamicalSplit ideal_split(const AffineElement& g, double cluster_tol,
                             double leakage_tol) const;

  double affine_contraction_strength(const DynamicalSplit& split, const AffineElement& g) const;

  /// Margulis invariant in V^t0 coordinates; checks base-point independence.
  VectorXd margulis_invariant(const DynamicalSplit& split, const AffineElement& g) const;
  VectorXd margulis_invariant(const DynamicalSplit& split, const AffineElement& g,
                              double independence_tol) const;

  /// nu(phi) of an explicitly constructed (not optimal) canonizing map for a
  /// transverse pair of affine parabolic spaces, given by orthonormal bases
  /// in the extended space of dimension dim_v + 1. Upper bound of the
  /// transversality defect; throws on degenerate pairs.
  double nondegeneracy_bound(const MatrixXd& a_noncontracting, const MatrixXd& a_nonexpanding) const;

  /// Extended-space orthonormal bases of A^>~_g and A^<~_g.
  MatrixXd extended_noncontracting(const DynamicalSplit& split) const;
  MatrixXd extended_nonexpanding(const DynamicalSplit& split) const;

  MargulisData margulis_data(const AffineElement& g) const;

  /// Extended (dim+1) matrix of an affine element.
  MatrixXd extended_matrix(const AffineElement& g) const;

 private:
  ConcreteRep rep_;
  x0_select::X0Certificate cert_;
  NumericTolerances tol_;
  MatrixXd v_gt_, v_lt_, v_eq_;  // reference space bases (orthonormal columns)
  MatrixXd vt0_, va0_;
  MatrixXd w0_on_t_;
  std::vector<std::pair<VectorXd, double>> std_weights_;  // std-rep weights and X0 pairing
  std::vector<RatVec> std_weights_exact_;
  MatrixXd to_uvw_;  // SOpq only: columns are the weight frame of the standard rep

  MatrixXd canonize_std(const MatrixXd& g_std, const VectorXd& jd, double cluster_tol) const;
};

// ---------------------------------------------------------------------------
// Experiments (seeded, deterministic)

struct AdditivityTrialRow {
  int trial = 0;
  int power = 0;
  double dev_m = 0.0;          // |M(g^N h^N) - M(g^N) - M(h^N)|
  double m_norm_g = 0.0;       // |M(g^N)|
  double max_trapezoid = 0.0;  // max_i pi_i(Jd(gh) - Ct(g) - Ct(h))
  bool product_rho_regular = true;
};

struct AdditivityStats {
  std::vector<AdditivityTrialRow> rows;
  double max_dev_m = 0.0;
  double max_trapezoid = -1e300;
  int irregular_products = 0;
};

/// Seeded sampler for C-non-degenerate, strongly contracting rho-regular
/// pairs in G x| V (random conjugates of exp of a compatible cone sample,
/// powered up, with bounded random translations). The cone sample is scaled
/// so its largest weight value is `weight_scale`, keeping representation
/// norms within the double-precision budget at the powers used.
std::vector<std::pair<AffineElement, AffineElement>> sample_regular_pairs(
    const Context& ctx, int count, int base_power, std::uint64_t seed,
    double weight_scale = 0.5);

/// Maximum |lambda(y)| over the weight set; used to normalize cone samples.
double max_weight_value(const Context& ctx, const VectorXd& y);

AdditivityStats additivity_experiment(const Context& ctx, int trials,
                                      const std::vector<int>& powers, std::uint64_t seed);

}  // namespace margulis::affine_dynamics

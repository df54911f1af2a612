#include "margulis/x0_select.hpp"

#include <algorithm>
#include <random>

namespace margulis::x0_select {

namespace {

bool weight_list_equal(std::vector<Weight> a, std::vector<Weight> b) {
  auto lt = [](const Weight& x, const Weight& y) { return rv_key(x) < rv_key(y); };
  std::sort(a.begin(), a.end(), lt);
  std::sort(b.begin(), b.end(), lt);
  return a == b;
}

std::vector<Weight> omega_w0_set(const RootSystemData& rs, const WeightSet& omega) {
  std::vector<Weight> out;
  for (const auto& w : omega.weights)
    if (matvec(rs.w0, w) == w) out.push_back(w);
  return out;
}

// Does w preserve the type of x (same strict sign partition of Omega)?
bool preserves_type(const WeightSet& omega, const RatVec& x, const RatMat& w) {
  const RatVec wx = matvec(w, x);
  for (const auto& lam : omega.weights)
    if (sign(dot(lam, wx)) != sign(dot(lam, x))) return false;
  return true;
}

}  // namespace

std::vector<Weight> TypePartition::ge() const {
  std::vector<Weight> r = gt;
  r.insert(r.end(), eq.begin(), eq.end());
  return r;
}

std::vector<Weight> TypePartition::le() const {
  std::vector<Weight> r = lt;
  r.insert(r.end(), eq.begin(), eq.end());
  return r;
}

TypePartition type_partition(const WeightSet& omega, const RatVec& x) {
  TypePartition p;
  for (const auto& lam : omega.weights) {
    const int s = sign(dot(lam, x));
    (s > 0 ? p.gt : s < 0 ? p.lt : p.eq).push_back(lam);
  }
  return p;
}

bool is_symmetric(const RootSystemData& rs, const RatVec& x) {
  return rs.apply_minus_w0(x) == x;
}

bool is_generically_symmetric(const RootSystemData& rs, const WeightSet& omega, const RatVec& x) {
  if (!is_symmetric(rs, x)) return false;
  const TypePartition p = type_partition(omega, x);
  return weight_list_equal(p.eq, omega_w0_set(rs, omega));
}

bool is_extreme(const RootSystemData& rs, const WeightSet& omega, const RatVec& x,
                std::size_t weyl_cap) {
  for (const auto& w : root_system::weyl_group(rs, weyl_cap)) {
    const bool fixes = matvec(w.matrix, x) == x;
    if (preserves_type(omega, x, w.matrix) != fixes) return false;
  }
  return true;
}

RatVec find_generically_symmetric(const RootSystemData& rs, const WeightSet& omega,
                                  std::uint64_t seed) {
  bool only_zero = true;
  for (const auto& w : omega.weights)
    if (!is_zero(w)) only_zero = false;
  if (only_zero) throw TrivialRepresentationError();

  const int d = rs.ambient_dim;
  // Dual of the sum of fundamental weights (gram is the identity), then
  // symmetrize by -w0. Both steps preserve strict dominance.
  RatVec base = rv_zero(d);
  for (const auto& w : rs.fundamental_weights) base = add(base, w);
  base = scale(Rat(1, 2), add(base, rs.apply_minus_w0(base)));

  const std::vector<Weight> fixed = omega_w0_set(rs, omega);
  auto acceptable = [&](const RatVec& x) {
    if (!rs.is_dominant(x)) return false;
    const TypePartition p = type_partition(omega, x);
    return weight_list_equal(p.eq, fixed);
  };

  if (acceptable(base)) return base;
  std::mt19937_64 rng(seed);
  for (int attempt = 1; attempt <= 4096; ++attempt) {
    // Small symmetric rational perturbation with shrinking magnitude.
    RatVec delta = rv_zero(d);
    const long den = 64L * attempt;
    for (int i = 0; i < d; ++i)
      delta[i] = Rat(static_cast<long>(rng() % 129) - 64, den * 64);
    delta = scale(Rat(1, 2), add(delta, rs.apply_minus_w0(delta)));
    const RatVec cand = add(base, delta);
    if (acceptable(cand)) return cand;
  }
  throw std::logic_error("find_generically_symmetric: search failed (should be unreachable)");
}

RatVec extremize(const RootSystemData& rs, const WeightSet& omega, const RatVec& x,
                 std::size_t weyl_cap) {
  if (!is_generically_symmetric(rs, omega, x))
    throw std::invalid_argument("extremize: input is not generically symmetric");
  RatVec sum = rv_zero(rs.ambient_dim);
  for (const auto& w : root_system::weyl_group(rs, weyl_cap))
    if (preserves_type(omega, x, w.matrix)) sum = add(sum, matvec(w.matrix, x));
  return sum;
}

X0Certificate make_certificate(const RootSystemData& rs, const WeightSet& omega, const RatVec& x0,
                               std::size_t weyl_cap) {
  X0Certificate cert;
  cert.x0 = x0;
  cert.symmetric = is_symmetric(rs, x0);
  cert.generically_symmetric = is_generically_symmetric(rs, omega, x0);
  cert.extreme = is_extreme(rs, omega, x0, weyl_cap);
  if (!rs.is_dominant(x0)) throw std::invalid_argument("x0 must be dominant");
  if (!cert.generically_symmetric || !cert.extreme)
    throw std::invalid_argument("x0 is not generically symmetric and extreme");
  cert.partition = type_partition(omega, x0);
  for (int i = 0; i < rs.rank; ++i)
    if (dot(rs.simple_roots[i], x0) == 0) {
      cert.pi_x0.push_back(rs.simple_roots[i]);
      WeylElement refl;
      refl.matrix = RatMat(rs.ambient_dim, rv_zero(rs.ambient_dim));
      for (int j = 0; j < rs.ambient_dim; ++j) {
        RatVec col = rv_zero(rs.ambient_dim);
        col[j] = 1;
        RatVec img = rs.reflect(rs.simple_roots[i], col);
        for (int k = 0; k < rs.ambient_dim; ++k) refl.matrix[k][j] = img[k];
      }
      refl.word = {i};
      cert.w_x0_generators.push_back(refl);
    }

  // Weight pairs across the wall for every simple root alpha_i off pi_x0:
  // exhaustive search; deterministic tie-break on the lexicographically
  // greatest lower weight.
  auto lex_greater = [](const Weight& a, const Weight& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] > b[i]) return true;
      if (a[i] < b[i]) return false;
    }
    return false;
  };
  for (int i = 0; i < rs.rank; ++i) {
    if (dot(rs.simple_roots[i], x0) == 0) continue;
    std::optional<std::pair<Weight, Weight>> weak, strong;
    for (const auto& lower : cert.partition.lt) {
      const Weight upper = add(lower, rs.simple_roots[i]);
      if (!omega.contains(upper)) continue;
      const Rat v = dot(upper, x0);
      if (v >= 0) {
        if (!weak || lex_greater(lower, weak->second)) weak = {{upper, lower}};
        if ((v > 0 || is_zero(upper)) && (!strong || lex_greater(lower, strong->second)))
          strong = {{upper, lower}};
      }
    }
    if (!weak || !strong)
      throw std::logic_error("weight pair across the wall not found for a simple root; "
                             "this contradicts the structure theory and indicates a bug");
    cert.pairs_weak[i] = *weak;
    cert.pairs_strong[i] = *strong;
  }
  return cert;
}

X0Certificate select_x0(const RootSystemData& rs, const WeightSet& omega, std::uint64_t seed) {
  const RatVec gs = find_generically_symmetric(rs, omega, seed);
  return make_certificate(rs, omega, extremize(rs, omega, gs));
}

VectorPredicates vector_predicates(const RootSystemData& rs, const WeightSet& omega,
                                   const X0Certificate& cert, const RatVec& y) {
  VectorPredicates out;
  out.x0_regular = true;
  for (int i = 0; i < rs.rank; ++i) {
    if (dot(rs.simple_roots[i], cert.x0) == 0) continue;
    if (dot(rs.simple_roots[i], y) == 0) out.x0_regular = false;
  }
  out.rho_regular = out.x0_regular;
  for (const auto& lam : cert.partition.gt)
    if (dot(lam, y) == 0) out.vanishing.push_back(lam);
  for (const auto& lam : cert.partition.lt)
    if (dot(lam, y) == 0) out.vanishing.push_back(lam);
  if (!out.vanishing.empty()) out.rho_regular = false;

  std::optional<Rat> max_lt, min_ge;
  for (const auto& lam : cert.partition.lt) {
    const Rat v = dot(lam, y);
    if (!max_lt || v > *max_lt) max_lt = v;
  }
  for (const auto& lam : cert.partition.gt) {
    const Rat v = dot(lam, y);
    if (!min_ge || v < *min_ge) min_ge = v;
  }
  for (const auto& lam : cert.partition.eq) {
    const Rat v = dot(lam, y);
    if (!min_ge || v < *min_ge) min_ge = v;
  }
  out.asymptotically_contracting = !max_lt || !min_ge || *max_lt < *min_ge;

  out.compatible = true;
  for (const auto& lam : cert.partition.lt)
    if (dot(lam, y) >= 0) out.compatible = false;
  for (const auto& lam : cert.partition.gt)
    if (dot(lam, y) <= 0) out.compatible = false;
  return out;
}

RatVec compatible_cone_sample(const RootSystemData& rs, const WeightSet& omega,
                              const X0Certificate& cert, std::uint64_t seed) {
  RatVec dominant_dir = rv_zero(rs.ambient_dim);
  for (const auto& w : rs.fundamental_weights) dominant_dir = add(dominant_dir, w);
  std::mt19937_64 rng(seed);
  // perturb inside the span of the simple roots (the Cartan space itself)
  RatVec jiggle = rv_zero(rs.ambient_dim);
  for (const auto& a : rs.simple_roots)
    jiggle = add(jiggle, scale(Rat(static_cast<long>(rng() % 33) - 16, 4096), a));
  auto good = [&](const RatVec& y) {
    if (!rs.is_strictly_dominant(y)) return false;
    const VectorPredicates p = vector_predicates(rs, omega, cert, y);
    return p.compatible;
  };
  for (int k = 0; k < 64; ++k) {
    const Rat eps(1, 1L << std::min(k, 30));
    RatVec y = add(cert.x0, scale(eps, add(dominant_dir, jiggle)));
    if (good(y)) return y;
    y = add(cert.x0, scale(eps, dominant_dir));
    if (good(y)) return y;
  }
  throw std::logic_error("compatible_cone_sample: open cone sample not found");
}

}  // namespace margulis::x0_select

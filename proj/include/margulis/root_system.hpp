#pragma once

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "margulis/rational.hpp"

namespace margulis::root_system {

enum class Family : std::uint8_t { A, B, C, D, BC, Product };

std::string family_name(Family f);
Family family_from_name(const std::string& s);

/// A Weyl group element as its orthogonal action on the Cartan space,
/// together with a reduced word in the simple reflections (empty for the
/// identity, absent for elements not obtained from generator closure).
struct WeylElement {
  RatMat matrix;
  std::vector<int> word;
};

/// Exact realization of a restricted root system in standard e-coordinates.
/// Covectors and vectors share coordinates (the Gram matrix is the identity
/// in every realization used here).
struct RootSystemData {
  Family family = Family::A;
  int rank = 0;
  int ambient_dim = 0;
  std::vector<RatVec> simple_roots;     // alpha_1..alpha_r
  std::vector<RatVec> positive_roots;   // Sigma^+
  std::vector<RatVec> all_roots;        // Sigma = Sigma^+ disjoint union -Sigma^+
  std::vector<bool> doubled;            // per simple root: is 2*alpha_i a root?
  RatMat gram;                          // inner product on the Cartan space
  std::vector<RatVec> fundamental_weights;
  RatMat w0;                            // longest element, as a matrix
  std::vector<int> factor_ranks;        // for products: rank per factor

  bool is_simple() const { return family != Family::Product; }
  bool simply_laced() const;

  Rat pair(const RatVec& covector, const RatVec& vec) const { return dot(covector, vec); }
  RatVec reflect(const RatVec& root, const RatVec& x) const;
  bool is_root(const RatVec& v) const;
  bool is_dominant(const RatVec& x) const;          // alpha_i(x) >= 0 for all i
  bool is_strictly_dominant(const RatVec& x) const; // alpha_i(x) > 0 for all i
  RatVec dominant_representative(RatVec x) const;   // the W-orbit point in the closed chamber
  RatVec apply_w0(const RatVec& x) const { return matvec(w0, x); }
  RatVec apply_minus_w0(const RatVec& x) const { return neg(apply_w0(x)); }

  /// alpha'_i = 2*alpha_i when doubled, alpha_i otherwise.
  RatVec alpha_prime(int i) const;

  /// Coordinates of v in the basis of simple roots (v must lie in their span).
  std::optional<RatVec> simple_root_coordinates(const RatVec& v) const;

  /// Weight given by integer (or rational) coordinates in the fundamental
  /// weight basis.
  RatVec weight_from_pi_coords(const RatVec& coords) const;
};

struct WeylTooLargeError : std::runtime_error {
  std::size_t partial_count;
  explicit WeylTooLargeError(std::size_t n)
      : std::runtime_error("Weyl group larger than the configured cap (saw " +
                           std::to_string(n) + " elements)"),
        partial_count(n) {}
};

inline constexpr std::size_t kDefaultWeylCap = 1'000'000;

RootSystemData build_root_system(Family family, int n);
RootSystemData build_root_system(const std::string& family, int n);
RootSystemData product_root_system(const std::vector<RootSystemData>& parts);

/// Full Weyl group by closure of the simple reflections; elements carry
/// reduced words. Throws WeylTooLargeError beyond `max_order`.
std::vector<WeylElement> weyl_group(const RootSystemData& rs,
                                    std::size_t max_order = kDefaultWeylCap);

/// Pointwise stabilizer W_X = { w : wX = X }.
std::vector<WeylElement> stabilizer_in_W(const RootSystemData& rs, const RatVec& x,
                                         std::size_t max_order = kDefaultWeylCap);

/// Setwise stabilizer of a finite set of covectors.
std::vector<WeylElement> setwise_stabilizer_in_W(const RootSystemData& rs,
                                                 const std::vector<RatVec>& set,
                                                 std::size_t max_order = kDefaultWeylCap);

nlohmann::json to_json(const RootSystemData& rs);
RootSystemData root_system_from_json(const nlohmann::json& j);

}  // namespace margulis::root_system

#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "margulis/rep_weights.hpp"

namespace margulis::x0_select {

using rep_weights::Weight;
using rep_weights::WeightSet;
using root_system::RootSystemData;
using root_system::WeylElement;

/// Sign partition of a weight set against a Cartan vector.
struct TypePartition {
  std::vector<Weight> gt, eq, lt;

  std::vector<Weight> ge() const;
  std::vector<Weight> le() const;
};

struct X0Certificate {
  RatVec x0;
  bool symmetric = false;
  bool generically_symmetric = false;
  bool extreme = false;
  TypePartition partition;
  std::vector<RatVec> pi_x0;                    // simple roots vanishing on x0
  std::vector<WeylElement> w_x0_generators;     // reflections generating W_{x0}
  // Per simple root outside pi_x0: weights (upper, lower) with difference
  // alpha_i; "weak" has upper in Omega^>=, "strong" in Omega^> union {0}.
  std::map<int, std::pair<Weight, Weight>> pairs_weak;
  std::map<int, std::pair<Weight, Weight>> pairs_strong;
};

struct VectorPredicates {
  bool x0_regular = false;
  bool rho_regular = false;
  bool asymptotically_contracting = false;
  bool compatible = false;
  std::vector<Weight> vanishing;  // weights outside Omega^=_{X0} vanishing on Y
};

struct TrivialRepresentationError : std::runtime_error {
  TrivialRepresentationError() : std::runtime_error("criterion trivially fails: Omega = {0}") {}
};

TypePartition type_partition(const WeightSet& omega, const RatVec& x);

bool is_symmetric(const RootSystemData& rs, const RatVec& x);
bool is_generically_symmetric(const RootSystemData& rs, const WeightSet& omega, const RatVec& x);
bool is_extreme(const RootSystemData& rs, const WeightSet& omega, const RatVec& x,
                std::size_t weyl_cap = root_system::kDefaultWeylCap);

/// Deterministic search for a dominant, generically symmetric vector: start
/// from the -w0-symmetrized dual of the sum of fundamental weights and apply
/// seeded rational perturbations inside Fix(-w0) until no weight outside
/// Omega^{w0} vanishes.
RatVec find_generically_symmetric(const RootSystemData& rs, const WeightSet& omega,
                                  std::uint64_t seed);

/// Averages x over its type stabilizer, yielding an extreme representative of
/// the same type.
RatVec extremize(const RootSystemData& rs, const WeightSet& omega, const RatVec& x,
                 std::size_t weyl_cap = root_system::kDefaultWeylCap);

/// Full certificate for a generically symmetric extreme vector; throws if the
/// input fails the predicates (use find_generically_symmetric + extremize to
/// produce one).
X0Certificate make_certificate(const RootSystemData& rs, const WeightSet& omega, const RatVec& x0,
                               std::size_t weyl_cap = root_system::kDefaultWeylCap);

/// Convenience: search + extremize + certify.
X0Certificate select_x0(const RootSystemData& rs, const WeightSet& omega, std::uint64_t seed);

VectorPredicates vector_predicates(const RootSystemData& rs, const WeightSet& omega,
                                   const X0Certificate& cert, const RatVec& y);

/// A strictly dominant rational vector compatible with x0 (the open cone is
/// nonempty; deterministic for a given seed).
RatVec compatible_cone_sample(const RootSystemData& rs, const WeightSet& omega,
                              const X0Certificate& cert, std::uint64_t seed);

}  // namespace margulis::x0_select

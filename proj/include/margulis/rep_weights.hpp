#pragma once

#include <map>
#include <optional>
#include <vector>

#include "margulis/root_system.hpp"

namespace margulis::rep_weights {

using root_system::RootSystemData;

using Weight = RatVec;

/// The exact set of restricted weights of an irreducible representation,
/// optionally with multiplicities (split case only).
struct WeightSet {
  Weight highest;
  std::vector<Weight> weights;                 // deterministic order (sorted by key)
  std::map<std::string, long> multiplicities;  // empty unless computed; keyed by rv_key

  bool contains(const Weight& w) const;
  long dimension() const;  // sum of multiplicities; requires them
  long multiplicity(const Weight& w) const;
};

struct RepClassification {
  bool zero_is_weight = false;
  bool limited = false;
  bool abundant = false;
  bool awkward = false;
  bool swinging = false;
  std::vector<Weight> omega_w0;  // weights fixed by w0
};

enum class HullMethod {
  Dominance,  // exact test via the dominant representative (production path)
  Lp,         // exact rational LP feasibility over the Weyl orbit (oracle path)
};

/// Exact convex-hull membership: is y in Conv(W . x)? Both methods are exact;
/// they are checked against each other in the test suite.
bool in_weyl_hull(const RootSystemData& rs, const RatVec& x, const RatVec& y,
                  HullMethod method = HullMethod::Dominance);

/// The Weyl orbit of a vector (deduplicated, deterministic order).
std::vector<RatVec> weyl_orbit(const RootSystemData& rs, const RatVec& x);

/// Restricted weights of the irreducible representation with the given
/// dominant highest restricted weight: the shifted root lattice intersected
/// with the convex hull of the Weyl orbit.
WeightSet weight_set(const RootSystemData& rs, const Weight& highest,
                     HullMethod method = HullMethod::Dominance);
WeightSet weight_set_from_pi_coords(const RootSystemData& rs, const RatVec& pi_coords,
                                    HullMethod method = HullMethod::Dominance);

/// Freudenthal multiplicity recursion. Valid for split groups, where
/// restricted weights coincide with ordinary weights; refuses non-reduced
/// (BC-type) systems.
WeightSet multiplicities_split(const RootSystemData& rs, const Weight& highest);

RepClassification classify(const RootSystemData& rs, const WeightSet& omega);

/// Sigma subset of Omega test, applicable when the system is simple with a
/// simply-laced diagram and {0} is strictly contained in Omega.
std::optional<bool> roots_in_weights_check(const RootSystemData& rs, const WeightSet& omega);

/// Weight set of the adjoint representation (Sigma together with 0, the zero
/// weight carrying multiplicity = rank for split groups).
WeightSet adjoint_weight_set(const RootSystemData& rs);

}  // namespace margulis::rep_weights

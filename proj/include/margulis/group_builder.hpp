#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "margulis/affine_dynamics.hpp"

namespace margulis::group_builder {

using affine_dynamics::AffineElement;
using affine_dynamics::Context;
using Eigen::VectorXd;

struct Letter {
  int gen = 0;   // generator index, 0-based
  int sign = 1;  // +1 or -1
  bool operator==(const Letter& o) const { return gen == o.gen && sign == o.sign; }
};

struct WordSpec {
  std::vector<Letter> letters;

  int length() const { return static_cast<int>(letters.size()); }
  bool reduced() const;
  bool cyclically_reduced() const;
  std::string text() const;  // e.g. "g1.g2^-1.g1"
};

enum class WordMode : std::uint8_t { Reduced, CyclicallyReduced };

/// All nonempty words of length <= max_len in k generators, deduplicated,
/// in length-then-lexicographic order.
std::vector<WordSpec> enumerate_words(int k, int max_len, WordMode mode);

struct GeneratorFamily {
  std::vector<AffineElement> gens;
  VectorXd m_c;             // prescribed invariant, V^t0 coordinates
  double m_norm = 1.0;
  int power_used = 1;
  double c_bound = 0.0;     // max nondegeneracy bound over cross pairs (H2)
  double s_threshold = 1.0;
  double max_s_measured = 0.0;   // max s_{X0}(g_i^{+-1}) (H3)
  double max_m_residual = 0.0;   // max |M(g_i) - M_C| (H4)
  bool h1 = false, h2 = false, h3 = false, h4 = false;

  bool passes() const { return h1 && h2 && h3 && h4; }
};

struct PowerTooSmallError : std::runtime_error {
  double measured;
  PowerTooSmallError(double s, double threshold)
      : std::runtime_error("increase power: measured contraction strength " + std::to_string(s) +
                           " exceeds threshold " + std::to_string(threshold)),
        measured(s) {}
};

/// Builds k generators g_i = (translation by phi_i^-1(M_C)) o gamma_i^N where
/// the gamma_i are random in-group conjugates of the exponential of a
/// compatible cone vector, retried until pairwise transversality holds.
GeneratorFamily build_family(const Context& ctx, int k, int power, double m_norm,
                             double s_threshold, std::uint64_t seed,
                             double c_bound_limit = 1000.0, int retry_budget = 64,
                             double weight_scale = 0.375);

/// Same family with one generator's prescribed invariant negated (a broken
/// family used to exercise the properness heuristic's failure path).
GeneratorFamily sabotage(const Context& ctx, GeneratorFamily family, int index);

struct WordRecord {
  WordSpec word;
  int length = 0;
  bool rho_regular = false;
  double s_x0 = 0.0;
  double m_norm = 0.0;
  double deviation = 0.0;  // |M(w) - l * M_C|
};

struct SurveyResult {
  std::vector<WordRecord> rows;
  std::vector<double> max_s_by_length;         // index l-1
  std::vector<double> max_deviation_by_length;
  int irregular_words = 0;
  double khat = 0.0;  // measured length-2 deviation maximum
};

SurveyResult word_survey(const Context& ctx, const GeneratorFamily& family, int max_len);

struct PropernessReport {
  bool passed = false;
  bool freeness_ok = false;
  std::vector<double> min_displacement_by_length;
  std::string failing_word;  // empty when passed
  double collapse_threshold = 0.0;
};

PropernessReport properness_heuristic(const Context& ctx, const GeneratorFamily& family,
                                      int max_len, int sample_points, std::uint64_t seed);

/// Word evaluation with the product kept in orthogonal-times-remainder form;
/// the orthogonal factor is refreshed by a QR step every few letters.
AffineElement evaluate_word(const Context& ctx, const GeneratorFamily& family,
                            const WordSpec& word);

}  // namespace margulis::group_builder

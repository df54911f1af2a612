#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "margulis/group_builder.hpp"

namespace margulis::commands {

// Exit code conventions: 0 pass, 1 property violation, 2 bad input,
// 3 not applicable.
inline constexpr int kPass = 0;
inline constexpr int kViolation = 1;
inline constexpr int kBadInput = 2;
inline constexpr int kNotApplicable = 3;

struct Result {
  int exit_code = kPass;
  nlohmann::json report;
};

struct Tolerances {
  double svd_rank = 1e-8;
  double cluster = 1e-6;
  double jordan = 1e-6;
  double leakage = 1e-8;
  double margulis_independence = 1e-8;

  nlohmann::json to_json() const;
};

/// Overrides the numeric tolerances for subsequent commands (the CLI's
/// --tol-rank and --tol-cluster flags land here). Reports embed the values
/// in force.
void set_tolerances(const Tolerances& tol);
const Tolerances& tolerances();

/// Root-system-level representation query (family + rank + one way of naming
/// the representation).
struct RepQuery {
  std::string family = "A";
  int rank = 2;
  std::optional<std::vector<long>> highest;  // fundamental-weight coordinates
  int sym = -1;    // SL only: Sym^k of the standard representation
  int wedge = -1;  // SL only: Lambda^k
  bool adjoint = false;
};

/// Concrete fixture tags accepted on the command line, e.g. "so21", "so32",
/// "so43", "sl3_sym3", "sl3_adjoint", "sl2_adjoint", "sl4_wedge2",
/// "so21_adjoint".
concrete_rep::RepSpec fixture_from_tag(const std::string& tag);

Result classify_rep(const RepQuery& q);
Result find_x0(const RepQuery& q, std::uint64_t seed,
               const std::optional<std::string>& check_vector);
Result check_criterion(const std::string& fixture_tag);
Result margulis_report(const std::string& fixture_tag,
                       const std::optional<std::string>& elements_path, int random_count,
                       std::uint64_t seed);
Result additivity(const std::string& fixture_tag, int trials, const std::vector<int>& powers,
                  std::uint64_t seed, const std::optional<std::string>& csv_path = std::nullopt);
Result build_group(const std::string& fixture_tag, int k, int power, double m_norm,
                   double s_threshold, std::uint64_t seed);
Result word_survey(const std::string& fixture_tag, int k, int power, double m_norm,
                   double s_threshold, int max_len, std::uint64_t seed,
                   const std::optional<std::string>& csv_path);

/// Renders a report as aligned human-readable text.
std::string render_text(const nlohmann::json& report);

}  // namespace margulis::commands

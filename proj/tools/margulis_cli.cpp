#include <CLI11.hpp>

#include <iostream>

#include "margulis/commands.hpp"

namespace {

using margulis::commands::RepQuery;
using margulis::commands::Result;

int emit(const Result& res, bool as_text) {
  if (as_text)
    std::cout << margulis::commands::render_text(res.report);
  else
    std::cout << res.report.dump(2) << "\n";
  return res.exit_code;
}

void add_rep_query_options(CLI::App* cmd, RepQuery& q, std::vector<std::string>& positionals) {
  cmd->add_option("spec", positionals, "family and rank as positionals, e.g. A 3");
  cmd->add_option("--family", q.family, "root system family: A, B, C, D, BC");
  cmd->add_option("--rank", q.rank, "restricted rank");
  cmd->add_option("--highest", [&q](const std::vector<std::string>& vals) {
    std::vector<long> coords;
    for (const auto& v : vals)
      for (std::size_t at = 0; at < v.size();) {
        const std::size_t comma = v.find(',', at);
        const std::string tok = v.substr(at, comma == std::string::npos ? v.npos : comma - at);
        coords.push_back(std::stol(tok));
        if (comma == std::string::npos) break;
        at = comma + 1;
      }
    q.highest = coords;
    return true;
  },
                  "highest weight in fundamental-weight coordinates, e.g. 5,0,1");
  cmd->add_option("--sym", q.sym, "Sym^k of the standard representation (family A)");
  cmd->add_option("--wedge", q.wedge, "Lambda^k of the standard representation (family A)");
  cmd->add_flag("--adjoint", q.adjoint, "adjoint representation");
}

void apply_positionals(RepQuery& q, const std::vector<std::string>& positionals) {
  if (positionals.size() >= 1) q.family = positionals[0];
  if (positionals.size() >= 2) q.rank = std::stoi(positionals[1]);
  if (positionals.size() > 2) throw CLI::ValidationError("spec", "expected at most: FAMILY RANK");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"restricted-weight combinatorics and affine Margulis-invariant dynamics"};
  app.require_subcommand(1);
  app.fallthrough();
  bool as_text = false;
  app.add_flag("--text", as_text, "human-readable output instead of JSON");
  app.add_flag("--json", [](std::int64_t) {}, "JSON output (default)");
  margulis::commands::Tolerances tol;
  app.add_option("--tol-rank", tol.svd_rank, "singular-value rank threshold");
  app.add_option("--tol-cluster", tol.cluster, "eigenvalue cluster tolerance");
  app.parse_complete_callback([&] { margulis::commands::set_tolerances(tol); });

  std::uint64_t seed = 1;
  std::string fixture = "so21";
  int result_code = 0;

  // classify-rep
  auto* classify = app.add_subcommand("classify-rep", "weight set, dimension, classification");
  RepQuery classify_q;
  std::vector<std::string> classify_pos;
  add_rep_query_options(classify, classify_q, classify_pos);
  classify->callback([&] {
    apply_positionals(classify_q, classify_pos);
    result_code = emit(margulis::commands::classify_rep(classify_q), as_text);
  });

  // find-x0
  auto* findx0 = app.add_subcommand("find-x0", "generically symmetric extreme X0 certificate");
  RepQuery x0_q;
  std::vector<std::string> x0_pos;
  std::string check_vec;
  add_rep_query_options(findx0, x0_q, x0_pos);
  findx0->add_option("--seed", seed, "search seed");
  findx0->add_option("--check", check_vec,
                     "validate this candidate vector (comma-separated rationals)");
  findx0->callback([&] {
    apply_positionals(x0_q, x0_pos);
    std::optional<std::string> check;
    if (!check_vec.empty()) check = check_vec;
    result_code = emit(margulis::commands::find_x0(x0_q, seed, check), as_text);
  });

  // check-criterion
  auto* crit = app.add_subcommand("check-criterion", "L-fixed vectors moved by w0");
  RepQuery crit_q;
  std::vector<std::string> crit_pos;
  std::string crit_fixture;
  add_rep_query_options(crit, crit_q, crit_pos);
  crit->add_option("--group", crit_fixture, "fixture tag, e.g. so21, sl3_sym3 (overrides spec)");
  crit->callback([&] {
    std::string tag = crit_fixture;
    if (tag.empty()) {
      apply_positionals(crit_q, crit_pos);
      if (crit_q.family != "A" && crit_q.family != "B")
        throw CLI::ValidationError("spec", "criterion fixtures cover families A and B");
      std::string head = crit_q.family == "A" ? "sl" + std::to_string(crit_q.rank + 1)
                                              : "so" + std::to_string(crit_q.rank + 1) +
                                                    std::to_string(crit_q.rank);
      std::string suffix = "standard";
      if (crit_q.adjoint) suffix = "adjoint";
      if (crit_q.sym >= 0) suffix = "sym" + std::to_string(crit_q.sym);
      if (crit_q.wedge >= 0) suffix = "wedge" + std::to_string(crit_q.wedge);
      tag = head + "_" + suffix;
    }
    result_code = emit(margulis::commands::check_criterion(tag), as_text);
  });

  // margulis
  auto* marg = app.add_subcommand("margulis", "Margulis data for affine elements");
  std::string elements_file;
  int count = 8;
  marg->add_option("--group", fixture, "fixture tag")->required();
  marg->add_option("--elements", elements_file, "JSON array of (d+1)^2 row-major floats");
  marg->add_option("--count", count, "number of random elements when no file is given");
  marg->add_option("--seed", seed, "element sampling seed");
  marg->callback([&] {
    std::optional<std::string> path;
    if (!elements_file.empty()) path = elements_file;
    result_code = emit(margulis::commands::margulis_report(fixture, path, count, seed), as_text);
  });

  // additivity
  auto* add = app.add_subcommand("additivity", "Margulis additivity and Jordan trapezoid rows");
  int trials = 4;
  std::vector<int> powers{4, 8, 16};
  std::string additivity_csv;
  add->add_option("--group", fixture, "fixture tag")->required();
  add->add_option("--trials", trials, "number of sampled pairs");
  add->add_option("--power", powers, "powers N to test");
  add->add_option("--seed", seed, "sampling seed");
  add->add_option("--csv", additivity_csv, "write per-trial rows to this CSV file");
  add->callback([&] {
    std::optional<std::string> csv;
    if (!additivity_csv.empty()) csv = additivity_csv;
    result_code =
        emit(margulis::commands::additivity(fixture, trials, powers, seed, csv), as_text);
  });

  // build-group
  auto* build = app.add_subcommand("build-group", "generator family with prescribed invariants");
  int k = 2, power = 8;
  double m_norm = 1.0, s_threshold = 0.12;
  build->add_option("--group", fixture, "fixture tag")->required();
  build->add_option("--k", k, "number of generators");
  build->add_option("--power", power, "power applied to the linear generators");
  build->add_option("--m-norm", m_norm, "norm of the prescribed invariant");
  build->add_option("--s-threshold", s_threshold, "contraction strength threshold");
  build->add_option("--seed", seed, "construction seed");
  build->callback([&] {
    result_code = emit(
        margulis::commands::build_group(fixture, k, power, m_norm, s_threshold, seed), as_text);
  });

  // word-survey
  auto* survey = app.add_subcommand("word-survey", "cyclically reduced word invariants");
  int max_len = 4;
  std::string csv_file;
  survey->add_option("--group", fixture, "fixture tag")->required();
  survey->add_option("--k", k, "number of generators");
  survey->add_option("--power", power, "power applied to the linear generators");
  survey->add_option("--m-norm", m_norm, "norm of the prescribed invariant");
  survey->add_option("--s-threshold", s_threshold, "contraction strength threshold");
  survey->add_option("--max-len", max_len, "maximum word length");
  survey->add_option("--seed", seed, "construction seed");
  survey->add_option("--csv", csv_file, "write per-word rows to this CSV file");
  survey->callback([&] {
    std::optional<std::string> csv;
    if (!csv_file.empty()) csv = csv_file;
    result_code = emit(margulis::commands::word_survey(fixture, k, power, m_norm, s_threshold,
                                                       max_len, seed, csv),
                       as_text);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return margulis::commands::kBadInput;
  } catch (const margulis::x0_select::TrivialRepresentationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return margulis::commands::kNotApplicable;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return result_code;
}

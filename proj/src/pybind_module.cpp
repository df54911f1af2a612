#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "margulis/commands.hpp"

namespace py = pybind11;

namespace {

using margulis::commands::RepQuery;

RepQuery make_query(const std::string& family, int rank, const std::vector<long>& highest,
                    int sym, int wedge, bool adjoint) {
  RepQuery q;
  q.family = family;
  q.rank = rank;
  if (!highest.empty()) q.highest = highest;
  q.sym = sym;
  q.wedge = wedge;
  q.adjoint = adjoint;
  return q;
}

py::dict to_py(const margulis::commands::Result& res) {
  py::dict out;
  out["exit_code"] = res.exit_code;
  py::object loads = py::module_::import("json").attr("loads");
  out["report"] = loads(res.report.dump());
  return out;
}

}  // namespace

PYBIND11_MODULE(margulis, m) {
  m.doc() = "restricted-weight combinatorics and affine Margulis-invariant dynamics";

  m.def(
      "classify_rep",
      [](const std::string& family, int rank, const std::vector<long>& highest, int sym,
         int wedge, bool adjoint) {
        return to_py(margulis::commands::classify_rep(
            make_query(family, rank, highest, sym, wedge, adjoint)));
      },
      py::arg("family"), py::arg("rank"), py::arg("highest") = std::vector<long>{},
      py::arg("sym") = -1, py::arg("wedge") = -1, py::arg("adjoint") = false);

  m.def(
      "find_x0",
      [](const std::string& family, int rank, const std::vector<long>& highest, int sym,
         int wedge, bool adjoint, std::uint64_t seed, const std::string& check) {
        std::optional<std::string> check_opt;
        if (!check.empty()) check_opt = check;
        return to_py(margulis::commands::find_x0(
            make_query(family, rank, highest, sym, wedge, adjoint), seed, check_opt));
      },
      py::arg("family"), py::arg("rank"), py::arg("highest") = std::vector<long>{},
      py::arg("sym") = -1, py::arg("wedge") = -1, py::arg("adjoint") = false,
      py::arg("seed") = 1, py::arg("check") = "");

  m.def(
      "check_criterion",
      [](const std::string& fixture) { return to_py(margulis::commands::check_criterion(fixture)); },
      py::arg("fixture"));

  m.def(
      "margulis_report",
      [](const std::string& fixture, int count, std::uint64_t seed) {
        return to_py(margulis::commands::margulis_report(fixture, std::nullopt, count, seed));
      },
      py::arg("fixture"), py::arg("count") = 8, py::arg("seed") = 1);

  m.def(
      "additivity",
      [](const std::string& fixture, int trials, const std::vector<int>& powers,
         std::uint64_t seed) {
        return to_py(margulis::commands::additivity(fixture, trials, powers, seed));
      },
      py::arg("fixture"), py::arg("trials") = 3, py::arg("powers") = std::vector<int>{4, 8, 16},
      py::arg("seed") = 1);

  m.def(
      "build_group",
      [](const std::string& fixture, int k, int power, double m_norm, double s_threshold,
         std::uint64_t seed) {
        return to_py(
            margulis::commands::build_group(fixture, k, power, m_norm, s_threshold, seed));
      },
      py::arg("fixture"), py::arg("k") = 2, py::arg("power") = 8, py::arg("m_norm") = 1.0,
      py::arg("s_threshold") = 1e-3, py::arg("seed") = 1);

  m.def(
      "word_survey",
      [](const std::string& fixture, int k, int power, double m_norm, double s_threshold,
         int max_len, std::uint64_t seed) {
        return to_py(margulis::commands::word_survey(fixture, k, power, m_norm, s_threshold,
                                                     max_len, seed, std::nullopt));
      },
      py::arg("fixture"), py::arg("k") = 2, py::arg("power") = 8, py::arg("m_norm") = 1.0,
      py::arg("s_threshold") = 1e-3, py::arg("max_len") = 4, py::arg("seed") = 1);

  m.def("weyl_order", [](const std::string& family, int rank) {
    const auto rs = margulis::root_system::build_root_system(family, rank);
    return margulis::root_system::weyl_group(rs).size();
  });
}

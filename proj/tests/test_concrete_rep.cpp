#include <doctest.h>

#include <random>

#include "margulis/concrete_rep.hpp"

using namespace margulis;
using namespace margulis::concrete_rep;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

RepSpec spec_of(GroupFamily g, int n, RepKind k, int degree = 1) {
  RepSpec s;
  s.group = g;
  s.n = n;
  s.kind = k;
  s.degree = degree;
  return s;
}

RatVec rv(std::initializer_list<long> xs) {
  RatVec v;
  for (long x : xs) v.emplace_back(x);
  return v;
}

}  // namespace

TEST_CASE("SL3 on Sym^3: dimension, zero weight line, w0 representative") {
  const auto rep = ConcreteRep::realize(spec_of(GroupFamily::SL, 3, RepKind::Sym, 3));
  CHECK(rep.dim_v() == 10);
  CHECK(rep.v0_basis().cols() == 1);

  // expected representative: rotation by pi in the (e1, e3) plane
  MatrixXd expected(3, 3);
  expected << 0, 0, -1, 0, 1, 0, 1, 0, 0;
  CHECK((rep.w0_std() - expected).norm() == doctest::Approx(0.0).epsilon(1e-14));

  // the zero weight space is the monomial e1 e2 e3
  const auto crit = check_criterion(rep);
  CHECK(crit.v0_dim == 1);
  CHECK(crit.vt0_dim == 1);
  CHECK(crit.moved_by_w0);
  // witness is supported on a single monomial coordinate
  int support = 0;
  for (int i = 0; i < rep.dim_v(); ++i)
    if (std::abs(crit.witness(i)) > 1e-9) ++support;
  CHECK(support == 1);
  CHECK(crit.witness_residual <= 1e-10);
  // and w0 sends the monomial to its negative (acts nontrivially)
  CHECK((rep.w0_rep() * crit.witness + crit.witness).norm() ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("adjoint of sl2") {
  const auto rep = ConcreteRep::realize(spec_of(GroupFamily::SL, 2, RepKind::Adjoint));
  CHECK(rep.dim_v() == 3);
  CHECK(rep.omega().weights.size() == 3);
  const auto diag = restricted_weight_diag(rep);
  CHECK(diag.size() == 3);
  for (const auto& [key, mult] : diag) CHECK(mult == 1);
}

TEST_CASE("weight diagnostics match the exact multiplicities") {
  SUBCASE("SL3 Sym^3: ten simple weights") {
    const auto rep = ConcreteRep::realize(spec_of(GroupFamily::SL, 3, RepKind::Sym, 3));
    const auto diag = restricted_weight_diag(rep);
    CHECK(diag.size() == 10);
    for (const auto& [key, mult] : diag) CHECK(mult == 1);
  }
  SUBCASE("so(3,2) adjoint: zero weight multiplicity equals the rank") {
    const auto rep = ConcreteRep::realize(spec_of(GroupFamily::SOpq, 2, RepKind::Adjoint));
    CHECK(rep.dim_v() == 10);
    CHECK(rep.weight_multiplicity(rv({0, 0})) == 2);
    const auto exact = rep_weights::multiplicities_split(
        rep.rs(), rep.omega().highest);
    for (const auto& [lam, basis] : rep.weight_decomp())
      CHECK(static_cast<long>(basis.cols()) == exact.multiplicity(lam));
  }
  SUBCASE("wedge^2 of R^4 under SL4: six weights e_i + e_j") {
    const auto rep = ConcreteRep::realize(spec_of(GroupFamily::SL, 4, RepKind::Wedge, 2));
    CHECK(rep.dim_v() == 6);
    const auto diag = restricted_weight_diag(rep);
    CHECK(diag.size() == 6);
  }
}

TEST_CASE("criterion across the fixture table") {
  // standard SO+(p+1,p) satisfies the criterion exactly for odd p
  CHECK(check_criterion(ConcreteRep::realize(spec_of(GroupFamily::SOpq, 1, RepKind::Standard)))
            .moved_by_w0);
  CHECK(check_criterion(ConcreteRep::realize(spec_of(GroupFamily::SOpq, 3, RepKind::Standard)))
            .moved_by_w0);
  CHECK_FALSE(
      check_criterion(ConcreteRep::realize(spec_of(GroupFamily::SOpq, 2, RepKind::Standard)))
          .moved_by_w0);
  // adjoint representations of noncompact fixtures always satisfy it
  for (auto spec : {spec_of(GroupFamily::SL, 2, RepKind::Adjoint),
                    spec_of(GroupFamily::SL, 3, RepKind::Adjoint),
                    spec_of(GroupFamily::SOpq, 1, RepKind::Adjoint),
                    spec_of(GroupFamily::SOpq, 2, RepKind::Adjoint)})
    CHECK(check_criterion(ConcreteRep::realize(spec)).moved_by_w0);
  // the trivial representation fails it
  const auto trivial = ConcreteRep::realize(spec_of(GroupFamily::SL, 3, RepKind::Sym, 0));
  CHECK(trivial.dim_v() == 1);
  CHECK_FALSE(check_criterion(trivial).moved_by_w0);
}

TEST_CASE("rho is a homomorphism sending K into the orthogonal group") {
  std::mt19937_64 rng(5);
  for (auto spec : {spec_of(GroupFamily::SL, 3, RepKind::Sym, 3),
                    spec_of(GroupFamily::SL, 4, RepKind::Wedge, 2),
                    spec_of(GroupFamily::SL, 3, RepKind::Adjoint),
                    spec_of(GroupFamily::SOpq, 2, RepKind::Standard),
                    spec_of(GroupFamily::SOpq, 2, RepKind::Adjoint)}) {
    const auto rep = ConcreteRep::realize(spec);
    const MatrixXd k1 = rep.random_compact(rng), k2 = rep.random_compact(rng);
    const MatrixXd r1 = rep.rho(k1);
    CHECK((r1.transpose() * r1 - MatrixXd::Identity(rep.dim_v(), rep.dim_v())).norm() <= 1e-10);
    CHECK((rep.rho(k1 * k2) - r1 * rep.rho(k2)).norm() <= 1e-10);
    CHECK(rep.in_group(k1));
    CHECK(rep.in_group(rep.w0_std()));
    for (const auto& m : rep.m_generators_std()) CHECK(rep.in_group(m));
  }
}

TEST_CASE("w0 conjugation twists the Cartan action by w0") {
  for (auto spec : {spec_of(GroupFamily::SL, 3, RepKind::Sym, 3),
                    spec_of(GroupFamily::SOpq, 2, RepKind::Standard)}) {
    const auto rep = ConcreteRep::realize(spec);
    const int dim = rep.rs().ambient_dim;
    // H with distinct small entries
    VectorXd coords = VectorXd::Zero(dim);
    for (int i = 0; i < dim; ++i) coords(i) = 0.25 * (i + 1);
    if (spec.group == GroupFamily::SL) coords.array() -= coords.mean();
    const MatrixXd h = rep.cartan_matrix_std(coords);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(h);
    const MatrixXd exph = es.eigenvectors() *
                          es.eigenvalues().array().exp().matrix().asDiagonal() *
                          es.eigenvectors().transpose();
    const MatrixXd conj = rep.rho(rep.w0_std() * exph * rep.w0_std().inverse());
    // w0 action on coordinates
    VectorXd w0coords = VectorXd::Zero(dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) w0coords(i) += rep.rs().w0[i][j].get_d() * coords(j);
    for (const auto& [lam, basis] : rep.weight_decomp()) {
      double lam_val = 0;
      for (int i = 0; i < dim; ++i) lam_val += lam[i].get_d() * w0coords(i);
      CHECK((conj * basis - std::exp(lam_val) * basis).norm() <= 1e-9 * conj.norm());
    }
  }
}

TEST_CASE("unsupported specs are rejected") {
  CHECK_THROWS_AS(ConcreteRep::realize(spec_of(GroupFamily::SOpq, 2, RepKind::Sym, 2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(ConcreteRep::realize(spec_of(GroupFamily::SL, 1, RepKind::Standard)),
                  std::invalid_argument);
  CHECK_THROWS_AS(ConcreteRep::realize(spec_of(GroupFamily::SL, 3, RepKind::Wedge, 5)),
                  std::invalid_argument);
}

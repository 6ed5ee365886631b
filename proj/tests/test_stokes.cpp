/* Copyright 2026 The qdg Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 * ========================================================================= */

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "qdg/stokes.hpp"

using namespace qdg;
using namespace qdg::stokes;
using bg::BGSystem;
using bg::PureBlock;

namespace {

PureBlock scalar_block(int mu, cd c) {
  CMat A(1, 1);
  A(0, 0) = c;
  return PureBlock::from_matrix(mu, A);
}

// ((1, u(z)), (0, c z^delta)) with u supported on [0, delta).
BGSystem two_slope(cd c, int delta, const std::vector<cd>& u) {
  BGSystem S;
  S.blocks = {scalar_block(0, 1.0), scalar_block(delta, c)};
  if (!u.empty()) {
    MatrixLP m(1, 1);
    m.at(0, 0) = LaurentPoly(0, u);
    S.U[{0, 1}] = m;
  }
  return S;
}

// diag(1, c1 z, c2 z^2) with given off-diagonal polynomials.
BGSystem three_slope(cd c1, cd c2, LaurentPoly u01, LaurentPoly u12, LaurentPoly u02) {
  BGSystem S;
  S.blocks = {scalar_block(0, 1.0), scalar_block(1, c1), scalar_block(2, c2)};
  auto put = [&](int i, int j, const LaurentPoly& p) {
    MatrixLP m(1, 1);
    m.at(0, 0) = p;
    S.U[{i, j}] = m;
  };
  put(0, 1, u01);
  put(1, 2, u12);
  put(0, 2, u02);
  return S;
}

const QContext& ctx() {
  static const QContext c = QContext::make(3.0 * std::exp(cd(0.0, 0.4)));
  return c;
}

}  // namespace

TEST_CASE("formal gauge examples") {
  auto q2 = QContext::make(2.0);
  BGSystem pure = two_slope(2.0, 1, {});
  auto F0 = formal_gauge(pure, 10, q2);
  for (int m = 0; m <= 10; ++m) CHECK((F0.coefficient(m) - (m == 0 ? CMat(CMat::Identity(2, 2)) : CMat(CMat::Zero(2, 2)))).norm() == 0.0);

  // ((1, 1), (0, z)): a_n = -q^{n(n-1)/2}.
  BGSystem euler = two_slope(1.0, 1, {1.0});
  auto F = formal_gauge(euler, 12, q2);
  for (int n = 0; n <= 12; ++n) {
    const double expect = -std::pow(2.0, 0.5 * n * (n - 1));
    CHECK(std::abs(F.coefficient(n)(0, 1) - cd(expect)) <= 1e-12 * std::abs(expect));
  }
  CHECK(F.residual(q2) < 1e-13);
  CHECK(std::abs(gevrey_level_fit(F.blocks.at({0, 1}), q2) - 1.0) < 1e-6);

  auto S3 = three_slope(cd(1.3, 0.2), cd(0.7, -1.1), LaurentPoly(0, {0.5}), LaurentPoly(1, {-0.8}),
                        LaurentPoly(0, {0.3, 0.9}));
  auto F3 = formal_gauge(S3, 14, ctx());
  CHECK(F3.residual(ctx()) < 1e-12);
  // With only the corner coupling the block grows at level two; lower-level couplings dominate otherwise.
  auto corner = three_slope(cd(1.3, 0.2), cd(0.7, -1.1), LaurentPoly(), LaurentPoly(), LaurentPoly(0, {0.3, 0.9}));
  auto Fc = formal_gauge(corner, 16, ctx());
  CHECK(std::abs(gevrey_level_fit(Fc.blocks.at({0, 2}), ctx()) - 2.0) < 0.1);
  CHECK(std::abs(gevrey_level_fit(F3.blocks.at({0, 2}), ctx()) - 1.0) < 0.1);
}

TEST_CASE("summation: pure systems, functional equation, poles, Stokes phenomenon") {
  BGSystem pure = two_slope(cd(1.4, 0.3), 2, {});
  auto Sp = sum_direction(pure, cd(1.1, 0.8), ctx());
  CHECK((Sp.eval(cd(0.6, 1.2), ctx()) - CMat::Identity(2, 2)).norm() == 0.0);

  BGSystem euler = two_slope(1.0, 1, {1.0});
  const cd lam1(1.3, 0.9), lam2(-0.7, 1.6);
  auto S1 = sum_direction(euler, lam1, ctx());
  auto rep = verify_summation(S1, ctx());
  CHECK(rep.residual < ctx().eps_num);
  CHECK(rep.max_pole_order < 1.2);
  CHECK(rep.max_pole_order > 0.8);
  CHECK(rep.ok);
  auto S2 = sum_direction(euler, lam2, ctx());
  CHECK(verify_summation(S2, ctx()).ok);
  const cd z(0.4, 1.7);
  CHECK(std::abs(S1.eval(z, ctx())(0, 1) - S2.eval(z, ctx())(0, 1)) > 1e-6);
  // Only the class of the direction matters.
  auto S1q = sum_direction(euler, lam1 * ctx().q, ctx());
  CHECK((S1q.eval(z, ctx()) - S1.eval(z, ctx())).norm() < 1e-10 * S1.eval(z, ctx()).norm());

  // Prohibited direction: lambda = 1/c mod q^Z with c = 1.
  CHECK_THROWS_AS(sum_direction(euler, ctx().q, ctx()), Error);
  CHECK(is_resonant(euler, 1.0, ctx()));

  auto S3 = three_slope(cd(1.3, 0.2), cd(0.7, -1.1), LaurentPoly(0, {0.5}), LaurentPoly(1, {-0.8}),
                        LaurentPoly(0, {0.3, 0.9}));
  auto G3 = sum_direction(S3, cd(0.3, 1.9), ctx());
  auto r3 = verify_summation(G3, ctx());
  CHECK(r3.residual < ctx().eps_num);
  CHECK(r3.max_pole_order < 2.2);
  CHECK(r3.ok);
}

TEST_CASE("Stokes operators") {
  auto S3 = three_slope(cd(1.3, 0.2), cd(0.7, -1.1), LaurentPoly(0, {0.5}), LaurentPoly(1, {-0.8}),
                        LaurentPoly(0, {0.3, 0.9}));
  const cd a(1.2, 0.5), c(0.3, 1.9), d(-1.6, 0.4), e(1.1, -1.7);
  CHECK((stokes_operator(S3, c, c, a, ctx()) - CMat::Identity(3, 3)).norm() < 1e-12);
  CMat Sce = stokes_operator(S3, c, e, a, ctx());
  CMat Scd = stokes_operator(S3, c, d, a, ctx());
  CMat Sde = stokes_operator(S3, d, e, a, ctx());
  CHECK((Sce - Scd * Sde).norm() < ctx().eps_num * Sce.norm());
  CMat N = Sce - CMat::Identity(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j <= i; ++j) CHECK(std::abs(N(i, j)) < 1e-12);
  CHECK(N.norm() > 1e-6);
  CHECK_THROWS_AS(stokes_operator(S3, c, d, -c, ctx()), Error);
}

TEST_CASE("alien residues") {
  const cd c(1.4, 0.3);
  BGSystem pure = two_slope(c, 1, {});
  const Frame fr = default_frame(pure, ctx());
  const cd alpha = 1.0 / c;
  CHECK(alien_residue(pure, alpha, fr, ctx()).value.norm() == 0.0);

  // Closed form against quadrature; linearity in u0.
  BGSystem A1 = two_slope(c, 1, {0.7});
  BGSystem A2 = two_slope(c, 1, {1.4});
  auto r1 = alien_residue(A1, alpha, fr, ctx(), ResidueMethod::ClosedForm).value;
  auto r1q = alien_residue(A1, alpha, fr, ctx(), ResidueMethod::Quadrature).value;
  CHECK(std::abs(r1(0, 1)) > 1e-8);
  CHECK((r1 - r1q).norm() < 1e-7 * std::max(1.0, r1.norm()));
  auto r2 = alien_residue(A2, alpha, fr, ctx()).value;
  CHECK((r2 - 2.0 * r1).norm() < 1e-12 * r2.norm());
  // Same class, different representative.
  auto r1b = alien_residue(A1, alpha * ctx().q, fr, ctx()).value;
  CHECK((r1b - r1).norm() < 1e-9 * r1.norm());

  // Away from the prohibited set the residue vanishes.
  for (cd beta : {cd(0.9, 1.3), cd(-1.2, 0.2), cd(2.0, -0.4)}) {
    CHECK(alien_residue(A1, beta, fr, ctx(), ResidueMethod::Quadrature).value.norm() < 1e-9);
    CHECK(alien_residue(A1, beta, fr, ctx(), ResidueMethod::ClosedForm).value.norm() == 0.0);
  }
  CHECK_THROWS_AS(alien_residue(A1, fr.c0, fr, ctx()), Error);

  // Components sit on the cell coordinates.
  auto av = alien_residue(A1, alpha, fr, ctx());
  REQUIRE(av.components.size() == 1);
  CHECK((av.components[0].second - av.value).norm() < 1e-15);
}

TEST_CASE("level difference") {
  const cd c(1.4, 0.3);
  BGSystem A = two_slope(c, 1, {0.7});
  BGSystem A2 = two_slope(c, 1, {-0.4});
  const Frame fr = default_frame(A, ctx());
  const cd alpha = 1.0 / c;
  auto same = level_difference(A, A, 1, alpha, fr, ctx());
  CHECK(same.lhs.norm() < 1e-12);
  CHECK(same.rhs.norm() < 1e-12);
  auto diff = level_difference(A, A2, 1, alpha, fr, ctx());
  CHECK(diff.lhs.norm() > 1e-6);
  CHECK(diff.discrepancy < 1e-7);
  // The difference equals the residue of the system whose coupling is u' - u.
  BGSystem D = two_slope(c, 1, {-1.1});
  CHECK((alien_residue(D, alpha, fr, ctx()).value - diff.lhs).norm() < 1e-7 * diff.lhs.norm());

  const cd c1(1.3, 0.2), c2(0.7, -1.1);
  auto B = three_slope(c1, c2, LaurentPoly(0, {0.5}), LaurentPoly(1, {-0.8}), LaurentPoly(0, {0.3, 0.9}));
  auto B2 = three_slope(c1, c2, LaurentPoly(0, {0.5}), LaurentPoly(1, {-0.8}), LaurentPoly(0, {-0.6, 0.2}));
  const Frame fb = default_frame(B, ctx());
  const cd alpha2 = std::sqrt(1.0 / c2);  // alpha^2 = d / e for the corner cell
  auto d3 = level_difference(B, B2, 2, alpha2, fb, ctx());
  CHECK(d3.lhs.norm() > 1e-6);
  CHECK(d3.discrepancy < 1e-7);
  auto B3 = three_slope(c1, c2, LaurentPoly(0, {0.1}), LaurentPoly(1, {-0.8}), LaurentPoly(0, {0.3, 0.9}));
  CHECK_THROWS_AS(level_difference(B, B3, 2, alpha2, fb, ctx()), Error);
}

TEST_CASE("residue maps") {
  const cd c(1.4, 0.3);
  BGSystem A1 = two_slope(c, 1, {});
  const Frame f1 = default_frame(A1, ctx());
  auto m1 = residue_map(A1, 1, f1, ctx());
  CHECK(m1.M.rows() == 1);
  CHECK(m1.M.cols() == 1);
  CHECK(m1.rank == 1);
  CHECK(std::abs(m1.M(0, 0)) > 1e-8);

  BGSystem A2 = two_slope(c, 2, {});
  const Frame f2 = default_frame(A2, ctx());
  auto m2 = residue_map(A2, 2, f2, ctx());
  CHECK(m2.M.rows() == 2);
  CHECK(m2.M.cols() == 2);
  CHECK(m2.rank == bg::dimV(A2, 2));
  for (cd p : m2.pointed[0]) CHECK(eq_distance(p * p * c, 1.0, ctx()) < 1e-12);

  // Matrix columns agree with direct residues (affine map).
  CVec x(2);
  x << cd(0.3, -0.2), cd(1.1, 0.5);
  BGSystem B = with_level_coefficients(A2, m2, x);
  CVec pred = m2.M * x + m2.offset;
  for (size_t k = 0; k < m2.rows.size(); ++k) {
    const auto& row = m2.rows[k];
    CMat R = alien_residue(B, m2.pointed[static_cast<size_t>(row.cell)][static_cast<size_t>(row.pointed)], f2, ctx()).value;
    CHECK(std::abs(R(row.row, row.col) - pred(static_cast<long>(k))) < 1e-9 * (1.0 + std::abs(pred(static_cast<long>(k)))));
  }

  // Repeated pointed points are rejected.
  const cd r0 = std::sqrt(1.0 / c);
  CHECK_THROWS_AS(residue_map(A2, 2, f2, ctx(), {{0, {r0, r0 * ctx().q}}}), Error);
  CHECK_THROWS_AS(residue_map(A2, 2, f2, ctx(), {{0, {r0, 2.0 * r0}}}), Error);
  // Every delta-subset of the candidates is checked by rank; report the count of full-rank ones.
  auto cand = root_candidates(1.0 / c, 2, ctx());
  REQUIRE(cand.size() == 4);
  int full = 0;
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = i + 1; j < 4; ++j) full += residue_map(A2, 2, f2, ctx(), {{0, {cand[i], cand[j]}}}).rank == 2;
  CHECK(full >= 1);
}

TEST_CASE("realize_class round trips") {
  const cd c(1.4, 0.3);
  BGSystem A1 = two_slope(c, 1, {});
  const Frame f1 = default_frame(A1, ctx());
  auto zero = realize_class(A1, {}, f1, ctx());
  for (const auto& [k, m] : zero.system.U)
    for (const auto& p : m.e) CHECK(p.normalized(1e-14).coeffs.empty());

  CMat rho = CMat::Zero(2, 2);
  rho(0, 1) = cd(0.8, -0.3);
  ClassTarget t{1, EqPoint::from_numeric(1.0 / c, ctx()), 0, rho};
  auto real = realize_class(A1, {t}, f1, ctx());
  CHECK(real.max_error < 1e-8);
  auto back = alien_residue(real.system, real.maps.at(1).pointed[0][0], f1, ctx());
  CHECK((back.value - rho).norm() < 1e-8);

  // Three slopes with targets at both levels.
  const cd c1(1.3, 0.2), c2(0.7, -1.1);
  auto A3 = three_slope(c1, c2, LaurentPoly(), LaurentPoly(), LaurentPoly());
  const Frame f3 = default_frame(A3, ctx());
  auto cells = bg::g_decompose(A3, ctx());
  std::vector<ClassTarget> targets;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const auto& cell : cells)
    for (int k = 0; k < cell.level; ++k) {
      CMat v = CMat::Zero(3, 3);
      for (const auto& e : cell.entries) v(e.row, e.col) = cd(u(rng), u(rng));
      targets.push_back({cell.level, cell.cls, k, v});
    }
  auto r3 = realize_class(A3, targets, f3, ctx());
  CHECK(r3.max_error < 1e-7);
  // Independent recheck of one level-two target.
  const auto& m2 = r3.maps.at(2);
  for (const auto& tg : targets) {
    if (tg.delta != 2) continue;
    CMat got = level_part(r3.system, alien_residue(r3.system, m2.pointed[0][static_cast<size_t>(tg.pointed)], f3, ctx()).value, 2);
    CHECK((got - tg.value).norm() < 1e-7);
  }

  // Off-cell targets are rejected.
  CMat bad = CMat::Zero(3, 3);
  bad(0, 2) = 1.0;
  CHECK_THROWS_AS(realize_class(A3, {{1, cells[0].cls, 0, bad}}, f3, ctx()), Error);
}

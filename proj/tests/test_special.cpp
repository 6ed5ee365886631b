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

#include "qdg/special.hpp"

using namespace qdg;
using namespace qdg::special;

namespace {

std::vector<QContext> contexts() {
  return {QContext::make(4.0), QContext::make(3.0 * std::exp(cd(0.0, kPi / 7.0))), QContext::make(cd(1.6, 0.7))};
}

cd random_point(std::mt19937_64& rng, const QContext& ctx) {
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::uniform_real_distribution<double> ph(-kPi, kPi);
  return std::exp(u(rng) * std::log(ctx.abs_q()) + cd(0.0, ph(rng)));
}

// Direct partial sum over |n| <= N with no reduction.
cd theta_partial(cd z, const QContext& ctx, int N) {
  cd s = 0.0;
  for (int n = -N; n <= N; ++n) s += std::exp(-0.5 * n * (n + 1.0) * ctx.log_q) * ipow(z, n);
  return s;
}

// Triple-product form of z theta'(z)/theta(z):
// theta(z) = (p;p)(-p z;p)(-1/z;p) with p = 1/q.
cd logderiv_product(cd z, const QContext& ctx) {
  const cd p = 1.0 / ctx.q;
  cd s = 0.0;
  cd pm = 1.0;  // p^m
  for (int m = 0; m < 200; ++m) {
    cd a = p * pm * z;
    cd b = pm / z;
    s += a / (1.0 + a) - b / (1.0 + b);
    pm *= p;
    if (std::abs(pm) < 1e-18) break;
  }
  return s;
}

}  // namespace

TEST_CASE("theta functional equation and prescribed zero") {
  std::mt19937_64 rng(1);
  for (const auto& ctx : contexts()) {
    for (int t = 0; t < 100; ++t) {
      cd z = random_point(rng, ctx);
      cd lhs = theta(ctx.q * z, ctx);
      cd rhs = z * theta(z, ctx);
      CHECK(std::abs(lhs - rhs) / std::abs(lhs) < ctx.eps_num);
    }
  }
  auto ctx4 = QContext::make(4.0);
  CHECK(std::abs(theta(-1.0, ctx4)) < 1e-8);
  CHECK(std::abs(theta(-ctx4.q * ctx4.q, ctx4)) < 1e-8);
  CHECK_THROWS_AS(theta(0.0, ctx4), Error);
}

TEST_CASE("theta(1) against a certified partial sum") {
  auto ctx = QContext::make(4.0);
  const int N = 12;
  // Tail bound |q|^{-N(N+1)/2} times a geometric factor.
  const double tail = 4.0 * std::pow(4.0, -0.5 * N * (N + 1.0));
  cd oracle = theta_partial(1.0, ctx, N);
  CHECK(std::abs(theta(1.0, ctx) - oracle) < tail + 1e-15);
}

TEST_CASE("theta zeros lie only on [-1;q]") {
  // Argument principle on a circle that avoids the spiral: no zeros inside the annulus
  // between |z| = 1.2 and 1.8 for q = 4 (the zero -1 sits on |z| = 1).
  auto ctx = QContext::make(4.0);
  auto winding = [&](double r) {
    const int M = 512;
    cd total = 0.0;
    for (int j = 0; j < M; ++j) {
      cd z = r * std::exp(cd(0.0, 2.0 * kPi * j / M));
      total += theta_logderiv(z, ctx);
    }
    return total / static_cast<double>(M);  // (1/2 pi i) oint theta'/theta dz
  };
  // Number of zeros in 1.2 < |z| < 1.8 is the difference of windings.
  CHECK(std::abs(winding(1.8) - winding(1.2)) < 1e-8);
  // Crossing |z| = 1 picks up the single zero at -1.
  CHECK(std::abs(winding(1.2) - winding(0.8) - 1.0) < 1e-8);
}

TEST_CASE("theta_c relations") {
  std::mt19937_64 rng(2);
  auto ctx = contexts()[1];
  for (int t = 0; t < 50; ++t) {
    cd z = random_point(rng, ctx);
    cd c = random_point(rng, ctx);
    CHECK(std::abs(theta_c(1.0, z, ctx) - theta(z, ctx)) < 1e-14 * std::abs(theta(z, ctx)));
    cd lhs = theta_c(c, ctx.q * z, ctx);
    cd rhs = (z / c) * theta_c(c, z, ctx);
    CHECK(std::abs(lhs - rhs) / std::abs(lhs) < ctx.eps_num);
    CHECK(std::abs(theta_c(c, -c, ctx)) < 1e-8 * (1.0 + std::abs(theta_c(c, ctx.q * c, ctx))));
  }
}

TEST_CASE("e_char relations") {
  std::mt19937_64 rng(3);
  for (const auto& ctx : contexts()) {
    for (int t = 0; t < 100; ++t) {
      cd z = random_point(rng, ctx);
      cd c = random_point(rng, ctx);
      CHECK(std::abs(e_char(1.0, z, ctx) - cd(1.0)) < ctx.eps_num);
      cd a = e_char(ctx.q * c, z, ctx), b = z * e_char(c, z, ctx);
      CHECK(std::abs(a - b) / std::abs(a) < ctx.eps_num);
      cd s = e_char(c, ctx.q * z, ctx), r = c * e_char(c, z, ctx);
      CHECK(std::abs(s - r) / std::abs(s) < ctx.eps_num);
    }
  }
  auto ctx = contexts()[0];
  CHECK_THROWS_AS(e_char(-1.0, 1.3, ctx), Error);
  CHECK_THROWS_AS(e_char(-ctx.q, 1.3, ctx), Error);
}

TEST_CASE("l_q relations and dual construction") {
  std::mt19937_64 rng(4);
  for (const auto& ctx : contexts()) {
    for (int t = 0; t < 100; ++t) {
      cd z = random_point(rng, ctx);
      cd l0 = l_q(z, ctx);
      CHECK(std::abs(l_q(ctx.q * z, ctx) - l0 - 1.0) < ctx.eps_num * (1.0 + std::abs(l0)));
      CHECK(std::abs(l_q(ctx.q * ctx.q * z, ctx) - l0 - 2.0) < ctx.eps_num * (1.0 + std::abs(l0)));
      CHECK(std::abs(l0 - logderiv_product(z, ctx)) < 1e-9 * (1.0 + std::abs(l0)));
    }
  }
  CHECK_THROWS_AS(l_q(-1.0, contexts()[0]), Error);
}

TEST_CASE("e_matrix") {
  auto ctx = contexts()[1];
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    cd z = random_point(rng, ctx);
    auto I = CharacterData::diagonal({1.0, 1.0});
    CHECK((e_matrix(I, z, ctx) - CMat::Identity(2, 2)).norm() < 1e-12);

    cd c1 = random_point(rng, ctx), c2 = random_point(rng, ctx);
    auto D = CharacterData::diagonal({c1, c2});
    CMat E = e_matrix(D, z, ctx);
    CHECK(std::abs(E(0, 0) - e_char(c1, z, ctx)) < 1e-12 * std::abs(E(0, 0)));
    CHECK(std::abs(E(1, 1) - e_char(c2, z, ctx)) < 1e-12 * std::abs(E(1, 1)));
    CHECK(std::abs(E(0, 1)) < 1e-15);

    // Jordan block c [[1, 1], [0, 1]].
    CharacterData J = CharacterData::diagonal({c1, c1});
    J.unipotent(0, 1) = 1.0;
    CMat C = J.matrix();
    CMat lhs = e_matrix(J, ctx.q * z, ctx);
    CMat rhs = C * e_matrix(J, z, ctx);
    CHECK((lhs - rhs).norm() / lhs.norm() < ctx.eps_num);
    CHECK(std::abs(e_matrix(J, z, ctx).determinant()) > 0.0);
  }
}

TEST_CASE("phi and Phi") {
  std::mt19937_64 rng(6);
  for (const auto& ctx : contexts()) {
    for (int t = 0; t < 50; ++t) {
      cd z = random_point(rng, ctx);
      cd c = random_point(rng, ctx), d = random_point(rng, ctx);
      CHECK(std::abs(phi(1.0, d, z, ctx) - cd(1.0)) < ctx.eps_num);
      cd p0 = phi(c, d, z, ctx), p1 = phi(c, d, ctx.q * z, ctx);
      CHECK(std::abs(p1 - p0) / std::abs(p0) < ctx.eps_num);

      auto C1 = CharacterData::diagonal({c, random_point(rng, ctx)});
      auto C2 = CharacterData::diagonal({d, random_point(rng, ctx)});
      CMat lhs = kron(e_matrix(C1, z, ctx), e_matrix(C2, z, ctx));
      CMat rhs = e_matrix(tensor(C1, C2), z, ctx) * Phi(C1, C2, z, ctx);
      CHECK((lhs - rhs).norm() / lhs.norm() < ctx.eps_num);
    }
  }
}

TEST_CASE("g_a and psi_a") {
  auto ctx = contexts()[1];
  std::mt19937_64 rng(7);
  for (int t = 0; t < 20; ++t) {
    cd a = random_point(rng, ctx);
    CHECK(g_a(a, ctx.q, ctx) == a);
    CHECK(g_a(a, 1.0, ctx) == cd(1.0));
    CHECK(std::abs(g_a(a, ctx.q * ctx.q, ctx) - a * a) < 1e-12 * std::abs(a * a));
    cd c = random_point(rng, ctx);
    CHECK(std::abs(psi_a(a, c, ctx) - e_char(c, a, ctx) / g_a(a, c, ctx)) < 1e-14 * std::abs(psi_a(a, c, ctx)));
  }
  // Branch crossing is reported.
  cd c1 = std::exp(cd(0.0, 2.5)), c2 = std::exp(cd(0.0, 2.5));
  CHECK_FALSE(g_a_multiplicative(c1, c2));
  CHECK_THROWS_AS(g_a_product(cd(2.0, 1.0), c1, c2, ctx), Error);
  cd d1 = std::exp(cd(0.1, 0.5)), d2 = std::exp(cd(-0.2, 0.7));
  CHECK(g_a_multiplicative(d1, d2));
  cd a = cd(2.0, 1.0);
  CHECK(std::abs(g_a_product(a, d1, d2, ctx) - g_a(a, d1, ctx) * g_a(a, d2, ctx)) < 1e-12);
}

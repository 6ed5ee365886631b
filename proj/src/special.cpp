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

#include "qdg/special.hpp"

#include <cmath>

namespace qdg::special {

namespace {

constexpr double kZeroTol = 1e-10;

// Reduce z = q^k w with |q|^{-1/2} <= |w| < |q|^{1/2}.
void reduce(cd z, const QContext& ctx, long long& k, cd& w) {
  const double lq = std::log(ctx.abs_q());
  k = std::llround(std::log(std::abs(z)) / lq);
  w = z * ipow(ctx.q, -k);
}

// Partial sums of theta and of w theta'(w) on the central annulus.
void central_sums(cd w, const QContext& ctx, cd& th, cd& dth, int& terms) {
  const double lq = std::log(ctx.abs_q());
  const double lw = std::log(std::abs(w));
  th = 1.0;  // n = 0 term
  dth = 0.0;
  int n = 1;
  for (;; ++n) {
    // Terms n and -n.
    cd tp = std::exp(-0.5 * n * (n + 1.0) * ctx.log_q + static_cast<double>(n) * std::log(w));
    cd tm = std::exp(-0.5 * n * (n - 1.0) * ctx.log_q - static_cast<double>(n) * std::log(w));
    th += tp + tm;
    dth += static_cast<double>(n) * (tp - tm);
    // Tail bound from the ratio test: next magnitudes decay geometrically.
    const double next_p = -0.5 * (n + 1.0) * (n + 2.0) * lq + (n + 1.0) * lw;
    const double next_m = -0.5 * (n + 1.0) * n * lq - (n + 1.0) * lw;
    const double bound = std::exp(std::max(next_p, next_m)) * 4.0 * (n + 2.0);
    if (n >= ctx.theta_terms && bound < 1e-3 * ctx.eps_num * std::max(std::abs(th), 1e-300)) break;
    if (n > 400) break;
  }
  terms = n;
}

}  // namespace

ThetaValue theta_eval(cd z, const QContext& ctx) {
  if (z == cd(0.0)) fail(ErrorKind::Domain, "theta: z = 0");
  long long k;
  cd w;
  reduce(z, ctx, k, w);
  cd th, dth;
  int terms;
  central_sums(w, ctx, th, dth, terms);
  // theta(q^k w) = q^{k(k-1)/2} w^k theta(w)
  cd pref = std::exp(0.5 * static_cast<double>(k) * static_cast<double>(k - 1) * ctx.log_q +
                     static_cast<double>(k) * std::log(w));
  return {pref * th, terms, k};
}

cd theta(cd z, const QContext& ctx) { return theta_eval(z, ctx).value; }

cd theta_logderiv(cd z, const QContext& ctx) {
  if (z == cd(0.0)) fail(ErrorKind::Domain, "theta_logderiv: z = 0");
  long long k;
  cd w;
  reduce(z, ctx, k, w);
  if (on_spiral(z, -1.0, ctx, kZeroTol)) fail(ErrorKind::Pole, "l_q: z lies on the spiral [-1;q]");
  cd th, dth;
  int terms;
  central_sums(w, ctx, th, dth, terms);
  return static_cast<double>(k) + dth / th;
}

cd theta_c(cd c, cd z, const QContext& ctx) {
  if (c == cd(0.0) || z == cd(0.0)) fail(ErrorKind::Domain, "theta_c: zero argument");
  return theta(z / c, ctx);
}

cd e_char(cd c, cd z, const QContext& ctx) {
  if (c == cd(0.0) || z == cd(0.0)) fail(ErrorKind::Domain, "e_char: zero argument");
  if (on_spiral(c, -1.0, ctx, kZeroTol))
    fail(ErrorKind::SingularCharacter, "e_char: character lies on the spiral [-1;q]");
  if (on_spiral(z, -1.0, ctx, kZeroTol)) fail(ErrorKind::Pole, "e_char: z is a pole");
  return theta(1.0, ctx) * theta(c * z, ctx) / (theta(c, ctx) * theta(z, ctx));
}

cd l_q(cd z, const QContext& ctx) { return theta_logderiv(z, ctx); }

CharacterData CharacterData::diagonal(const std::vector<cd>& eigen) {
  const long n = static_cast<long>(eigen.size());
  return {eigen, CMat::Identity(n, n), CMat::Identity(n, n)};
}

CMat CharacterData::semisimple() const {
  const long n = static_cast<long>(eigen.size());
  CMat D = CMat::Zero(n, n);
  for (long i = 0; i < n; ++i) D(i, i) = eigen[static_cast<size_t>(i)];
  return P * D * P.inverse();
}

CMat CharacterData::matrix() const { return semisimple() * unipotent; }

CharacterData tensor(const CharacterData& a, const CharacterData& b) {
  CharacterData t;
  for (cd x : a.eigen)
    for (cd y : b.eigen) t.eigen.push_back(x * y);
  t.P = kron(a.P, b.P);
  t.unipotent = kron(a.unipotent, b.unipotent);
  return t;
}

CMat e_matrix(const CharacterData& C, cd z, const QContext& ctx) {
  const long n = C.size();
  CMat D = CMat::Zero(n, n);
  for (long i = 0; i < n; ++i) D(i, i) = e_char(C.eigen[static_cast<size_t>(i)], z, ctx);
  CMat es = C.P * D * C.P.inverse();
  CMat logu = nilpotent_log(C.unipotent);
  if (logu.norm() == 0.0) return es;
  return es * nilpotent_exp(l_q(z, ctx) * logu);
}

cd phi(cd c, cd d, cd z, const QContext& ctx) {
  return e_char(c, z, ctx) * e_char(d, z, ctx) / e_char(c * d, z, ctx);
}

CMat Phi(const CharacterData& C1, const CharacterData& C2, cd z, const QContext& ctx) {
  const CMat P = kron(C1.P, C2.P);
  const long n = P.rows();
  CMat D = CMat::Zero(n, n);
  long idx = 0;
  for (cd c : C1.eigen)
    for (cd d : C2.eigen) {
      D(idx, idx) = phi(c, d, z, ctx);
      ++idx;
    }
  return P * D * P.inverse();
}

cd g_a(cd a, cd c, const QContext& ctx) {
  if (a == cd(0.0) || c == cd(0.0)) fail(ErrorKind::Domain, "g_a: zero argument");
  if (c == ctx.q) return a;
  if (c == cd(1.0)) return 1.0;
  return std::exp(std::log(a) * std::log(c) / ctx.log_q);
}

bool g_a_multiplicative(cd c1, cd c2) {
  cd lhs = std::log(c1 * c2);
  cd rhs = std::log(c1) + std::log(c2);
  return std::abs(lhs - rhs) < 1e-9;
}

cd g_a_product(cd a, cd c1, cd c2, const QContext& ctx) {
  if (!g_a_multiplicative(c1, c2))
    fail(ErrorKind::BranchCut, "g_a: the product crosses the principal branch cut");
  return g_a(a, c1 * c2, ctx);
}

cd psi_a(cd a, cd c, const QContext& ctx) { return e_char(c, a, ctx) / g_a(a, c, ctx); }

CMat Psi_a(cd a, const CharacterData& C, const QContext& ctx) {
  const long n = C.size();
  CMat D = CMat::Zero(n, n);
  for (long i = 0; i < n; ++i) D(i, i) = psi_a(a, C.eigen[static_cast<size_t>(i)], ctx);
  return C.P * D * C.P.inverse();
}

}  // namespace qdg::special

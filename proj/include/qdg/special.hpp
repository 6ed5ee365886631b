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

#pragma once

#include "qdg/core.hpp"

namespace qdg::special {

struct ThetaValue {
  cd value;
  int terms;  // partial sum over |n| <= terms after reduction to the central annulus
  long long shift;  // z = q^shift * w with w in the central annulus
};

// theta(z) = sum_n q^{-n(n+1)/2} z^n
ThetaValue theta_eval(cd z, const QContext& ctx);
cd theta(cd z, const QContext& ctx);
// z theta'(z) / theta(z)
cd theta_logderiv(cd z, const QContext& ctx);
cd theta_c(cd c, cd z, const QContext& ctx);

// e_c(z) = theta(1) theta(c z) / (theta(c) theta(z))
cd e_char(cd c, cd z, const QContext& ctx);
// l_q(z) = z theta'(z) / theta(z)
cd l_q(cd z, const QContext& ctx);

// Jordan data C = P diag(eigen) P^{-1} * unipotent, with the two factors commuting.
struct CharacterData {
  std::vector<cd> eigen;
  CMat P;
  CMat unipotent;

  static CharacterData diagonal(const std::vector<cd>& eigen);
  CMat semisimple() const;
  CMat matrix() const;
  int size() const { return static_cast<int>(eigen.size()); }
};

CharacterData tensor(const CharacterData& a, const CharacterData& b);

CMat e_matrix(const CharacterData& C, cd z, const QContext& ctx);

cd phi(cd c, cd d, cd z, const QContext& ctx);
CMat Phi(const CharacterData& C1, const CharacterData& C2, cd z, const QContext& ctx);

// g_a(c) = exp(log a log c / log q), principal logarithms.
cd g_a(cd a, cd c, const QContext& ctx);
// True when Log(c1 c2) = Log c1 + Log c2, i.e. g_a is multiplicative on the pair.
bool g_a_multiplicative(cd c1, cd c2);
// g_a(c1 c2) = g_a(c1) g_a(c2); throws BranchCut when the pair crosses the cut.
cd g_a_product(cd a, cd c1, cd c2, const QContext& ctx);

cd psi_a(cd a, cd c, const QContext& ctx);
CMat Psi_a(cd a, const CharacterData& C, const QContext& ctx);

}  // namespace qdg::special

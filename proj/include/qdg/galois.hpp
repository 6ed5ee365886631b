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

#include <functional>

#include "qdg/lie.hpp"
#include "qdg/stokes.hpp"

namespace qdg::galois {

using IMat = std::vector<std::vector<long long>>;  // row-major integer matrix

// Nonzero diagonal entries of the Smith normal form, d1 | d2 | ...
std::vector<long long> smith_invariants(IMat m);
// Z-basis of the integer kernel, one vector per entry.
std::vector<std::vector<long long>> integer_kernel(const IMat& m);

// Lattice generator carrying the slope coordinate in pure and wild descriptors.
inline const std::string kSlopeGen = "@theta";

struct EqSubgroup {
  std::vector<long long> invariant_factors;  // each >= 2, divisibility ordered
  int rank = 0;
  long long denom = 1;  // torsion coordinates are scaled by this
  std::vector<std::string> lattice_names;
  IMat generator_matrix;  // rows: zeta * denom, qexp * denom, lattice...; one column per class

  long long p1() const { return invariant_factors.empty() ? 1 : invariant_factors[0]; }
  long long p2() const { return invariant_factors.size() < 2 ? 1 : invariant_factors[1]; }
};

EqSubgroup subgroup_of_Eq(const std::vector<EqPointSym>& classes);

struct GaloisDescriptor {
  int n = 0;
  long long p1 = 1, p2 = 1;
  int torus_dim = 0;
  std::vector<int> theta_exponents;  // empty when every slope is zero
  int unipotent_dim = 0;
  std::vector<EqPointSym> diag_weights;
  std::vector<CMat> lie_basis;
  int wild_dim = 0;  // block strictly upper part of lie_basis

  int lie_dim() const { return static_cast<int>(lie_basis.size()); }
};

// Comparison on the normal form: finite part, torus, unipotent and Lie dimensions.
bool same_type(const GaloisDescriptor& a, const GaloisDescriptor& b);

GaloisDescriptor fuchsian_group(const CMat& A, const std::vector<std::optional<EqPointSym>>& tags);
GaloisDescriptor pure_group(const bg::BGSystem& A0);
// `at` overrides the evaluation point of the default frame.
GaloisDescriptor wild_local_group(const bg::BGSystem& A, const QContext& ctx, std::optional<cd> at = std::nullopt);

// Rational system with constant limits at 0 and infinity.
struct RationalSystem {
  std::function<CMat(cd)> A;
  CMat A0;    // A(0)
  CMat Ainf;  // A(infinity)
};

struct ConnectionSample {
  cd z;
  CMat X0, Xinf, P;
  double residual0 = 0.0, residual_inf = 0.0;  // |X(qz) - A(z) X(z)| / |X(qz)|
  double ellipticity = 0.0;                      // |P(qz) - P(z)| / |P(z)|
};

// X0 = F0 e_{A(0)}, Xinf = Finf e_{A(inf)}; F0, Finf from ordered products.
CMat solution_at_zero(const RationalSystem& S, cd z, const QContext& ctx, int terms = 200);
CMat solution_at_infinity(const RationalSystem& S, cd z, const QContext& ctx, int terms = 200);
std::vector<ConnectionSample> connection_matrix(const RationalSystem& S, const std::vector<cd>& grid, const QContext& ctx,
                                               int terms = 200);
// Psi_a(A(inf))^{-1} P(a) Psi_a(A(0)).
CMat twisted_connection(const RationalSystem& S, cd a, const QContext& ctx, int terms = 200);

// Lie-level approximation of the group generated by both locals and the sampled twisted values.
GaloisDescriptor global_group(const GaloisDescriptor& local0, const GaloisDescriptor& localinf,
                              const std::vector<CMat>& pcheck_samples = {});

// Principal logarithm through the Schur form.
CMat matrix_log(const CMat& m);

}  // namespace qdg::galois

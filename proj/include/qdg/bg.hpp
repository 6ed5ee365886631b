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

#include <map>
#include <utility>

#include "qdg/core.hpp"
#include "qdg/special.hpp"

namespace qdg::bg {

// z^mu A with A = diag(eigen) * unipotent, upper triangular, the two factors commuting.
struct PureBlock {
  int mu = 0;
  std::vector<cd> eigen;
  std::vector<std::optional<EqPointSym>> sym;  // same length as eigen
  CMat unipotent;

  // Splits an upper-triangular constant matrix into its Jordan factors.
  static PureBlock from_matrix(int mu, const CMat& A, std::vector<std::optional<EqPointSym>> sym = {});
  int rank() const { return static_cast<int>(eigen.size()); }
  CMat semisimple() const;
  CMat matrix() const;
  bool all_symbolic() const;
  special::CharacterData characters() const;
};

struct BGSystem {
  std::vector<PureBlock> blocks;
  std::map<std::pair<int, int>, MatrixLP> U;  // 0-based block indices i < j
  std::map<std::string, cd> lattice_values;  // optional numeric values of lattice generators

  int rank() const;
  int num_blocks() const { return static_cast<int>(blocks.size()); }
  // First coordinate of block i; offset(num_blocks()) == rank().
  int offset(int i) const;
  int block_of(int coord) const;
  int slope_of(int coord) const { return blocks[static_cast<size_t>(block_of(coord))].mu; }
  const MatrixLP* off_diagonal(int i, int j) const;
  bool is_pure() const;

  // Throws Precondition when the Birkhoff-Guenther conditions fail.
  void validate() const;
  MatrixLP assemble() const;
  CMat assemble_at(cd z) const;
};

struct NewtonData {
  std::vector<int> slopes;
  std::vector<int> mults;
};

NewtonData newton(const BGSystem& A);

// Newton polygon of a scalar operator sum_i a_i sigma^i: lower convex hull of (i, v(a_i)).
// Only integral slopes are reported; a fractional edge raises Domain.
NewtonData scalar_newton(const std::vector<LaurentPoly>& a);

BGSystem gr(const BGSystem& A);

// Reads a full matrix in Birkhoff-Guenther form back into blocks.
BGSystem parse_assembled(const MatrixLP& M, double tol = 1e-12);

// Prohibited directions: classes c with c^delta = d / e mod q^Z for d in Sp(A_i), e in Sp(A_j), i < j.
// With require_exact set, every eigenvalue must carry a symbolic tag.
std::vector<EqPoint> sigma_set(const BGSystem& A0, const QContext& ctx, bool require_exact = false);

struct CellEntry {
  int bi = 0, bj = 0;    // block pair
  int row = 0, col = 0;  // global coordinate
  cd d, e;               // eigenvalues on row and column
};

struct GradedCell {
  int level = 0;  // mu_j - mu_i
  EqPoint cls;    // class of d / e
  std::vector<CellEntry> entries;
  int dim() const { return static_cast<int>(entries.size()); }
};

std::vector<GradedCell> g_decompose(const BGSystem& A0, const QContext& ctx);

int dimV(const BGSystem& A0, int delta);

BGSystem tensor(const BGSystem& A, const BGSystem& B);

}  // namespace qdg::bg

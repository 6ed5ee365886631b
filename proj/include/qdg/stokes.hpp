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

#include "qdg/bg.hpp"

namespace qdg::stokes {

// Matrix-valued Laurent series with coefficients on [lo, lo + size).
struct MatSeries {
  int rows = 0, cols = 0;
  int lo = 0;
  std::vector<CMat> c;

  static MatSeries zero(int rows, int cols, int lo, int hi);
  static MatSeries identity(int n);
  static MatSeries from_poly(const MatrixLP& m);
  // Scalar series times the identity of size n.
  static MatSeries scalar(const std::vector<cd>& coeffs, int lo, int n);

  int hi() const { return lo + static_cast<int>(c.size()) - 1; }
  bool empty() const { return c.empty(); }
  CMat coeff(int n) const;
  CMat eval(cd z) const;
  double max_norm() const;
};

// Product truncated to exponents [lo, hi].
MatSeries mul(const MatSeries& a, const MatSeries& b, int lo, int hi);
MatSeries add(const MatSeries& a, const MatSeries& b);
MatSeries shift(const MatSeries& a, int k);  // multiply by z^k

// Coefficients of theta(z / lambda) on [-N, N].
std::vector<cd> theta_window(cd lambda, int N, const QContext& ctx);

using BlockKey = std::pair<int, int>;

// Formal power-series gauge F with F[A0] = A, blocks above the diagonal, identity on it.
struct FormalGauge {
  bg::BGSystem base;
  int order = 0;
  std::map<BlockKey, MatSeries> blocks;

  // Full n x n coefficient of z^m (identity contributes at m = 0).
  CMat coefficient(int m) const;
  // Largest relative residual of (sigma_q F) A0 = A F over the retained coefficients.
  double residual(const QContext& ctx) const;
};

FormalGauge formal_gauge(const bg::BGSystem& A, int order, const QContext& ctx);

// Fits log|a_k| ~ a + b k + k^2 log|q| / (2 s) and returns s, the empirical q-Gevrey level.
double gevrey_level_fit(const MatSeries& s, const QContext& ctx);

// True when lambda^delta = d / e mod q^Z for some eigenvalue pair, within resonance_eps.
bool is_resonant(const bg::BGSystem& A, cd lambda, const QContext& ctx);

// Sum of F in the direction lambda: block (i, j) equals G_ij(z) / theta(z / lambda)^delta.
struct SummedGauge {
  cd lambda;
  bg::BGSystem base;
  std::map<BlockKey, MatSeries> G;
  std::map<BlockKey, int> level;

  CMat eval(cd z, const QContext& ctx) const;
  // Same evaluation restricted to blocks of the given level (other off-diagonal blocks zero).
  CMat eval_level(cd z, int delta, const QContext& ctx) const;
};

SummedGauge sum_direction(const bg::BGSystem& A, cd lambda, const QContext& ctx);

struct SummationReport {
  double residual = 0.0;        // max relative residual of F(qz) A0(z) = A(z) F(z) on the grid
  double max_pole_order = 0.0;  // estimated order at sampled spiral points
  bool ok = false;
};

SummationReport verify_summation(const SummedGauge& S, const QContext& ctx);

// (S_c F)^{-1} S_d F evaluated at a.
CMat stokes_operator(const bg::BGSystem& A, cd c, cd d, cd a, const QContext& ctx);

// Base direction c0 and evaluation point a kept away from the prohibited set and the pole spirals.
struct Frame {
  cd c0;
  cd a;
};

Frame default_frame(const bg::BGSystem& A, const QContext& ctx);

enum class ResidueMethod { Auto, ClosedForm, Quadrature };

struct AlienValue {
  cd alpha;
  CMat value;
  std::vector<std::pair<bg::GradedCell, CMat>> components;
};

// Residue at beta = alpha of beta -> log S_{c0, beta} F(a), in the local parameter beta / alpha - 1.
AlienValue alien_residue(const bg::BGSystem& A, cd alpha, const Frame& frame, const QContext& ctx,
                         ResidueMethod method = ResidueMethod::Auto);

// Circle quadrature of the residue of f at alpha in the parameter s = beta / alpha - 1.
CMat residue_quadrature(const std::function<CMat(cd)>& f, cd alpha, double radius = 1e-3, int points = 64);

// Projection of a full matrix onto the coordinates of blocks at the given level.
CMat level_part(const bg::BGSystem& A, const CMat& m, int delta);

struct LevelDifference {
  CMat lhs;  // residue difference of the two systems at level delta
  CMat rhs;  // residue of the level-delta part of S F_{A'} (S F_A)^{-1}
  double discrepancy = 0.0;
};

LevelDifference level_difference(const bg::BGSystem& A, const bg::BGSystem& A2, int delta, cd alpha,
                                 const Frame& frame, const QContext& ctx);

// Candidate points alpha with alpha^delta = cls mod q^Z.
std::vector<cd> root_candidates(cd cls, int delta, const QContext& ctx);
// r0 q^{k / delta}, k = 0 .. delta - 1, r0 the principal root.
std::vector<cd> default_pointed(cd cls, int delta, const QContext& ctx);

struct Unknown {
  int bi = 0, bj = 0;    // block pair at the level
  int row = 0, col = 0;  // position inside the block
  int exponent = 0;      // power of z in U_{bi, bj}
};

struct ResidueRow {
  int cell = 0;     // index into ResidueMap::cells
  int pointed = 0;  // index into ResidueMap::pointed[cell]
  int row = 0, col = 0;  // global coordinate
};

// Affine map from level-delta coefficients of U to the stacked level-delta residues at the pointed points.
struct ResidueMap {
  int delta = 0;
  std::vector<bg::GradedCell> cells;
  std::vector<std::vector<cd>> pointed;
  std::vector<Unknown> unknowns;
  std::vector<ResidueRow> rows;
  CMat M;
  CVec offset;  // residues with all level-delta coefficients at zero
  int rank = 0;
  std::vector<int> cell_rank;
};

// Overrides map a cell index to its pointed points; otherwise the default choice is used, with
// fallback enumeration over the delta^2 candidates when it is rank deficient.
ResidueMap residue_map(const bg::BGSystem& A, int delta, const Frame& frame, const QContext& ctx,
                       const std::map<int, std::vector<cd>>& overrides = {});

// Sets the level-delta coefficients of U from an unknown vector.
bg::BGSystem with_level_coefficients(const bg::BGSystem& A, const ResidueMap& map, const CVec& x);

struct ClassTarget {
  int delta = 0;
  EqPoint cls;
  int pointed = 0;
  CMat value;  // full n x n, supported on the cell coordinates
};

struct Realization {
  bg::BGSystem system;
  std::map<int, ResidueMap> maps;
  double max_error = 0.0;  // max deviation of recomputed residues from the targets
};

Realization realize_class(const bg::BGSystem& A0, const std::vector<ClassTarget>& targets, const Frame& frame,
                          const QContext& ctx);

}  // namespace qdg::stokes

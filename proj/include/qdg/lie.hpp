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

#include "qdg/bg.hpp"

namespace qdg::lie {

// Generator of the free Lie algebra: nu, or an alien generator of degree (delta, cls) with index 1..delta.
struct GenLabel {
  bool is_nu = false;
  int delta = 0;
  EqPoint cls;
  int index = 0;

  static GenLabel nu();
  static GenLabel alien(int delta, const EqPoint& cls, int index);
  std::string to_string() const;
};

struct Multidegree {
  int delta = 0;
  EqPoint cls;  // product of the generator classes
};

// Lie element in basis coordinates.
using Sparse = std::map<int, long long>;

struct FreeLieTrunc {
  std::vector<GenLabel> gens;
  int depth = 0;
  std::vector<std::vector<int>> words;  // Lyndon words over generator indices
  std::vector<int> left, right;          // standard factorization (basis indices), -1 for letters
  std::vector<Multidegree> degree;
  std::map<std::pair<int, int>, Sparse> table;  // [b_i, b_j] for length(i) + length(j) <= depth

  int size() const { return static_cast<int>(words.size()); }
  int length(int i) const { return static_cast<int>(words[static_cast<size_t>(i)].size()); }
  std::vector<int> dims_per_length() const;
  Sparse bracket(const Sparse& x, const Sparse& y) const;
  int index_of(const std::vector<int>& word) const;
};

FreeLieTrunc hall_basis(const std::vector<GenLabel>& gens, int depth, const QContext& ctx);

// Witt's necklace count of Lie words of length d on g letters.
long long witt_dimension(int g, int d);

// Graded dimensions of L / L^n (lengths 1 .. n - 1).
std::vector<int> lcs_quotient(const FreeLieTrunc& L, int n);

// Zeroes every generator outside J; returns the image of x.
Sparse project_generators(const FreeLieTrunc& L, const std::vector<bool>& keep, const Sparse& x);

// Smallest bracket-closed subspace containing the inputs, as an orthonormal basis.
std::vector<CMat> lie_closure(const std::vector<CMat>& mats, double tol = 1e-9);
// Orthonormal basis of the span (no closure).
std::vector<CMat> span_basis(const std::vector<CMat>& mats, double tol = 1e-9);

struct WildRep {
  bg::BGSystem A0;
  FreeLieTrunc trunc;
  std::vector<CMat> assign;  // per generator
  std::vector<CMat> images;  // per basis element
};

// nu is bound to log U automatically when it is among the generators without an assignment.
WildRep build_rep(const bg::BGSystem& A0, const std::vector<GenLabel>& gens, const std::map<int, CMat>& assign,
                  const QContext& ctx, int depth = -1);

std::vector<CMat> rep_image(const WildRep& rep);

// Finite character table of E_q = mu x mu_q x L.
struct Character {
  long long m_zeta = 0;  // e^{2 pi i s} -> e^{2 pi i m_zeta s}
  long long m_q = 0;     // class of q^s -> e^{2 pi i m_q s}
  std::map<std::string, cd> lattice;

  cd operator()(const EqPointSym& c) const;
};

// diag(t^{-mu} gamma(x_a)) over the coordinates of A0 (symbolic tags required).
CMat diagonal_action(const bg::BGSystem& A0, cd t, const Character& gamma);

// Max over basis words of |Ad_D(rep(w)) - t^delta gamma(c) rep(w)|, relative.
double equivariance_defect(const WildRep& rep, cd t, const Character& gamma);

}  // namespace qdg::lie

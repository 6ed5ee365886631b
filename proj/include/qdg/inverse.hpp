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

#include "qdg/galois.hpp"

namespace qdg::theta_inverse {

struct RootSpace {
  std::vector<long long> weight;  // in Z^mu
  std::vector<CMat> basis;        // strictly upper, supported where w_i - w_j = weight
};

// Triangular group given by matrix data: diagonal torus t -> diag(t^{w_a}), root spaces, invariant nilpotent part.
struct TriangGroupData {
  int n = 0;
  std::vector<std::vector<long long>> torus_weights;  // one weight vector per diagonal coordinate
  std::vector<long long> finite;                     // invariant factors of G / G^0 (1s ignored)
  std::vector<RootSpace> roots;
  std::optional<CMat> u0;
  bool component_action_trivial = true;
  // Optional per-coordinate torsion classes realizing the finite part.
  std::vector<EqPointSym> torsion;

  int mu() const { return torus_weights.empty() ? 0 : static_cast<int>(torus_weights.front().size()); }
  void validate() const;
  // Lie algebra of G^0: torus directions, u0 and root spaces, closed under brackets.
  std::vector<CMat> lie_algebra() const;
  std::vector<CMat> torus_directions() const;
};

// Weight-space decomposition of the strictly upper part of a Lie algebra under the diagonal torus.
struct RootDecomposition {
  std::vector<RootSpace> roots;
  std::vector<CMat> invariant;  // weight zero part
};
RootDecomposition roots_of(const std::vector<std::vector<long long>>& torus_weights, const std::vector<CMat>& lie_basis);

using Coweight = std::vector<long long>;

long long pairing(const std::vector<long long>& xi, const Coweight& p);

// p with <xi, p> < 0 for every root; NoThetaStructure when the open cone is empty.
Coweight find_theta_coweight(const std::vector<std::vector<long long>>& roots, int mu);
// Exact feasibility of {y : <xi, y> <= -1} by Fourier-Motzkin elimination, with a rational witness.
std::optional<std::vector<Rational>> theta_cone_point(const std::vector<std::vector<long long>>& roots, int mu);

// m * chi with dim g_xi <= -<xi, m chi> for all roots.
Coweight make_dominant(const Coweight& chi, const std::vector<RootSpace>& roots);

struct GoodSystemReport {
  bool ok = false;
  bool independent = false;
  std::vector<std::vector<double>> coefficients;  // per root, over the subset
  std::optional<Coweight> cross_check;
};
GoodSystemReport check_good_system(const std::vector<std::vector<long long>>& roots, const std::vector<int>& subset);

struct Condition {
  std::string name;
  bool pass = false;
  std::string detail;
};
struct NecessaryReport {
  std::vector<Condition> conditions;  // (i) .. (vi)
  bool all_pass() const;
  const Condition& at(const std::string& name) const;
};
NecessaryReport check_necessary(const TriangGroupData& G);

// The descriptor a realization of G must reproduce.
galois::GaloisDescriptor expected_descriptor(const TriangGroupData& G);

// Deterministic numeric values for generated lattice generators.
std::map<std::string, cd> default_lattice_values(const std::vector<std::string>& names);

struct AbelianData {
  std::vector<EqPointSym> weights;
  CMat N;  // nilpotent, commuting with the weight pattern; may be empty
  std::map<std::string, cd> lattice_values;
};

struct RegularSingular {
  CMat A;
  std::vector<std::optional<EqPointSym>> tags;
};
RegularSingular realize_regular_singular(const AbelianData& d, const QContext& ctx);

// chi gives the slope of each coordinate; coordinates must already be ordered by slope.
bg::BGSystem realize_pure(const AbelianData& d, const std::vector<int>& chi, const QContext& ctx);

struct LocalRealization {
  bg::BGSystem system;
  std::vector<int> perm;  // system coordinate k is input coordinate perm[k]
  Coweight chi;
  std::vector<int> slopes;  // per input coordinate
  galois::GaloisDescriptor descriptor;
  galois::GaloisDescriptor expected;
  double residue_error = 0.0;
  bool verified = false;
};
LocalRealization realize_local(const TriangGroupData& G, const QContext& ctx);

struct GlobalRealization {
  LocalRealization at0, atinf;  // atinf in reversed coordinates
  galois::GaloisDescriptor local0, localinf, global;
};
// Reductive group: torus weights plus positive (strictly upper) and negative (strictly lower) root spaces.
GlobalRealization realize_global_reductive(const TriangGroupData& Gplus, const std::vector<RootSpace>& negative,
                                           const QContext& ctx);

}  // namespace qdg::theta_inverse

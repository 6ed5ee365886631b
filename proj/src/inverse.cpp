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

#include "qdg/inverse.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace qdg::theta_inverse {

namespace {

using galois::GaloisDescriptor;

bool strictly_upper(const CMat& m) {
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j <= i && j < m.cols(); ++j)
      if (m(i, j) != cd(0.0)) return false;
  return true;
}

std::vector<long long> weight_diff(const std::vector<long long>& a, const std::vector<long long>& b) {
  std::vector<long long> d(a.size());
  for (size_t k = 0; k < a.size(); ++k) d[k] = a[k] - b[k];
  return d;
}

bool is_zero(const std::vector<long long>& v) {
  return std::all_of(v.begin(), v.end(), [](long long x) { return x == 0; });
}

std::string vec_str(const std::vector<long long>& v) {
  std::string s = "(";
  for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + ")";
}

// Component of x orthogonal to the span of an orthonormal basis.
double residual_norm(const CMat& x, const std::vector<CMat>& basis) {
  CMat r = x;
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& b : basis) r -= (b.conjugate().cwiseProduct(r)).sum() * b;
  return r.norm();
}

std::vector<CMat> brackets(const std::vector<CMat>& a, const std::vector<CMat>& b) {
  std::vector<CMat> out;
  for (const auto& x : a)
    for (const auto& y : b) out.push_back(x * y - y * x);
  return out;
}

CMat permuted(const CMat& x, const std::vector<int>& perm) {
  const long n = static_cast<long>(perm.size());
  CMat y(n, n);
  for (long k = 0; k < n; ++k)
    for (long l = 0; l < n; ++l) y(k, l) = x(perm[static_cast<size_t>(k)], perm[static_cast<size_t>(l)]);
  return y;
}

CMat unpermuted(const CMat& y, const std::vector<int>& perm) {
  const long n = static_cast<long>(perm.size());
  CMat x(n, n);
  for (long k = 0; k < n; ++k)
    for (long l = 0; l < n; ++l) x(perm[static_cast<size_t>(k)], perm[static_cast<size_t>(l)]) = y(k, l);
  return x;
}

}  // namespace

void TriangGroupData::validate() const {
  if (n <= 0 || static_cast<int>(torus_weights.size()) != n)
    fail(ErrorKind::Precondition, "group data: one torus weight vector per diagonal coordinate is required");
  for (const auto& w : torus_weights)
    if (static_cast<int>(w.size()) != mu()) fail(ErrorKind::Precondition, "group data: torus weights have unequal lengths");
  if (!torsion.empty() && static_cast<int>(torsion.size()) != n)
    fail(ErrorKind::Precondition, "group data: torsion classes must be given per coordinate");
  for (const auto& r : roots) {
    if (static_cast<int>(r.weight.size()) != mu()) fail(ErrorKind::Precondition, "group data: root weight has the wrong length");
    if (is_zero(r.weight)) fail(ErrorKind::Precondition, "group data: root weights must be nonzero");
    if (r.basis.empty()) fail(ErrorKind::Precondition, "group data: empty root space " + vec_str(r.weight));
    for (const auto& m : r.basis) {
      if (m.rows() != n || m.cols() != n || !strictly_upper(m))
        fail(ErrorKind::Precondition, "group data: root space " + vec_str(r.weight) + " is not strictly upper triangular");
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (m(i, j) != cd(0.0) && weight_diff(torus_weights[static_cast<size_t>(i)], torus_weights[static_cast<size_t>(j)]) != r.weight)
            fail(ErrorKind::Precondition, "group data: root space " + vec_str(r.weight) + " leaves its weight space");
    }
    if (static_cast<int>(lie::span_basis(r.basis).size()) != static_cast<int>(r.basis.size()))
      fail(ErrorKind::Precondition, "group data: root space basis " + vec_str(r.weight) + " is dependent");
  }
  for (size_t a = 0; a < roots.size(); ++a)
    for (size_t b = a + 1; b < roots.size(); ++b)
      if (roots[a].weight == roots[b].weight) fail(ErrorKind::Precondition, "group data: repeated root " + vec_str(roots[a].weight));
  if (u0) {
    if (u0->rows() != n || u0->cols() != n || !strictly_upper(*u0))
      fail(ErrorKind::Precondition, "group data: u0 must be strictly upper triangular");
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if ((*u0)(i, j) != cd(0.0) && torus_weights[static_cast<size_t>(i)] != torus_weights[static_cast<size_t>(j)])
          fail(ErrorKind::Precondition, "group data: u0 must commute with the torus");
  }
}

std::vector<CMat> TriangGroupData::torus_directions() const {
  std::vector<CMat> out;
  for (int k = 0; k < mu(); ++k) {
    CMat D = CMat::Zero(n, n);
    for (int a = 0; a < n; ++a) D(a, a) = static_cast<double>(torus_weights[static_cast<size_t>(a)][static_cast<size_t>(k)]);
    out.push_back(D);
  }
  return lie::span_basis(out);
}

std::vector<CMat> TriangGroupData::lie_algebra() const {
  std::vector<CMat> gens = torus_directions();
  if (u0 && u0->norm() > 0.0) gens.push_back(*u0);
  for (const auto& r : roots)
    for (const auto& m : r.basis) gens.push_back(m);
  return lie::lie_closure(gens);
}

RootDecomposition roots_of(const std::vector<std::vector<long long>>& w, const std::vector<CMat>& lie_basis) {
  RootDecomposition out;
  const int n = static_cast<int>(w.size());
  std::map<std::vector<long long>, std::vector<CMat>> parts;
  for (const auto& x : lie_basis) {
    if (x.rows() != n || x.cols() != n) fail(ErrorKind::Precondition, "roots_of: size mismatch");
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j)
        if (std::abs(x(i, j)) > 1e-12) fail(ErrorKind::Precondition, "roots_of: the torus must be diagonal and the algebra upper triangular");
    std::map<std::vector<long long>, CMat> proj;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        if (std::abs(x(i, j)) <= 1e-12) continue;
        auto key = weight_diff(w[static_cast<size_t>(i)], w[static_cast<size_t>(j)]);
        auto it = proj.try_emplace(key, CMat::Zero(n, n)).first;
        it->second(i, j) = x(i, j);
      }
    for (auto& [k, m] : proj) parts[k].push_back(m);
  }
  for (auto& [k, mats] : parts) {
    auto basis = lie::span_basis(mats);
    if (is_zero(k))
      out.invariant = basis;
    else
      out.roots.push_back({k, basis});
  }
  return out;
}

long long pairing(const std::vector<long long>& xi, const Coweight& p) {
  long long s = 0;
  for (size_t k = 0; k < xi.size(); ++k) s += xi[k] * p[k];
  return s;
}

namespace {

bool is_theta(const std::vector<std::vector<long long>>& roots, const Coweight& p) {
  return std::all_of(roots.begin(), roots.end(), [&](const auto& xi) { return pairing(xi, p) < 0; });
}

struct Ineq {
  std::vector<Rational> a;  // a . y <= b
  Rational b;
};

std::vector<Ineq> eliminate(const std::vector<Ineq>& sys, size_t k) {
  std::vector<Ineq> pos, neg, out;
  for (const auto& c : sys) {
    if (c.a[k].is_zero())
      out.push_back(c);
    else if (Rational(0) < c.a[k])
      pos.push_back(c);
    else
      neg.push_back(c);
  }
  for (const auto& P : pos)
    for (const auto& N : neg) {
      const Rational fp = Rational(1) / P.a[k], fn = Rational(1) / (-N.a[k]);
      Ineq c{std::vector<Rational>(P.a.size()), P.b * fp + N.b * fn};
      for (size_t i = 0; i < c.a.size(); ++i) c.a[i] = P.a[i] * fp + N.a[i] * fn;
      c.a[k] = Rational(0);
      out.push_back(c);
    }
  // Drop duplicates to contain the quadratic growth.
  std::vector<Ineq> uniq;
  for (const auto& c : out) {
    bool dup = false;
    for (const auto& u : uniq)
      if (u.a == c.a && u.b == c.b) dup = true;
    if (!dup) uniq.push_back(c);
  }
  return uniq;
}

}  // namespace

std::optional<std::vector<Rational>> theta_cone_point(const std::vector<std::vector<long long>>& roots, int mu) {
  if (mu == 0) {
    if (roots.empty()) return std::vector<Rational>{};
    return std::nullopt;
  }
  std::vector<std::vector<Ineq>> stage(static_cast<size_t>(mu));
  for (const auto& xi : roots) {
    Ineq c{std::vector<Rational>(static_cast<size_t>(mu)), Rational(-1)};
    for (int k = 0; k < mu; ++k) c.a[static_cast<size_t>(k)] = Rational(xi[static_cast<size_t>(k)]);
    stage.back().push_back(c);
  }
  for (int k = mu - 1; k >= 1; --k) stage[static_cast<size_t>(k - 1)] = eliminate(stage[static_cast<size_t>(k)], static_cast<size_t>(k));
  for (const auto& c : eliminate(stage[0], 0))
    if (c.b < Rational(0)) return std::nullopt;
  std::vector<Rational> y(static_cast<size_t>(mu), Rational(0));
  for (int k = 0; k < mu; ++k) {
    std::optional<Rational> lo, hi;
    for (const auto& c : stage[static_cast<size_t>(k)]) {
      const Rational ak = c.a[static_cast<size_t>(k)];
      if (ak.is_zero()) continue;
      Rational rest = c.b;
      for (int i = 0; i < k; ++i) rest = rest - c.a[static_cast<size_t>(i)] * y[static_cast<size_t>(i)];
      const Rational bound = rest / ak;
      if (Rational(0) < ak) {
        if (!hi || bound < *hi) hi = bound;
      } else if (!lo || *lo < bound) {
        lo = bound;
      }
    }
    if (lo && hi)
      y[static_cast<size_t>(k)] = (*lo + *hi) / Rational(2);
    else if (hi)
      y[static_cast<size_t>(k)] = *hi - Rational(1);
    else if (lo)
      y[static_cast<size_t>(k)] = *lo + Rational(1);
  }
  return y;
}

Coweight find_theta_coweight(const std::vector<std::vector<long long>>& roots, int mu) {
  for (const auto& xi : roots) {
    if (static_cast<int>(xi.size()) != mu) fail(ErrorKind::Precondition, "find_theta_coweight: root length mismatch");
    if (is_zero(xi)) fail(ErrorKind::NoThetaStructure, "a zero root admits no negative pairing");
  }
  if (roots.empty()) return Coweight(static_cast<size_t>(mu), 0);
  // Shells of increasing sup-norm, lexicographic inside a shell.
  for (int r = 1; r <= 8; ++r) {
    Coweight p(static_cast<size_t>(mu), -r);
    for (;;) {
      const bool on_shell = std::any_of(p.begin(), p.end(), [&](long long x) { return std::llabs(x) == r; });
      if (on_shell && is_theta(roots, p)) return p;
      int k = mu - 1;
      while (k >= 0 && p[static_cast<size_t>(k)] == r) p[static_cast<size_t>(k--)] = -r;
      if (k < 0) break;
      ++p[static_cast<size_t>(k)];
    }
  }
  // Least squares point of <xi, y> = -1, rounded at increasing scales.
  const long m = static_cast<long>(roots.size());
  Eigen::MatrixXd R(m, mu);
  for (long i = 0; i < m; ++i)
    for (int k = 0; k < mu; ++k) R(i, k) = static_cast<double>(roots[static_cast<size_t>(i)][static_cast<size_t>(k)]);
  const Eigen::VectorXd y = R.colPivHouseholderQr().solve(-Eigen::VectorXd::Ones(m));
  if ((R * y).maxCoeff() < 0.0)
    for (double K = 1.0; K <= 1e6; K *= 2.0) {
      Coweight p(static_cast<size_t>(mu));
      for (int k = 0; k < mu; ++k) p[static_cast<size_t>(k)] = std::llround(K * y(k));
      if (is_theta(roots, p)) return p;
    }
  // Exact decision.
  const auto pt = theta_cone_point(roots, mu);
  if (!pt) fail(ErrorKind::NoThetaStructure, "the cone {y : <xi, y> < 0 for all roots} is empty");
  long long den = 1;
  for (const auto& x : *pt) den = std::lcm(den, x.r);
  Coweight p(static_cast<size_t>(mu));
  for (int k = 0; k < mu; ++k) p[static_cast<size_t>(k)] = (*pt)[static_cast<size_t>(k)].p * (den / (*pt)[static_cast<size_t>(k)].r);
  if (!is_theta(roots, p)) fail(ErrorKind::Domain, "find_theta_coweight: cleared cone point fails verification");
  return p;
}

Coweight make_dominant(const Coweight& chi, const std::vector<RootSpace>& roots) {
  long long m = 1;
  for (const auto& r : roots) {
    const long long pr = pairing(r.weight, chi);
    if (pr >= 0) fail(ErrorKind::Precondition, "make_dominant: not a theta coweight at root " + vec_str(r.weight));
    const long long d = static_cast<long long>(r.basis.size());
    m = std::max(m, (d + (-pr) - 1) / (-pr));
  }
  Coweight out = chi;
  for (auto& x : out) x *= m;
  return out;
}

GoodSystemReport check_good_system(const std::vector<std::vector<long long>>& roots, const std::vector<int>& subset) {
  GoodSystemReport rep;
  if (roots.empty()) return rep;
  const long mu = static_cast<long>(roots.front().size());
  const long s = static_cast<long>(subset.size());
  Eigen::MatrixXd B(mu, s);
  for (long j = 0; j < s; ++j) {
    const int idx = subset[static_cast<size_t>(j)];
    if (idx < 0 || idx >= static_cast<int>(roots.size())) fail(ErrorKind::Precondition, "check_good_system: subset index out of range");
    for (long k = 0; k < mu; ++k) B(k, j) = static_cast<double>(roots[static_cast<size_t>(idx)][static_cast<size_t>(k)]);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
  rep.independent = s > 0 && lu.rank() == s;
  if (!rep.independent) return rep;
  rep.ok = true;
  for (const auto& xi : roots) {
    Eigen::VectorXd v(mu);
    for (long k = 0; k < mu; ++k) v(k) = static_cast<double>(xi[static_cast<size_t>(k)]);
    const Eigen::VectorXd a = B.colPivHouseholderQr().solve(v);
    rep.coefficients.emplace_back(a.data(), a.data() + a.size());
    if ((B * a - v).norm() > 1e-9 * (1.0 + v.norm()) || a.minCoeff() < -1e-12) rep.ok = false;
  }
  if (rep.ok) rep.cross_check = find_theta_coweight(roots, static_cast<int>(mu));
  return rep;
}

bool NecessaryReport::all_pass() const {
  return std::all_of(conditions.begin(), conditions.end(), [](const Condition& c) { return c.pass; });
}

const Condition& NecessaryReport::at(const std::string& name) const {
  for (const auto& c : conditions)
    if (c.name == name) return c;
  fail(ErrorKind::Domain, "no condition named " + name);
}

NecessaryReport check_necessary(const TriangGroupData& G) {
  NecessaryReport rep;
  G.validate();
  rep.conditions.push_back({"i", true, "upper triangular by construction"});

  const auto g = G.lie_algebra();
  std::vector<CMat> Lgens = G.torus_directions();
  for (const auto& r : G.roots)
    for (const auto& m : r.basis) Lgens.push_back(m);
  const auto L = lie::lie_closure(Lgens);
  std::vector<CMat> nil;
  for (const auto& x : g) {
    CMat u = x;
    for (int i = 0; i < G.n; ++i) u(i, i) = 0.0;
    nil.push_back(u);
  }
  nil = lie::span_basis(nil);

  bool abelian = true;
  for (const auto& b : brackets(g, g))
    if (residual_norm(b, L) > 1e-8) abelian = false;
  const int dimV = static_cast<int>(g.size()) - static_cast<int>(L.size());
  std::vector<long long> fin;
  for (long long f : G.finite)
    if (f > 1) fin.push_back(f);
  const int gens = std::max(static_cast<int>(fin.size()), dimV);

  rep.conditions.push_back({"ii", abelian && gens <= 2,
                            "G/L(G): " + std::string(abelian ? "abelian" : "not abelian") + ", " + std::to_string(gens) +
                                " topological generators"});
  rep.conditions.push_back({"iii", fin.size() <= 2, std::to_string(fin.size()) + " invariant factors in G/G^0"});
  rep.conditions.push_back({"iv", dimV <= 1, "unipotent dimension of G/L(G) = " + std::to_string(dimV)});
  const int dimRu = static_cast<int>(nil.size());
  const int dimComm = static_cast<int>(lie::span_basis(brackets(g, nil)).size());
  rep.conditions.push_back({"v", dimRu - dimComm <= 1 && G.component_action_trivial,
                            "dim R_u/(G^0, R_u) = " + std::to_string(dimRu - dimComm) +
                                (G.component_action_trivial ? "" : ", nontrivial component action")});
  std::vector<std::vector<long long>> ws;
  for (const auto& r : G.roots) ws.push_back(r.weight);
  try {
    const auto p = find_theta_coweight(ws, G.mu());
    rep.conditions.push_back({"vi", true, "theta coweight " + vec_str(p)});
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoThetaStructure) throw;
    rep.conditions.push_back({"vi", false, e.what()});
  }
  return rep;
}

GaloisDescriptor expected_descriptor(const TriangGroupData& G) {
  G.validate();
  GaloisDescriptor d;
  d.n = G.n;
  std::vector<long long> fin;
  for (long long f : G.finite)
    if (f > 1) fin.push_back(f);
  std::sort(fin.begin(), fin.end());
  if (!fin.empty()) d.p1 = fin[0];
  if (fin.size() > 1) d.p2 = fin[1];
  d.torus_dim = static_cast<int>(G.torus_directions().size());
  d.unipotent_dim = G.u0 && G.u0->norm() > 0.0 ? 1 : 0;
  d.lie_basis = G.lie_algebra();
  d.wild_dim = d.lie_dim() - d.torus_dim - d.unipotent_dim;
  return d;
}

std::map<std::string, cd> default_lattice_values(const std::vector<std::string>& names) {
  std::map<std::string, cd> v;
  for (size_t k = 0; k < names.size(); ++k) {
    const double kk = static_cast<double>(k);
    const double r = 1.13 + 0.29 * std::fmod(kk * 0.618, 1.0);
    v[names[k]] = std::polar(r, 0.71 + 1.37 * kk);
  }
  return v;
}

RegularSingular realize_regular_singular(const AbelianData& d, const QContext& ctx) {
  const int n = static_cast<int>(d.weights.size());
  if (n == 0) fail(ErrorKind::Precondition, "realize_regular_singular: no coordinates");
  const auto H = galois::subgroup_of_Eq(d.weights);  // Domain when more than two factors
  (void)H;
  CMat N = d.N.size() ? d.N : CMat(CMat::Zero(n, n));
  if (N.rows() != n || N.cols() != n || !strictly_upper(N))
    fail(ErrorKind::Precondition, "realize_regular_singular: N must be strictly upper triangular");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (N(i, j) != cd(0.0) && d.weights[static_cast<size_t>(i)] != d.weights[static_cast<size_t>(j)])
        fail(ErrorKind::Precondition, "realize_regular_singular: N does not commute with the weight pattern");
  auto values = d.lattice_values;
  std::vector<std::string> missing;
  for (const auto& w : d.weights)
    for (const auto& [g, e] : w.lattice)
      if (!values.count(g)) missing.push_back(g);
  std::sort(missing.begin(), missing.end());
  missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
  for (const auto& [g, v] : default_lattice_values(missing)) values[g] = v;
  RegularSingular out;
  CMat S = CMat::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    S(a, a) = d.weights[static_cast<size_t>(a)].numeric(ctx, values);
    out.tags.push_back(d.weights[static_cast<size_t>(a)]);
  }
  out.A = S * nilpotent_exp(N);
  return out;
}

bg::BGSystem realize_pure(const AbelianData& d, const std::vector<int>& chi, const QContext& ctx) {
  const int n = static_cast<int>(d.weights.size());
  if (static_cast<int>(chi.size()) != n) fail(ErrorKind::Precondition, "realize_pure: one slope per coordinate");
  if (!std::is_sorted(chi.begin(), chi.end())) fail(ErrorKind::Precondition, "realize_pure: coordinates must be ordered by slope");
  // The coweight must lie in the torus spanned by the lattice exponents.
  std::set<std::string> names;
  for (const auto& w : d.weights)
    for (const auto& [g, e] : w.lattice) names.insert(g);
  Eigen::MatrixXd rows(static_cast<long>(names.size()) + 1, n);
  long r = 0;
  for (const auto& g : names) {
    for (int a = 0; a < n; ++a) {
      auto it = d.weights[static_cast<size_t>(a)].lattice.find(g);
      rows(r, a) = it == d.weights[static_cast<size_t>(a)].lattice.end() ? 0.0 : static_cast<double>(it->second);
    }
    ++r;
  }
  for (int a = 0; a < n; ++a) rows(r, a) = chi[static_cast<size_t>(a)];
  const long rank_with = Eigen::FullPivLU<Eigen::MatrixXd>(rows).rank();
  const long rank_without = r == 0 ? 0 : Eigen::FullPivLU<Eigen::MatrixXd>(rows.topRows(r)).rank();
  if (rank_with != rank_without) fail(ErrorKind::Precondition, "realize_pure: coweight image is not in the torus");

  const auto rs = realize_regular_singular(d, ctx);
  CMat N = d.N.size() ? d.N : CMat(CMat::Zero(n, n));
  bg::BGSystem S;
  for (int a = 0; a < n;) {
    int b = a;
    while (b < n && chi[static_cast<size_t>(b)] == chi[static_cast<size_t>(a)]) ++b;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (N(i, j) != cd(0.0) && ((i >= a && i < b) != (j >= a && j < b)))
          fail(ErrorKind::Precondition, "realize_pure: N mixes slopes");
    std::vector<std::optional<EqPointSym>> tags(rs.tags.begin() + a, rs.tags.begin() + b);
    S.blocks.push_back(bg::PureBlock::from_matrix(chi[static_cast<size_t>(a)], rs.A.block(a, a, b - a, b - a), tags));
    a = b;
  }
  auto values = d.lattice_values;
  std::vector<std::string> missing;
  for (const auto& g : names)
    if (!values.count(g)) missing.push_back(g);
  for (const auto& [g, v] : default_lattice_values(missing)) values[g] = v;
  S.lattice_values = values;
  S.validate();
  return S;
}

LocalRealization realize_local(const TriangGroupData& G, const QContext& ctx) {
  auto stage = [](const std::string& s, const Error& e) {
    return Error(e.kind(), "realize_local [" + s + "]: " + e.what());
  };
  LocalRealization out;
  NecessaryReport nec;
  try {
    nec = check_necessary(G);
  } catch (const Error& e) {
    throw stage("necessary conditions", e);
  }
  if (!nec.all_pass()) {
    std::string bad;
    for (const auto& c : nec.conditions)
      if (!c.pass) bad += " (" + c.name + ") " + c.detail + ";";
    fail(nec.at("vi").pass ? ErrorKind::Precondition : ErrorKind::NoThetaStructure,
         "realize_local [necessary conditions]: failed" + bad);
  }
  std::vector<long long> fin;
  for (long long f : G.finite)
    if (f > 1) fin.push_back(f);
  if (!fin.empty() && G.torsion.empty())
    fail(ErrorKind::Precondition, "realize_local [fuchsian part]: a nontrivial finite part needs per-coordinate torsion classes");

  // (1) dominant theta coweight
  std::vector<std::vector<long long>> ws;
  for (const auto& r : G.roots) ws.push_back(r.weight);
  try {
    out.chi = make_dominant(find_theta_coweight(ws, G.mu()), G.roots);
  } catch (const Error& e) {
    throw stage("theta coweight", e);
  }
  const int n = G.n;
  for (int a = 0; a < n; ++a) out.slopes.push_back(static_cast<int>(pairing(G.torus_weights[static_cast<size_t>(a)], out.chi)));
  out.perm.resize(static_cast<size_t>(n));
  std::iota(out.perm.begin(), out.perm.end(), 0);
  std::stable_sort(out.perm.begin(), out.perm.end(),
                   [&](int x, int y) { return out.slopes[static_cast<size_t>(x)] < out.slopes[static_cast<size_t>(y)]; });

  // (2) fuchsian weights: one independent lattice generator per torus coordinate
  std::vector<std::string> names;
  for (int k = 0; k < G.mu(); ++k) names.push_back("t" + std::to_string(k + 1));
  AbelianData ad;
  ad.lattice_values = default_lattice_values(names);
  std::vector<int> chi_sorted;
  for (int k = 0; k < n; ++k) {
    const int a = out.perm[static_cast<size_t>(k)];
    EqPointSym x = G.torsion.empty() ? EqPointSym::identity() : G.torsion[static_cast<size_t>(a)];
    for (int t = 0; t < G.mu(); ++t)
      x = x + EqPointSym::generator(names[static_cast<size_t>(t)], G.torus_weights[static_cast<size_t>(a)][static_cast<size_t>(t)]);
    ad.weights.push_back(x);
    chi_sorted.push_back(out.slopes[static_cast<size_t>(a)]);
  }
  if (G.u0 && G.u0->norm() > 0.0) ad.N = permuted(*G.u0, out.perm);
  bg::BGSystem A0;
  try {
    A0 = realize_pure(ad, chi_sorted, ctx);
  } catch (const Error& e) {
    throw stage("pure part", e);
  }

  // (3) root spaces to pointed alien generators
  std::vector<stokes::ClassTarget> targets;
  for (const auto& r : G.roots) {
    const int delta = static_cast<int>(-pairing(r.weight, out.chi));
    for (size_t i = 0; i < r.basis.size(); ++i) {
      const CMat v = permuted(r.basis[i], out.perm);
      // class of the first supported entry
      int ri = -1, ci = -1;
      for (int x = 0; x < n && ri < 0; ++x)
        for (int y = 0; y < n; ++y)
          if (v(x, y) != cd(0.0)) {
            ri = x;
            ci = y;
            break;
          }
      const EqPointSym sym = ad.weights[static_cast<size_t>(ri)] - ad.weights[static_cast<size_t>(ci)];
      const EqPoint cls = EqPoint::from_both(sym.numeric(ctx, A0.lattice_values), sym, ctx);
      targets.push_back({delta, cls, static_cast<int>(i), v});
    }
  }

  // (4) concrete system
  try {
    const auto frame = stokes::default_frame(A0, ctx);
    auto R = stokes::realize_class(A0, targets, frame, ctx);
    out.system = R.system;
    out.system.lattice_values = A0.lattice_values;
    out.residue_error = R.max_error;
  } catch (const Error& e) {
    throw stage("alien realization", e);
  }

  // (5) verification, in input coordinates
  try {
    out.descriptor = galois::wild_local_group(out.system, ctx);
  } catch (const Error& e) {
    throw stage("verification", e);
  }
  for (auto& m : out.descriptor.lie_basis) m = unpermuted(m, out.perm);
  out.expected = expected_descriptor(G);
  out.verified = galois::same_type(out.descriptor, out.expected);
  if (out.verified) {
    // same Lie algebra, not only the same dimension
    for (const auto& m : out.descriptor.lie_basis)
      if (residual_norm(m, out.expected.lie_basis) > 1e-6) out.verified = false;
  }
  if (!out.verified)
    fail(ErrorKind::Domain, "realize_local [verification]: realized descriptor differs from the group data (lie dim " +
                                std::to_string(out.descriptor.lie_dim()) + " vs " + std::to_string(out.expected.lie_dim()) + ")");
  return out;
}

GlobalRealization realize_global_reductive(const TriangGroupData& Gplus, const std::vector<RootSpace>& negative,
                                           const QContext& ctx) {
  Gplus.validate();
  const int n = Gplus.n;
  std::vector<int> rev(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) rev[static_cast<size_t>(k)] = n - 1 - k;
  TriangGroupData Gminus;
  Gminus.n = n;
  Gminus.finite = Gplus.finite;
  for (int k = 0; k < n; ++k) Gminus.torus_weights.push_back(Gplus.torus_weights[static_cast<size_t>(n - 1 - k)]);
  if (!Gplus.torsion.empty())
    for (int k = 0; k < n; ++k) Gminus.torsion.push_back(Gplus.torsion[static_cast<size_t>(n - 1 - k)]);
  for (const auto& r : negative) {
    RootSpace s{r.weight, {}};
    for (const auto& m : r.basis) {
      if (m.rows() != n || !strictly_upper(m.transpose()))
        fail(ErrorKind::Precondition, "realize_global_reductive: negative root spaces must be strictly lower triangular");
      s.basis.push_back(permuted(m, rev));
    }
    Gminus.roots.push_back(s);
  }
  try {
    Gminus.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Precondition, std::string("realize_global_reductive: opposite Borel does not share the torus: ") + e.what());
  }
  GlobalRealization out;
  out.at0 = realize_local(Gplus, ctx);
  out.atinf = realize_local(Gminus, ctx);
  out.local0 = out.at0.descriptor;
  out.localinf = out.atinf.descriptor;
  for (auto& m : out.localinf.lie_basis) m = unpermuted(m, rev);
  // Trivial connection: the global group is generated by the two locals.
  out.global = galois::global_group(out.local0, out.localinf);
  return out;
}

}  // namespace qdg::theta_inverse

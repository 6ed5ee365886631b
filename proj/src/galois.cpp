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

#include "qdg/galois.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <numeric>
#include <set>

namespace qdg::galois {

namespace {

using Vec = std::vector<long long>;

long long lcm_ll(long long a, long long b) { return a / std::gcd(a, b) * b; }

}  // namespace

std::vector<long long> smith_invariants(IMat m) {
  const size_t rows = m.size();
  const size_t cols = rows ? m[0].size() : 0;
  std::vector<long long> out;
  for (size_t t = 0; t < std::min(rows, cols); ++t) {
    for (;;) {
      // smallest nonzero entry of the trailing block becomes the pivot
      size_t pr = rows, pc = cols;
      for (size_t i = t; i < rows; ++i)
        for (size_t j = t; j < cols; ++j)
          if (m[i][j] != 0 && (pr == rows || std::llabs(m[i][j]) < std::llabs(m[pr][pc]))) pr = i, pc = j;
      if (pr == rows) return out;
      std::swap(m[t], m[pr]);
      for (auto& row : m) std::swap(row[t], row[pc]);
      bool clean = true;
      for (size_t i = t + 1; i < rows; ++i) {
        const long long f = m[i][t] / m[t][t];
        for (size_t j = t; j < cols; ++j) m[i][j] -= f * m[t][j];
        if (m[i][t] != 0) clean = false;
      }
      for (size_t j = t + 1; j < cols; ++j) {
        const long long f = m[t][j] / m[t][t];
        for (size_t i = t; i < rows; ++i) m[i][j] -= f * m[i][t];
        if (m[t][j] != 0) clean = false;
      }
      if (!clean) continue;
      // divisibility of the remaining block
      bool divides = true;
      for (size_t i = t + 1; i < rows && divides; ++i)
        for (size_t j = t + 1; j < cols; ++j)
          if (m[i][j] % m[t][t] != 0) {
            for (size_t k = t; k < cols; ++k) m[t][k] += m[i][k];
            divides = false;
            break;
          }
      if (divides) break;
    }
    out.push_back(std::llabs(m[t][t]));
  }
  return out;
}

std::vector<std::vector<long long>> integer_kernel(const IMat& a) {
  const size_t rows = a.size();
  if (rows == 0) return {};
  const size_t cols = a[0].size();
  IMat m = a;
  IMat u(cols, Vec(cols, 0));
  for (size_t i = 0; i < cols; ++i) u[i][i] = 1;
  auto col_axpy = [&](size_t dst, size_t src, long long f) {
    for (size_t i = 0; i < rows; ++i) m[i][dst] -= f * m[i][src];
    for (size_t i = 0; i < cols; ++i) u[i][dst] -= f * u[i][src];
  };
  auto col_swap = [&](size_t x, size_t y) {
    for (auto& r : m) std::swap(r[x], r[y]);
    for (auto& r : u) std::swap(r[x], r[y]);
  };
  size_t p = 0;
  for (size_t r = 0; r < rows && p < cols; ++r) {
    for (;;) {
      size_t best = cols;
      for (size_t j = p; j < cols; ++j)
        if (m[r][j] != 0 && (best == cols || std::llabs(m[r][j]) < std::llabs(m[r][best]))) best = j;
      if (best == cols) break;
      col_swap(p, best);
      bool done = true;
      for (size_t j = p + 1; j < cols; ++j) {
        if (m[r][j] == 0) continue;
        col_axpy(j, p, m[r][j] / m[r][p]);
        if (m[r][j] != 0) done = false;
      }
      if (done) {
        ++p;
        break;
      }
    }
  }
  std::vector<Vec> ker;
  for (size_t j = p; j < cols; ++j) {
    Vec v(cols);
    for (size_t i = 0; i < cols; ++i) v[i] = u[i][j];
    ker.push_back(v);
  }
  return ker;
}

EqSubgroup subgroup_of_Eq(const std::vector<EqPointSym>& classes) {
  EqSubgroup H;
  std::set<std::string> names;
  for (const auto& c : classes) {
    for (const auto& [g, e] : c.lattice) names.insert(g);
    H.denom = lcm_ll(H.denom, lcm_ll(c.zeta.r, c.qexp.r));
  }
  H.lattice_names.assign(names.begin(), names.end());
  const size_t k = classes.size();
  const size_t g = names.size();
  H.generator_matrix.assign(2 + g, Vec(k, 0));
  for (size_t j = 0; j < k; ++j) {
    const auto& c = classes[j];
    H.generator_matrix[0][j] = c.zeta.mod1().p * (H.denom / c.zeta.mod1().r);
    H.generator_matrix[1][j] = c.qexp.mod1().p * (H.denom / c.qexp.mod1().r);
    for (size_t l = 0; l < g; ++l) {
      auto it = c.lattice.find(H.lattice_names[l]);
      H.generator_matrix[2 + l][j] = it == c.lattice.end() ? 0 : it->second;
    }
  }
  if (k == 0) return H;
  // Relations n with sum n_j v_j in denom Z^2 + 0.
  IMat R = H.generator_matrix;
  for (size_t i = 0; i < R.size(); ++i) {
    R[i].push_back(i == 0 ? H.denom : 0);
    R[i].push_back(i == 1 ? H.denom : 0);
  }
  const auto ker = integer_kernel(R);
  IMat K(k, Vec(ker.size(), 0));
  for (size_t c = 0; c < ker.size(); ++c)
    for (size_t j = 0; j < k; ++j) K[j][c] = ker[c][j];
  const auto d = ker.empty() ? std::vector<long long>{} : smith_invariants(K);
  for (long long x : d)
    if (x > 1) H.invariant_factors.push_back(x);
  H.rank = static_cast<int>(k) - static_cast<int>(d.size());
  if (H.invariant_factors.size() > 2)
    fail(ErrorKind::Domain, "subgroup has more than two invariant factors; not realizable as a finite part");
  return H;
}

bool same_type(const GaloisDescriptor& a, const GaloisDescriptor& b) {
  return a.n == b.n && a.p1 == b.p1 && a.p2 == b.p2 && a.torus_dim == b.torus_dim && a.unipotent_dim == b.unipotent_dim &&
         a.lie_dim() == b.lie_dim() && a.wild_dim == b.wild_dim;
}

namespace {

GaloisDescriptor diagonal_descriptor(const std::vector<EqPointSym>& cls, const std::vector<int>& mu, const CMat& logU) {
  GaloisDescriptor d;
  d.n = static_cast<int>(cls.size());
  std::vector<EqPointSym> aug = cls;
  bool any_slope = false;
  for (size_t a = 0; a < aug.size(); ++a)
    if (mu[a] != 0) {
      aug[a] = aug[a] + EqPointSym::generator(kSlopeGen, mu[a]);
      any_slope = true;
    }
  const auto H = subgroup_of_Eq(aug);
  d.p1 = H.p1();
  d.p2 = H.p2();
  d.torus_dim = H.rank;
  if (any_slope) d.theta_exponents = mu;
  d.diag_weights = aug;
  std::vector<CMat> gens;
  for (size_t l = 0; l < H.lattice_names.size(); ++l) {
    CMat D = CMat::Zero(d.n, d.n);
    for (int a = 0; a < d.n; ++a) D(a, a) = static_cast<double>(H.generator_matrix[2 + l][static_cast<size_t>(a)]);
    gens.push_back(D);
  }
  if (logU.norm() > 0.0) {
    d.unipotent_dim = 1;
    gens.push_back(logU);
  }
  d.lie_basis = lie::lie_closure(gens);
  return d;
}

void require_tags(const bg::PureBlock& b, const char* who) {
  if (!b.all_symbolic()) fail(ErrorKind::Precondition, std::string(who) + ": symbolic eigenvalue tags required");
}

}  // namespace

GaloisDescriptor fuchsian_group(const CMat& A, const std::vector<std::optional<EqPointSym>>& tags) {
  if (tags.size() != static_cast<size_t>(A.rows()))
    fail(ErrorKind::Precondition, "fuchsian_group: symbolic eigenvalue tags required");
  const auto b = bg::PureBlock::from_matrix(0, A, tags);
  require_tags(b, "fuchsian_group");
  std::vector<EqPointSym> cls;
  for (const auto& s : b.sym) cls.push_back(*s);
  return diagonal_descriptor(cls, std::vector<int>(cls.size(), 0), nilpotent_log(b.unipotent));
}

GaloisDescriptor pure_group(const bg::BGSystem& A0) {
  A0.validate();
  if (!A0.is_pure()) fail(ErrorKind::Precondition, "pure_group: system is not pure");
  const int n = A0.rank();
  std::vector<EqPointSym> cls;
  std::vector<int> mu;
  CMat logU = CMat::Zero(n, n);
  for (int k = 0; k < A0.num_blocks(); ++k) {
    const auto& b = A0.blocks[static_cast<size_t>(k)];
    require_tags(b, "pure_group");
    for (const auto& s : b.sym) {
      cls.push_back(*s);
      mu.push_back(b.mu);
    }
    logU.block(A0.offset(k), A0.offset(k), b.rank(), b.rank()) = nilpotent_log(b.unipotent);
  }
  return diagonal_descriptor(cls, mu, logU);
}

GaloisDescriptor wild_local_group(const bg::BGSystem& A, const QContext& ctx, std::optional<cd> at) {
  A.validate();
  const auto G = bg::gr(A);
  GaloisDescriptor d = pure_group(G);
  if (A.is_pure()) return d;
  auto frame = stokes::default_frame(A, ctx);
  if (at) frame.a = *at;
  std::vector<CMat> comps;
  double scale = 0.0;
  for (const auto& p : bg::sigma_set(G, ctx)) {
    const auto av = stokes::alien_residue(A, p.rep, frame, ctx);
    // (t, gamma)-conjugation scales cells independently, so each cell component is its own generator.
    for (const auto& [cell, m] : av.components) {
      scale = std::max(scale, m.norm());
      comps.push_back(m);
    }
  }
  std::vector<CMat> gens = d.lie_basis;
  for (const auto& m : comps)
    if (m.norm() > 1e-7 * scale) gens.push_back(m / m.norm());
  const auto full = lie::lie_closure(gens, 1e-6);
  d.wild_dim = static_cast<int>(full.size()) - d.lie_dim();
  d.lie_basis = full;
  return d;
}

CMat matrix_log(const CMat& m) { return m.log(); }

namespace {

special::CharacterData chars_of(const CMat& C) { return bg::PureBlock::from_matrix(0, C).characters(); }

void check_system(const RationalSystem& S) {
  if (!S.A || S.A0.rows() == 0 || S.A0.rows() != S.Ainf.rows())
    fail(ErrorKind::Precondition, "connection: A, A(0) and A(inf) are required with matching ranks");
}

}  // namespace

CMat solution_at_zero(const RationalSystem& S, cd z, const QContext& ctx, int terms) {
  check_system(S);
  const long n = S.A0.rows();
  const CMat Cinv = S.A0.inverse();
  // F0 = lim A(z/q) ... A(z/q^k) C^{-k}; accumulate P_k = P_{k-1} C^{k-1} (A(z/q^k) C^{-1}) C^{-(k-1)}.
  CMat P = CMat::Identity(n, n);
  CMat Ck = CMat::Identity(n, n), Cmk = CMat::Identity(n, n);
  bool converged = false;
  for (int k = 1; k <= terms; ++k) {
    const CMat step = S.A(z / ipow(ctx.q, k)) * Cinv;
    const double dev = (step - CMat::Identity(n, n)).norm();
    P = P * Ck * step * Cmk;
    Ck = Ck * S.A0;
    Cmk = Cinv * Cmk;
    if (dev < 1e-17) {
      converged = true;
      break;
    }
  }
  if (!converged) fail(ErrorKind::Domain, "solution at 0: product did not converge geometrically");
  return P * special::e_matrix(chars_of(S.A0), z, ctx);
}

CMat solution_at_infinity(const RationalSystem& S, cd z, const QContext& ctx, int terms) {
  check_system(S);
  const long n = S.Ainf.rows();
  const CMat C = S.Ainf;
  const CMat Cinv = C.inverse();
  // Finf = lim A(z)^{-1} ... A(q^{k-1} z)^{-1} C^k.
  CMat P = CMat::Identity(n, n);
  CMat Ck = CMat::Identity(n, n), Cmk = CMat::Identity(n, n);
  bool converged = false;
  for (int k = 0; k < terms; ++k) {
    const CMat step = S.A(ipow(ctx.q, k) * z).inverse() * C;
    const double dev = (step - CMat::Identity(n, n)).norm();
    P = P * Cmk * step * Ck;
    Ck = Ck * C;
    Cmk = Cinv * Cmk;
    if (dev < 1e-17) {
      converged = true;
      break;
    }
  }
  if (!converged) fail(ErrorKind::Domain, "solution at infinity: product did not converge geometrically");
  return P * special::e_matrix(chars_of(C), z, ctx);
}

std::vector<ConnectionSample> connection_matrix(const RationalSystem& S, const std::vector<cd>& grid, const QContext& ctx,
                                               int terms) {
  std::vector<ConnectionSample> out;
  for (cd z : grid) {
    ConnectionSample s;
    s.z = z;
    s.X0 = solution_at_zero(S, z, ctx, terms);
    s.Xinf = solution_at_infinity(S, z, ctx, terms);
    s.P = s.Xinf.inverse() * s.X0;
    const CMat Az = S.A(z);
    const CMat X0q = solution_at_zero(S, ctx.q * z, ctx, terms);
    const CMat Xiq = solution_at_infinity(S, ctx.q * z, ctx, terms);
    s.residual0 = (X0q - Az * s.X0).norm() / X0q.norm();
    s.residual_inf = (Xiq - Az * s.Xinf).norm() / Xiq.norm();
    const CMat Pq = Xiq.inverse() * X0q;
    s.ellipticity = (Pq - s.P).norm() / s.P.norm();
    out.push_back(s);
  }
  return out;
}

CMat twisted_connection(const RationalSystem& S, cd a, const QContext& ctx, int terms) {
  const CMat P = solution_at_infinity(S, a, ctx, terms).inverse() * solution_at_zero(S, a, ctx, terms);
  return special::Psi_a(a, chars_of(S.Ainf), ctx).inverse() * P * special::Psi_a(a, chars_of(S.A0), ctx);
}

GaloisDescriptor global_group(const GaloisDescriptor& local0, const GaloisDescriptor& localinf,
                              const std::vector<CMat>& pcheck_samples) {
  if (local0.n != localinf.n) fail(ErrorKind::Precondition, "global_group: rank mismatch");
  for (const auto& m : pcheck_samples)
    if (m.rows() != local0.n || m.cols() != local0.n) fail(ErrorKind::Precondition, "global_group: sample rank mismatch");
  GaloisDescriptor d = local0;
  std::vector<CMat> gens = local0.lie_basis;
  const CMat P0 = pcheck_samples.empty() ? CMat(CMat::Identity(local0.n, local0.n)) : pcheck_samples.front();
  const CMat P0inv = P0.inverse();
  for (const auto& x : localinf.lie_basis) gens.push_back(P0inv * x * P0);
  for (size_t k = 1; k < pcheck_samples.size(); ++k) gens.push_back(matrix_log(P0inv * pcheck_samples[k]));
  d.lie_basis = lie::lie_closure(gens, 1e-8);
  d.p1 = lcm_ll(local0.p1, localinf.p1);
  d.p2 = lcm_ll(local0.p2, localinf.p2);
  d.torus_dim = std::max(local0.torus_dim, localinf.torus_dim);
  d.unipotent_dim = std::max(local0.unipotent_dim, localinf.unipotent_dim);
  d.wild_dim = std::max(local0.wild_dim, localinf.wild_dim);
  return d;
}

}  // namespace qdg::galois

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

#include "qdg/lie.hpp"

#include <algorithm>

namespace qdg::lie {

namespace {

using Word = std::vector<int>;
using Poly = std::map<Word, long long>;  // associative polynomial

bool is_lyndon(const Word& w) {
  for (size_t i = 1; i < w.size(); ++i)
    if (!(w < Word(w.begin() + static_cast<long>(i), w.end()))) return false;
  return !w.empty();
}

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly out;
  for (const auto& [u, cu] : a)
    for (const auto& [v, cv] : b) {
      Word w = u;
      w.insert(w.end(), v.begin(), v.end());
      out[w] += cu * cv;
    }
  return out;
}

void poly_axpy(Poly& y, long long a, const Poly& x) {
  for (const auto& [w, c] : x) {
    auto& v = y[w];
    v += a * c;
    if (v == 0) y.erase(w);
  }
}

Poly commutator(const Poly& a, const Poly& b) {
  Poly out = poly_mul(a, b);
  poly_axpy(out, -1, poly_mul(b, a));
  return out;
}

bool same_class(const EqPoint& a, const EqPoint& b, const QContext* ctx) {
  if (a.sym && b.sym) return *a.sym == *b.sym;
  if (!ctx) return std::abs(a.rep - b.rep) < 1e-9 * std::abs(a.rep);
  return eq_distance(a.rep, b.rep, *ctx) < 1e-8;
}

}  // namespace

GenLabel GenLabel::nu() {
  GenLabel g;
  g.is_nu = true;
  g.cls.rep = 1.0;
  g.cls.sym = EqPointSym::identity();
  return g;
}

GenLabel GenLabel::alien(int delta, const EqPoint& cls, int index) {
  if (delta <= 0 || index < 1 || index > delta) fail(ErrorKind::Domain, "alien generator needs 1 <= index <= delta");
  GenLabel g;
  g.delta = delta;
  g.cls = cls;
  g.index = index;
  return g;
}

std::string GenLabel::to_string() const {
  if (is_nu) return "nu";
  std::string c = cls.sym ? cls.sym->to_string() : ("(" + std::to_string(cls.rep.real()) + "," + std::to_string(cls.rep.imag()) + ")");
  return "alien(" + std::to_string(delta) + "," + c + "," + std::to_string(index) + ")";
}

std::vector<int> FreeLieTrunc::dims_per_length() const {
  std::vector<int> d(static_cast<size_t>(depth), 0);
  for (const auto& w : words) ++d[w.size() - 1];
  return d;
}

int FreeLieTrunc::index_of(const std::vector<int>& word) const {
  auto it = std::find(words.begin(), words.end(), word);
  return it == words.end() ? -1 : static_cast<int>(it - words.begin());
}

Sparse FreeLieTrunc::bracket(const Sparse& x, const Sparse& y) const {
  Sparse out;
  for (const auto& [i, a] : x)
    for (const auto& [j, b] : y) {
      auto it = table.find({i, j});
      if (it == table.end()) continue;  // beyond the truncation depth
      for (const auto& [k, c] : it->second) {
        auto& v = out[k];
        v += a * b * c;
        if (v == 0) out.erase(k);
      }
    }
  return out;
}

FreeLieTrunc hall_basis(const std::vector<GenLabel>& gens, int depth, const QContext& ctx) {
  if (depth < 1) fail(ErrorKind::Domain, "hall_basis: depth must be at least 1");
  if (gens.empty()) fail(ErrorKind::Domain, "hall_basis: no generators");
  FreeLieTrunc L;
  L.gens = gens;
  L.depth = depth;
  const int k = static_cast<int>(gens.size());
  // Duval's generation of Lyndon words in lexicographic order.
  Word w{-1};
  while (!w.empty()) {
    ++w.back();
    L.words.push_back(w);
    const size_t m = w.size();
    while (static_cast<int>(w.size()) < depth) w.push_back(w[w.size() - m]);
    while (!w.empty() && w.back() == k - 1) w.pop_back();
  }
  std::stable_sort(L.words.begin(), L.words.end(), [](const Word& a, const Word& b) { return a.size() < b.size(); });
  const int n = L.size();
  std::vector<Poly> P(static_cast<size_t>(n));
  L.left.assign(static_cast<size_t>(n), -1);
  L.right.assign(static_cast<size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    const Word& wi = L.words[static_cast<size_t>(i)];
    if (wi.size() == 1) {
      P[static_cast<size_t>(i)][wi] = 1;
    } else {
      // Standard factorization: v is the longest proper Lyndon suffix.
      for (size_t s = 1; s < wi.size(); ++s) {
        Word v(wi.begin() + static_cast<long>(s), wi.end());
        if (!is_lyndon(v)) continue;
        Word u(wi.begin(), wi.begin() + static_cast<long>(s));
        L.left[static_cast<size_t>(i)] = L.index_of(u);
        L.right[static_cast<size_t>(i)] = L.index_of(v);
        break;
      }
      P[static_cast<size_t>(i)] = commutator(P[static_cast<size_t>(L.left[static_cast<size_t>(i)])],
                                             P[static_cast<size_t>(L.right[static_cast<size_t>(i)])]);
    }
    Multidegree d;
    d.cls.rep = 1.0;
    d.cls.sym = EqPointSym::identity();
    for (int letter : wi) {
      const auto& g = gens[static_cast<size_t>(letter)];
      d.delta += g.delta;
      d.cls.rep *= g.cls.rep;
      if (d.cls.sym && g.cls.sym) d.cls.sym = *d.cls.sym + *g.cls.sym;
      else d.cls.sym.reset();
    }
    d.cls.rep = canonicalize(d.cls.rep, ctx).rep;
    L.degree.push_back(d);
  }
  // Lie polynomials are triangular: the lexicographically least word of P_w is w itself.
  auto decompose = [&](Poly p) {
    Sparse out;
    while (!p.empty()) {
      const auto [lead, c] = *p.begin();
      const int idx = L.index_of(lead);
      if (idx < 0) fail(ErrorKind::Domain, "hall_basis: leading word is not Lyndon");
      out[idx] += c;
      poly_axpy(p, -c, P[static_cast<size_t>(idx)]);
    }
    return out;
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (L.length(i) + L.length(j) <= depth)
        L.table[{i, j}] = (i == j) ? Sparse{} : decompose(commutator(P[static_cast<size_t>(i)], P[static_cast<size_t>(j)]));
  return L;
}

long long witt_dimension(int g, int d) {
  auto mobius = [](int m) {
    int r = 1;
    for (int p = 2; p * p <= m; ++p)
      if (m % p == 0) {
        m /= p;
        if (m % p == 0) return 0;
        r = -r;
      }
    if (m > 1) r = -r;
    return r;
  };
  long long s = 0;
  for (int e = 1; e <= d; ++e)
    if (d % e == 0) {
      long long p = 1;
      for (int t = 0; t < d / e; ++t) p *= g;
      s += mobius(e) * p;
    }
  return s / d;
}

std::vector<int> lcs_quotient(const FreeLieTrunc& L, int n) {
  if (n < 1 || n > L.depth + 1) fail(ErrorKind::Domain, "lcs_quotient: n must lie in [1, depth + 1]");
  auto d = L.dims_per_length();
  d.resize(static_cast<size_t>(n - 1));
  return d;
}

Sparse project_generators(const FreeLieTrunc& L, const std::vector<bool>& keep, const Sparse& x) {
  Sparse out;
  for (const auto& [i, c] : x) {
    const auto& w = L.words[static_cast<size_t>(i)];
    if (std::all_of(w.begin(), w.end(), [&](int l) { return keep[static_cast<size_t>(l)]; })) out[i] = c;
  }
  return out;
}

namespace {

CVec vec_of(const CMat& m) { return Eigen::Map<const CVec>(m.data(), m.size()); }

bool add_to_basis(std::vector<CVec>& Q, CVec v, double tol) {
  const double nv = v.norm();
  if (nv < tol) return false;
  v /= nv;
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& b : Q) v -= b.dot(v) * b;
  const double r = v.norm();
  if (r < tol) return false;
  Q.push_back(v / r);
  return true;
}

std::vector<CMat> to_mats(const std::vector<CVec>& Q, long rows) {
  std::vector<CMat> out;
  for (const auto& v : Q) out.push_back(Eigen::Map<const CMat>(v.data(), rows, v.size() / rows));
  return out;
}

}  // namespace

std::vector<CMat> span_basis(const std::vector<CMat>& mats, double tol) {
  if (mats.empty()) return {};
  std::vector<CVec> Q;
  for (const auto& m : mats) add_to_basis(Q, vec_of(m), tol);
  return to_mats(Q, mats.front().rows());
}

std::vector<CMat> lie_closure(const std::vector<CMat>& mats, double tol) {
  if (mats.empty()) return {};
  const long n = mats.front().rows();
  std::vector<CVec> Q;
  for (const auto& m : mats) add_to_basis(Q, vec_of(m), tol);
  for (size_t k = 0; k < Q.size(); ++k)
    for (size_t j = 0; j < k; ++j) {
      CMat a = Eigen::Map<const CMat>(Q[k].data(), n, n);
      CMat b = Eigen::Map<const CMat>(Q[j].data(), n, n);
      add_to_basis(Q, vec_of(a * b - b * a), tol);
    }
  return to_mats(Q, n);
}

WildRep build_rep(const bg::BGSystem& A0, const std::vector<GenLabel>& gens, const std::map<int, CMat>& assign,
                  const QContext& ctx, int depth) {
  A0.validate();
  if (!A0.is_pure()) fail(ErrorKind::Precondition, "build_rep: the base system must be pure");
  if (depth < 0) depth = std::max(1, A0.num_blocks() - 1);
  WildRep rep;
  rep.A0 = A0;
  rep.trunc = hall_basis(gens, depth, ctx);
  const int n = A0.rank();
  CMat logU = CMat::Zero(n, n);
  for (int k = 0; k < A0.num_blocks(); ++k) {
    const auto& b = A0.blocks[static_cast<size_t>(k)];
    logU.block(A0.offset(k), A0.offset(k), b.rank(), b.rank()) = nilpotent_log(b.unipotent);
  }
  const auto cells = bg::g_decompose(A0, ctx);
  for (size_t g = 0; g < gens.size(); ++g) {
    auto it = assign.find(static_cast<int>(g));
    CMat m = (it == assign.end()) ? CMat(CMat::Zero(n, n)) : it->second;
    if (m.rows() != n || m.cols() != n) fail(ErrorKind::Precondition, "build_rep: assignment has the wrong size");
    const auto& lab = gens[g];
    if (lab.is_nu) {
      if (it == assign.end()) m = logU;
      else if ((m - logU).norm() > 1e-9 * (1.0 + logU.norm()))
        fail(ErrorKind::Precondition, "build_rep: nu must map to log U");
    } else {
      const bg::GradedCell* cell = nullptr;
      for (const auto& c : cells)
        if (c.level == lab.delta && same_class(c.cls, lab.cls, &ctx)) cell = &c;
      const double scale = std::max(1.0, m.norm());
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
          if (std::abs(m(r, c)) <= 1e-12 * scale) continue;
          const bool in_cell = cell && std::any_of(cell->entries.begin(), cell->entries.end(),
                                                   [&](const auto& e) { return e.row == r && e.col == c; });
          if (!in_cell) fail(ErrorKind::Precondition, "build_rep: assignment of " + lab.to_string() + " is off its cell");
        }
    }
    rep.assign.push_back(m);
  }
  for (int i = 0; i < rep.trunc.size(); ++i) {
    if (rep.trunc.length(i) == 1) {
      rep.images.push_back(rep.assign[static_cast<size_t>(rep.trunc.words[static_cast<size_t>(i)][0])]);
    } else {
      const CMat& a = rep.images[static_cast<size_t>(rep.trunc.left[static_cast<size_t>(i)])];
      const CMat& b = rep.images[static_cast<size_t>(rep.trunc.right[static_cast<size_t>(i)])];
      rep.images.push_back(a * b - b * a);
    }
  }
  return rep;
}

std::vector<CMat> rep_image(const WildRep& rep) {
  std::vector<CMat> gens;
  for (const auto& m : rep.assign)
    if (m.norm() > 0.0) gens.push_back(m);
  return lie_closure(gens);
}

cd Character::operator()(const EqPointSym& c) const {
  const double ph = 2.0 * kPi * (static_cast<double>(m_zeta) * c.zeta.to_double() + static_cast<double>(m_q) * c.qexp.to_double());
  cd v = std::exp(cd(0.0, ph));
  for (const auto& [g, e] : c.lattice) {
    auto it = lattice.find(g);
    if (it == lattice.end()) fail(ErrorKind::Domain, "character has no value on generator " + g);
    v *= ipow(it->second, e);
  }
  return v;
}

CMat diagonal_action(const bg::BGSystem& A0, cd t, const Character& gamma) {
  const int n = A0.rank();
  CMat D = CMat::Zero(n, n);
  for (int k = 0; k < A0.num_blocks(); ++k) {
    const auto& b = A0.blocks[static_cast<size_t>(k)];
    for (int i = 0; i < b.rank(); ++i) {
      if (!b.sym[static_cast<size_t>(i)]) fail(ErrorKind::Precondition, "diagonal_action: symbolic tags required");
      D(A0.offset(k) + i, A0.offset(k) + i) = ipow(t, -b.mu) * gamma(*b.sym[static_cast<size_t>(i)]);
    }
  }
  return D;
}

double equivariance_defect(const WildRep& rep, cd t, const Character& gamma) {
  const CMat D = diagonal_action(rep.A0, t, gamma);
  const CMat Dinv = D.inverse();
  double worst = 0.0;
  for (int i = 0; i < rep.trunc.size(); ++i) {
    const CMat& img = rep.images[static_cast<size_t>(i)];
    const double nrm = img.norm();
    if (nrm == 0.0) continue;
    const auto& deg = rep.trunc.degree[static_cast<size_t>(i)];
    if (!deg.cls.sym) fail(ErrorKind::Precondition, "equivariance_defect: symbolic generator classes required");
    const cd scale = ipow(t, deg.delta) * gamma(*deg.cls.sym);
    worst = std::max(worst, (D * img * Dinv - scale * img).norm() / nrm);
  }
  return worst;
}

}  // namespace qdg::lie

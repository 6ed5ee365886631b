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

#include "qdg/bg.hpp"

#include <algorithm>
#include <numeric>

namespace qdg::bg {

namespace {

constexpr double kStructTol = 1e-12;

std::string coord_name(int i, int j) { return "(" + std::to_string(i) + "," + std::to_string(j) + ")"; }

}  // namespace

PureBlock PureBlock::from_matrix(int mu, const CMat& A, std::vector<std::optional<EqPointSym>> sym) {
  if (A.rows() != A.cols() || A.rows() == 0) fail(ErrorKind::Precondition, "block matrix must be square and nonempty");
  const long r = A.rows();
  const double scale = std::max(1.0, A.norm());
  for (long i = 0; i < r; ++i)
    for (long j = 0; j < i; ++j)
      if (std::abs(A(i, j)) > kStructTol * scale)
        fail(ErrorKind::Precondition, "block matrix must be upper triangular");
  PureBlock b;
  b.mu = mu;
  for (long i = 0; i < r; ++i) {
    if (std::abs(A(i, i)) <= kStructTol * scale) fail(ErrorKind::Precondition, "block matrix is singular");
    b.eigen.push_back(A(i, i));
  }
  if (sym.empty()) sym.assign(static_cast<size_t>(r), std::nullopt);
  if (static_cast<long>(sym.size()) != r) fail(ErrorKind::Schema, "eigen tag count does not match block size");
  b.sym = std::move(sym);
  b.unipotent = b.semisimple().inverse() * A;
  for (long i = 0; i < r; ++i) b.unipotent(i, i) = 1.0;
  for (long i = 0; i < r; ++i)
    for (long j = 0; j < i; ++j) b.unipotent(i, j) = 0.0;
  // Jordan compatibility: the unipotent part must commute with diag(eigen).
  for (long i = 0; i < r; ++i)
    for (long j = i + 1; j < r; ++j)
      if (std::abs(b.unipotent(i, j)) > kStructTol * scale &&
          std::abs(b.eigen[static_cast<size_t>(i)] - b.eigen[static_cast<size_t>(j)]) >
              1e-9 * std::abs(b.eigen[static_cast<size_t>(i)]))
        fail(ErrorKind::Precondition, "block is not in Jordan-compatible form at " + coord_name(int(i), int(j)));
  return b;
}

CMat PureBlock::semisimple() const {
  const long r = rank();
  CMat D = CMat::Zero(r, r);
  for (long i = 0; i < r; ++i) D(i, i) = eigen[static_cast<size_t>(i)];
  return D;
}

CMat PureBlock::matrix() const { return semisimple() * unipotent; }

bool PureBlock::all_symbolic() const {
  return std::all_of(sym.begin(), sym.end(), [](const auto& s) { return s.has_value(); });
}

special::CharacterData PureBlock::characters() const {
  const long r = rank();
  return {eigen, CMat::Identity(r, r), unipotent};
}

int BGSystem::rank() const {
  int n = 0;
  for (const auto& b : blocks) n += b.rank();
  return n;
}

int BGSystem::offset(int i) const {
  int n = 0;
  for (int k = 0; k < i; ++k) n += blocks[static_cast<size_t>(k)].rank();
  return n;
}

int BGSystem::block_of(int coord) const {
  int n = 0;
  for (int k = 0; k < num_blocks(); ++k) {
    n += blocks[static_cast<size_t>(k)].rank();
    if (coord < n) return k;
  }
  fail(ErrorKind::Domain, "coordinate out of range");
}

const MatrixLP* BGSystem::off_diagonal(int i, int j) const {
  auto it = U.find({i, j});
  return it == U.end() ? nullptr : &it->second;
}

bool BGSystem::is_pure() const {
  for (const auto& [key, m] : U)
    for (const auto& p : m.e)
      if (!p.is_zero()) return false;
  return true;
}

void BGSystem::validate() const {
  if (blocks.empty()) fail(ErrorKind::Precondition, "system has no blocks");
  for (size_t i = 1; i < blocks.size(); ++i)
    if (blocks[i].mu <= blocks[i - 1].mu) fail(ErrorKind::Precondition, "slopes must be strictly increasing");
  for (const auto& b : blocks) {
    if (static_cast<int>(b.sym.size()) != b.rank()) fail(ErrorKind::Precondition, "eigen tag count mismatch");
    if (b.unipotent.rows() != b.rank() || b.unipotent.cols() != b.rank())
      fail(ErrorKind::Precondition, "unipotent factor has the wrong size");
  }
  for (const auto& [key, m] : U) {
    auto [i, j] = key;
    if (i < 0 || j >= num_blocks() || i >= j) fail(ErrorKind::Precondition, "off-diagonal block index " + coord_name(i, j));
    const auto& bi = blocks[static_cast<size_t>(i)];
    const auto& bj = blocks[static_cast<size_t>(j)];
    if (m.rows != bi.rank() || m.cols != bj.rank())
      fail(ErrorKind::Precondition, "off-diagonal block " + coord_name(i, j) + " has the wrong shape");
    for (const auto& p : m.e) {
      if (p.is_zero()) continue;
      if (p.lowest() < bi.mu || p.highest() >= bj.mu)
        fail(ErrorKind::Precondition, "off-diagonal block " + coord_name(i, j) + " violates the support condition [" +
                                          std::to_string(bi.mu) + ", " + std::to_string(bj.mu) + ")");
    }
  }
}

MatrixLP BGSystem::assemble() const {
  validate();
  const int n = rank();
  MatrixLP M(n, n);
  for (int k = 0; k < num_blocks(); ++k) {
    const auto& b = blocks[static_cast<size_t>(k)];
    const CMat A = b.matrix();
    const int o = offset(k);
    for (int i = 0; i < b.rank(); ++i)
      for (int j = 0; j < b.rank(); ++j)
        if (A(i, j) != cd(0.0)) M.at(o + i, o + j) = LaurentPoly::monomial(A(i, j), b.mu);
  }
  for (const auto& [key, m] : U) {
    const int oi = offset(key.first), oj = offset(key.second);
    for (int i = 0; i < m.rows; ++i)
      for (int j = 0; j < m.cols; ++j) M.at(oi + i, oj + j) = m.at(i, j);
  }
  return M;
}

CMat BGSystem::assemble_at(cd z) const { return eval(assemble(), z); }

NewtonData newton(const BGSystem& A) {
  NewtonData nd;
  for (const auto& b : A.blocks) {
    nd.slopes.push_back(b.mu);
    nd.mults.push_back(b.rank());
  }
  return nd;
}

NewtonData scalar_newton(const std::vector<LaurentPoly>& a) {
  std::vector<std::pair<int, int>> pts;
  for (int i = 0; i < static_cast<int>(a.size()); ++i)
    if (!a[static_cast<size_t>(i)].is_zero()) pts.emplace_back(i, a[static_cast<size_t>(i)].lowest());
  if (pts.size() < 2) return {};
  // Lower hull by monotone chain.
  std::vector<std::pair<int, int>> hull;
  auto cross = [](auto o, auto p, auto r) {
    return static_cast<long long>(p.first - o.first) * (r.second - o.second) -
           static_cast<long long>(p.second - o.second) * (r.first - o.first);
  };
  for (auto p : pts) {
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), p) <= 0) hull.pop_back();
    hull.push_back(p);
  }
  NewtonData nd;
  for (size_t k = 1; k < hull.size(); ++k) {
    const int dx = hull[k].first - hull[k - 1].first;
    const int dy = hull[k].second - hull[k - 1].second;
    if (dy % dx != 0) fail(ErrorKind::Domain, "scalar Newton polygon has a non-integral slope");
    nd.slopes.push_back(dy / dx);
    nd.mults.push_back(dx);
  }
  return nd;
}

BGSystem gr(const BGSystem& A) {
  BGSystem g;
  g.blocks = A.blocks;
  g.lattice_values = A.lattice_values;
  return g;
}

BGSystem parse_assembled(const MatrixLP& M, double tol) {
  if (M.rows != M.cols || M.rows == 0) fail(ErrorKind::Precondition, "matrix must be square and nonempty");
  const int n = M.rows;
  // Diagonal entries are monomials; consecutive equal degrees form a block.
  std::vector<int> deg(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    LaurentPoly d = M.at(i, i).normalized(tol);
    if (d.is_zero() || d.coeffs.size() != 1) fail(ErrorKind::Precondition, "diagonal entry is not a monomial");
    deg[static_cast<size_t>(i)] = d.offset;
  }
  std::vector<int> starts{0};
  for (int i = 1; i < n; ++i)
    if (deg[static_cast<size_t>(i)] != deg[static_cast<size_t>(i - 1)]) starts.push_back(i);
  starts.push_back(n);
  BGSystem S;
  const int k = static_cast<int>(starts.size()) - 1;
  for (int b = 0; b < k; ++b) {
    const int o = starts[static_cast<size_t>(b)], r = starts[static_cast<size_t>(b) + 1] - o;
    const int mu = deg[static_cast<size_t>(o)];
    CMat A = CMat::Zero(r, r);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) {
        LaurentPoly p = M.at(o + i, o + j).normalized(tol);
        if (p.is_zero()) continue;
        if (p.coeffs.size() != 1 || p.offset != mu)
          fail(ErrorKind::Precondition, "diagonal block entry is not a multiple of z^mu");
        A(i, j) = p.coeffs[0];
      }
    S.blocks.push_back(PureBlock::from_matrix(mu, A));
  }
  for (int bi = 0; bi < k; ++bi)
    for (int bj = 0; bj < k; ++bj) {
      if (bi == bj) continue;
      const int oi = starts[static_cast<size_t>(bi)], ri = starts[static_cast<size_t>(bi) + 1] - oi;
      const int oj = starts[static_cast<size_t>(bj)], rj = starts[static_cast<size_t>(bj) + 1] - oj;
      MatrixLP m(ri, rj);
      bool nonzero = false;
      for (int i = 0; i < ri; ++i)
        for (int j = 0; j < rj; ++j) {
          m.at(i, j) = M.at(oi + i, oj + j).normalized(tol);
          nonzero = nonzero || !m.at(i, j).is_zero();
        }
      if (!nonzero) continue;
      if (bi > bj) fail(ErrorKind::Precondition, "matrix is not block upper triangular");
      S.U[{bi, bj}] = m;
    }
  S.validate();
  return S;
}

std::vector<EqPoint> sigma_set(const BGSystem& A0, const QContext& ctx, bool require_exact) {
  A0.validate();
  const bool exact = std::all_of(A0.blocks.begin(), A0.blocks.end(), [](const auto& b) { return b.all_symbolic(); });
  if (require_exact && !exact) fail(ErrorKind::Precondition, "sigma_set: symbolic eigenvalue tags required");
  std::vector<EqPoint> out;
  auto known = [&](const EqPoint& p) {
    for (const auto& o : out) {
      if (p.sym && o.sym) {
        if (*p.sym == *o.sym) return true;
      } else if (eq_distance(p.rep, o.rep, ctx) < ctx.eps_num) {
        return true;
      }
    }
    return false;
  };
  for (int i = 0; i < A0.num_blocks(); ++i)
    for (int j = i + 1; j < A0.num_blocks(); ++j) {
      const auto& bi = A0.blocks[static_cast<size_t>(i)];
      const auto& bj = A0.blocks[static_cast<size_t>(j)];
      const int delta = bj.mu - bi.mu;
      for (size_t a = 0; a < bi.eigen.size(); ++a)
        for (size_t b = 0; b < bj.eigen.size(); ++b) {
          const cd ratio = bi.eigen[a] / bj.eigen[b];
          const cd r0 = std::exp(std::log(ratio) / static_cast<double>(delta));
          for (int k = 0; k < delta; ++k)
            for (int m = 0; m < delta; ++m) {
              cd v = r0 * std::exp(cd(0.0, 2.0 * kPi * k / delta) + ctx.log_q * (static_cast<double>(m) / delta));
              EqPoint p = EqPoint::from_numeric(v, ctx);
              if (bi.sym[a] && bj.sym[b]) p.sym = sym_root(*bi.sym[a] - *bj.sym[b], delta, k, m);
              if (!known(p)) out.push_back(p);
            }
        }
    }
  return out;
}

std::vector<GradedCell> g_decompose(const BGSystem& A0, const QContext& ctx) {
  A0.validate();
  std::vector<GradedCell> cells;
  for (int i = 0; i < A0.num_blocks(); ++i)
    for (int j = i + 1; j < A0.num_blocks(); ++j) {
      const auto& bi = A0.blocks[static_cast<size_t>(i)];
      const auto& bj = A0.blocks[static_cast<size_t>(j)];
      const int delta = bj.mu - bi.mu;
      for (int a = 0; a < bi.rank(); ++a)
        for (int b = 0; b < bj.rank(); ++b) {
          const cd d = bi.eigen[static_cast<size_t>(a)], e = bj.eigen[static_cast<size_t>(b)];
          EqPoint cls = EqPoint::from_numeric(d / e, ctx);
          const auto& sd = bi.sym[static_cast<size_t>(a)];
          const auto& se = bj.sym[static_cast<size_t>(b)];
          if (sd && se) cls.sym = *sd - *se;
          CellEntry entry{i, j, A0.offset(i) + a, A0.offset(j) + b, d, e};
          auto it = std::find_if(cells.begin(), cells.end(), [&](const GradedCell& c) {
            if (c.level != delta) return false;
            if (c.cls.sym && cls.sym) return *c.cls.sym == *cls.sym;
            return eq_distance(c.cls.rep, cls.rep, ctx) < ctx.eps_num;
          });
          if (it == cells.end()) {
            cells.push_back({delta, cls, {entry}});
          } else {
            it->entries.push_back(entry);
          }
        }
    }
  std::stable_sort(cells.begin(), cells.end(), [](const auto& x, const auto& y) { return x.level < y.level; });
  return cells;
}

int dimV(const BGSystem& A0, int delta) {
  if (delta <= 0) fail(ErrorKind::Domain, "dimV: level must be positive");
  int s = 0;
  for (int i = 0; i < A0.num_blocks(); ++i)
    for (int j = i + 1; j < A0.num_blocks(); ++j)
      if (A0.blocks[static_cast<size_t>(j)].mu - A0.blocks[static_cast<size_t>(i)].mu == delta)
        s += A0.blocks[static_cast<size_t>(i)].rank() * A0.blocks[static_cast<size_t>(j)].rank();
  return delta * s;
}

BGSystem tensor(const BGSystem& A, const BGSystem& B) {
  const MatrixLP MA = A.assemble(), MB = B.assemble();
  const int na = MA.rows, nb = MB.rows, n = na * nb;
  // Coordinates (a, b) ordered by slope, stable in the lexicographic order.
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    return A.slope_of(x / nb) + B.slope_of(x % nb) < A.slope_of(y / nb) + B.slope_of(y % nb);
  });
  MatrixLP K(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const int x = order[static_cast<size_t>(r)], y = order[static_cast<size_t>(c)];
      const auto& pa = MA.at(x / nb, y / nb);
      const auto& pb = MB.at(x % nb, y % nb);
      if (!pa.is_zero() && !pb.is_zero()) K.at(r, c) = pa * pb;
    }
  BGSystem T = parse_assembled(K);
  // Carry symbolic tags: eigenvalues multiply, so the classes add.
  int coord = 0;
  for (auto& blk : T.blocks)
    for (int i = 0; i < blk.rank(); ++i, ++coord) {
      const int x = order[static_cast<size_t>(coord)];
      const int ba = A.block_of(x / nb), bb = B.block_of(x % nb);
      const auto& sa = A.blocks[static_cast<size_t>(ba)].sym[static_cast<size_t>(x / nb - A.offset(ba))];
      const auto& sb = B.blocks[static_cast<size_t>(bb)].sym[static_cast<size_t>(x % nb - B.offset(bb))];
      if (sa && sb) blk.sym[static_cast<size_t>(i)] = *sa + *sb;
    }
  T.lattice_values = A.lattice_values;
  for (const auto& [k, v] : B.lattice_values) T.lattice_values.emplace(k, v);
  return T;
}

}  // namespace qdg::bg

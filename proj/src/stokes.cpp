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

#include "qdg/stokes.hpp"

#include <algorithm>
#include <numeric>

namespace qdg::stokes {

using bg::BGSystem;

namespace {

constexpr double kFrameSeparation = 0.05;
constexpr double kRankTol = 1e-8;

int level_of(const BGSystem& A, int i, int j) {
  return A.blocks[static_cast<size_t>(j)].mu - A.blocks[static_cast<size_t>(i)].mu;
}

// Block pairs i < j sorted by level, then by position.
std::vector<BlockKey> pairs_by_level(const BGSystem& A) {
  std::vector<BlockKey> out;
  for (int i = 0; i < A.num_blocks(); ++i)
    for (int j = i + 1; j < A.num_blocks(); ++j) out.emplace_back(i, j);
  std::stable_sort(out.begin(), out.end(), [&](const BlockKey& x, const BlockKey& y) {
    return level_of(A, x.first, x.second) < level_of(A, y.first, y.second);
  });
  return out;
}

MatSeries mul_scalar(const MatSeries& a, const std::vector<cd>& s, int slo, int lo, int hi) {
  if (a.empty() || s.empty()) return {a.rows, a.cols, 0, {}};
  const int L = std::max(lo, a.lo + slo);
  const int H = std::min(hi, a.hi() + slo + static_cast<int>(s.size()) - 1);
  if (L > H) return {a.rows, a.cols, 0, {}};
  MatSeries out = MatSeries::zero(a.rows, a.cols, L, H);
  for (int n = a.lo; n <= a.hi(); ++n) {
    const CMat& an = a.c[static_cast<size_t>(n - a.lo)];
    for (size_t k = 0; k < s.size(); ++k) {
      const int m = n + slo + static_cast<int>(k);
      if (m < L || m > H) continue;
      out.c[static_cast<size_t>(m - L)] += s[k] * an;
    }
  }
  return out;
}

std::vector<cd> scalar_mul(const std::vector<cd>& a, int alo, const std::vector<cd>& b, int blo, int lo, int hi,
                           int& out_lo) {
  const int L = std::max(lo, alo + blo);
  const int H = std::min(hi, alo + blo + static_cast<int>(a.size() + b.size()) - 2);
  out_lo = L;
  if (L > H) return {};
  std::vector<cd> out(static_cast<size_t>(H - L + 1), 0.0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) {
      const int m = alo + blo + static_cast<int>(i + j);
      if (m >= L && m <= H) out[static_cast<size_t>(m - L)] += a[i] * b[j];
    }
  return out;
}

// Solves lam q^n X B - A X = V for X.
CMat sylvester(cd factor, const CMat& A, const CMat& B, const CMat& V) {
  const long r = A.rows(), c = B.cols();
  CMat M = factor * kron(B.transpose(), CMat::Identity(r, r)) - kron(CMat::Identity(c, c), A);
  CVec v = Eigen::Map<const CVec>(V.data(), r * c);
  CVec x = M.partialPivLu().solve(v);
  return Eigen::Map<CMat>(x.data(), r, c);
}

bool blocks_equal(const bg::PureBlock& x, const bg::PureBlock& y) {
  if (x.mu != y.mu || x.rank() != y.rank()) return false;
  return (x.matrix() - y.matrix()).norm() <= 1e-12 * (1.0 + x.matrix().norm());
}

bool poly_matrix_equal(const MatrixLP* x, const MatrixLP* y) {
  auto is_zero = [](const MatrixLP* m) {
    if (!m) return true;
    return std::all_of(m->e.begin(), m->e.end(), [](const LaurentPoly& p) { return p.is_zero(); });
  };
  if (is_zero(x) && is_zero(y)) return true;
  if (!x || !y || x->rows != y->rows || x->cols != y->cols) return false;
  for (size_t k = 0; k < x->e.size(); ++k) {
    const auto d = (x->e[k] - y->e[k]).normalized(1e-14);
    for (cd c : d.coeffs)
      if (std::abs(c) > 1e-12) return false;
  }
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// Series

MatSeries MatSeries::zero(int rows, int cols, int lo, int hi) {
  MatSeries s{rows, cols, lo, {}};
  if (hi >= lo) s.c.assign(static_cast<size_t>(hi - lo + 1), CMat::Zero(rows, cols));
  return s;
}

MatSeries MatSeries::identity(int n) { return {n, n, 0, {CMat::Identity(n, n)}}; }

MatSeries MatSeries::from_poly(const MatrixLP& m) {
  int lo = 0, hi = -1;
  bool any = false;
  for (const auto& p : m.e) {
    if (p.is_zero()) continue;
    if (!any) {
      lo = p.lowest();
      hi = p.highest();
      any = true;
    } else {
      lo = std::min(lo, p.lowest());
      hi = std::max(hi, p.highest());
    }
  }
  if (!any) return {m.rows, m.cols, 0, {}};
  MatSeries s = zero(m.rows, m.cols, lo, hi);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j)
      for (int n = lo; n <= hi; ++n) s.c[static_cast<size_t>(n - lo)](i, j) = m.at(i, j).coeff(n);
  return s;
}

MatSeries MatSeries::scalar(const std::vector<cd>& coeffs, int lo, int n) {
  MatSeries s{n, n, lo, {}};
  for (cd v : coeffs) s.c.push_back(v * CMat::Identity(n, n));
  return s;
}

CMat MatSeries::coeff(int n) const {
  if (n < lo || n > hi()) return CMat::Zero(rows, cols);
  return c[static_cast<size_t>(n - lo)];
}

CMat MatSeries::eval(cd z) const {
  CMat out = CMat::Zero(rows, cols);
  if (c.empty()) return out;
  // Horner in z from the top, then scale by z^lo.
  for (int n = hi(); n >= lo; --n) out = out * z + c[static_cast<size_t>(n - lo)];
  return out * ipow(z, lo);
}

double MatSeries::max_norm() const {
  double m = 0.0;
  for (const auto& x : c) m = std::max(m, x.norm());
  return m;
}

MatSeries mul(const MatSeries& a, const MatSeries& b, int lo, int hi) {
  if (a.empty() || b.empty()) return {a.rows, b.cols, 0, {}};
  const int L = std::max(lo, a.lo + b.lo), H = std::min(hi, a.hi() + b.hi());
  if (L > H) return {a.rows, b.cols, 0, {}};
  MatSeries out = MatSeries::zero(a.rows, b.cols, L, H);
  for (int i = a.lo; i <= a.hi(); ++i) {
    const CMat& ai = a.c[static_cast<size_t>(i - a.lo)];
    if (ai.isZero(0.0)) continue;
    const int jlo = std::max(b.lo, L - i), jhi = std::min(b.hi(), H - i);
    for (int j = jlo; j <= jhi; ++j) out.c[static_cast<size_t>(i + j - L)] += ai * b.c[static_cast<size_t>(j - b.lo)];
  }
  return out;
}

MatSeries add(const MatSeries& a, const MatSeries& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  const int L = std::min(a.lo, b.lo), H = std::max(a.hi(), b.hi());
  MatSeries out = MatSeries::zero(a.rows, a.cols, L, H);
  for (int n = L; n <= H; ++n) out.c[static_cast<size_t>(n - L)] = a.coeff(n) + b.coeff(n);
  return out;
}

MatSeries shift(const MatSeries& a, int k) {
  MatSeries out = a;
  out.lo += k;
  return out;
}

std::vector<cd> theta_window(cd lambda, int N, const QContext& ctx) {
  std::vector<cd> t;
  const cd ll = std::log(lambda);
  for (int n = -N; n <= N; ++n) t.push_back(std::exp(-0.5 * n * (n + 1.0) * ctx.log_q - static_cast<double>(n) * ll));
  return t;
}

// ---------------------------------------------------------------------------
// Formal gauge

CMat FormalGauge::coefficient(int m) const {
  const int n = base.rank();
  CMat out = (m == 0) ? CMat(CMat::Identity(n, n)) : CMat(CMat::Zero(n, n));
  for (const auto& [key, s] : blocks) {
    CMat c = s.coeff(m);
    out.block(base.offset(key.first), base.offset(key.second), c.rows(), c.cols()) += c;
  }
  return out;
}

double FormalGauge::residual(const QContext& ctx) const {
  const MatrixLP A = base.assemble();
  const MatrixLP A0 = bg::gr(base).assemble();
  const int n = base.rank();
  int mu_min = base.blocks.front().mu, mu_max = base.blocks.back().mu;
  auto coeff_of = [&](const MatrixLP& M, int k) {
    CMat out(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out(i, j) = M.at(i, j).coeff(k);
    return out;
  };
  double worst = 0.0;
  for (int m = mu_min; m <= order + mu_min; ++m) {
    CMat lhs = CMat::Zero(n, n), rhs = CMat::Zero(n, n);
    double scale = 0.0;
    for (int e = mu_min; e <= mu_max; ++e) {
      const int k = m - e;
      if (k < 0 || k > order) continue;
      CMat Fk = coefficient(k);
      CMat t1 = ipow(ctx.q, k) * Fk * coeff_of(A0, e);
      CMat t2 = coeff_of(A, e) * Fk;
      lhs += t1;
      rhs += t2;
      scale = std::max({scale, t1.norm(), t2.norm()});
    }
    if (scale > 0.0) worst = std::max(worst, (lhs - rhs).norm() / scale);
  }
  return worst;
}

FormalGauge formal_gauge(const BGSystem& A, int order, const QContext& ctx) {
  A.validate();
  if (order < 0) fail(ErrorKind::Domain, "formal_gauge: order must be nonnegative");
  FormalGauge F{A, order, {}};
  for (auto [i, j] : pairs_by_level(A)) {
    const auto& bi = A.blocks[static_cast<size_t>(i)];
    const auto& bj = A.blocks[static_cast<size_t>(j)];
    const int delta = bj.mu - bi.mu;
    // r = z^{-mu_i} sum_{k > i} U_ik F_kj, with F_jj = I.
    MatSeries r = MatSeries::zero(bi.rank(), bj.rank(), 0, order);
    for (int k = i + 1; k <= j; ++k) {
      const MatrixLP* U = A.off_diagonal(i, k);
      if (!U) continue;
      MatSeries u = shift(MatSeries::from_poly(*U), -bi.mu);
      const MatSeries Fkj = (k == j) ? MatSeries::identity(bj.rank()) : F.blocks.at({k, j});
      r = add(r, mul(u, Fkj, 0, order));
    }
    const CMat Ai = bi.matrix(), Aj = bj.matrix();
    const CMat Ai_inv = Ai.inverse();
    MatSeries f = MatSeries::zero(bi.rank(), bj.rank(), 0, order);
    for (int m = 0; m <= order; ++m) {
      CMat prev = (m - delta >= 0) ? CMat(ipow(ctx.q, m - delta) * f.c[static_cast<size_t>(m - delta)] * Aj)
                                   : CMat::Zero(bi.rank(), bj.rank());
      f.c[static_cast<size_t>(m)] = Ai_inv * (prev - r.coeff(m));
    }
    F.blocks[{i, j}] = f;
  }
  return F;
}

double gevrey_level_fit(const MatSeries& s, const QContext& ctx) {
  std::vector<double> ks, ys;
  for (int n = s.lo; n <= s.hi(); ++n) {
    const double v = s.coeff(n).norm();
    if (v > 0.0 && std::isfinite(v)) {
      ks.push_back(n);
      ys.push_back(std::log(v));
    }
  }
  if (ks.size() < 4) fail(ErrorKind::Domain, "gevrey_level_fit: not enough nonzero coefficients");
  Eigen::MatrixXd X(static_cast<long>(ks.size()), 3);
  Eigen::VectorXd y(static_cast<long>(ks.size()));
  for (size_t t = 0; t < ks.size(); ++t) {
    X(static_cast<long>(t), 0) = 1.0;
    X(static_cast<long>(t), 1) = ks[t];
    X(static_cast<long>(t), 2) = ks[t] * ks[t];
    y(static_cast<long>(t)) = ys[t];
  }
  Eigen::Vector3d beta = X.colPivHouseholderQr().solve(y);
  return std::log(ctx.abs_q()) / (2.0 * beta(2));
}

// ---------------------------------------------------------------------------
// Summation

bool is_resonant(const BGSystem& A, cd lambda, const QContext& ctx) {
  for (int i = 0; i < A.num_blocks(); ++i)
    for (int j = i + 1; j < A.num_blocks(); ++j) {
      const cd ld = ipow(lambda, level_of(A, i, j));
      for (cd d : A.blocks[static_cast<size_t>(i)].eigen)
        for (cd e : A.blocks[static_cast<size_t>(j)].eigen)
          if (eq_distance(d / (e * ld), 1.0, ctx) < ctx.resonance_eps) return true;
    }
  return false;
}

SummedGauge sum_direction(const BGSystem& A, cd lambda, const QContext& ctx) {
  A.validate();
  if (lambda == cd(0.0)) fail(ErrorKind::Domain, "sum_direction: direction must be nonzero");
  if (is_resonant(A, lambda, ctx)) fail(ErrorKind::ProhibitedDirection, "sum_direction: direction lies in the prohibited set");
  const int N = ctx.laurent_window;
  SummedGauge S{lambda, A, {}, {}};
  const std::vector<cd> T = theta_window(lambda, N, ctx);
  // Powers of theta(z / lambda) on the window.
  const int max_level = A.blocks.back().mu - A.blocks.front().mu;
  std::vector<std::vector<cd>> Tpow{{1.0}};
  std::vector<int> Tlo{0};
  for (int m = 1; m <= max_level; ++m) {
    int lo = 0;
    Tpow.push_back(scalar_mul(Tpow.back(), Tlo.back(), T, -N, -N, N, lo));
    Tlo.push_back(lo);
  }
  for (auto [i, j] : pairs_by_level(A)) {
    const auto& bi = A.blocks[static_cast<size_t>(i)];
    const auto& bj = A.blocks[static_cast<size_t>(j)];
    const int delta = bj.mu - bi.mu;
    S.level[{i, j}] = delta;
    // V = z^{-mu_i} sum_{k > i} U_ik G_kj T^{mu_k - mu_i}, with G_jj = I.
    MatSeries V{bi.rank(), bj.rank(), 0, {}};
    for (int k = i + 1; k <= j; ++k) {
      const MatrixLP* U = A.off_diagonal(i, k);
      if (!U) continue;
      MatSeries u = shift(MatSeries::from_poly(*U), -bi.mu);
      const MatSeries Gkj = (k == j) ? MatSeries::identity(bj.rank()) : S.G.at({k, j});
      const int p = A.blocks[static_cast<size_t>(k)].mu - bi.mu;
      MatSeries term = mul_scalar(mul(u, Gkj, -N, N), Tpow[static_cast<size_t>(p)], Tlo[static_cast<size_t>(p)], -N, N);
      V = add(V, term);
    }
    MatSeries G = MatSeries::zero(bi.rank(), bj.rank(), -N, N);
    if (!V.empty()) {
      const CMat Ai = bi.matrix(), Aj = bj.matrix();
      const cd ld = ipow(lambda, delta);
      for (int n = -N; n <= N; ++n) {
        const CMat Vn = V.coeff(n);
        if (Vn.isZero(0.0)) continue;
        G.c[static_cast<size_t>(n + N)] = sylvester(ld * ipow(ctx.q, n), Ai, Aj, Vn);
      }
    }
    S.G[{i, j}] = G;
  }
  return S;
}

CMat SummedGauge::eval(cd z, const QContext& ctx) const { return eval_level(z, 0, ctx); }

CMat SummedGauge::eval_level(cd z, int delta, const QContext& ctx) const {
  const int n = base.rank();
  CMat F = (delta == 0) ? CMat(CMat::Identity(n, n)) : CMat(CMat::Zero(n, n));
  if (G.empty()) return F;
  const cd t = special::theta(z / lambda, ctx);
  if (std::abs(t) < 1e-300) fail(ErrorKind::Pole, "summed gauge evaluated on its pole spiral");
  for (const auto& [key, g] : G) {
    const int lev = level.at(key);
    if (delta != 0 && lev != delta) continue;
    CMat v = g.eval(z) / ipow(t, lev);
    F.block(base.offset(key.first), base.offset(key.second), v.rows(), v.cols()) = v;
  }
  return F;
}

SummationReport verify_summation(const SummedGauge& S, const QContext& ctx) {
  SummationReport rep;
  const MatrixLP A = S.base.assemble();
  const MatrixLP A0 = bg::gr(S.base).assemble();
  const double lq = std::log(ctx.abs_q());
  for (int ir = 0; ir < 4; ++ir)
    for (int ip = 0; ip < 7; ++ip) {
      cd z = std::exp((0.1 + 0.25 * ir) * lq + cd(0.0, -2.9 + 0.83 * ip));
      if (eq_distance(-z, S.lambda, ctx) < 1e-2 || eq_distance(-ctx.q * z, S.lambda, ctx) < 1e-2) continue;
      CMat l = S.eval(ctx.q * z, ctx) * eval(A0, z);
      CMat r = eval(A, z) * S.eval(z, ctx);
      rep.residual = std::max(rep.residual, (l - r).norm() / (l.norm() + r.norm()));
    }
  int max_level = 0;
  for (const auto& [k, lev] : S.level) max_level = std::max(max_level, lev);
  for (int k = 0; k < 2; ++k) {
    const cd zp = -S.lambda * ipow(ctx.q, k);
    const cd dir = std::exp(cd(0.0, 0.7));
    const double n1 = S.eval(zp * (1.0 + 1e-3 * dir), ctx).norm();
    const double n2 = S.eval(zp * (1.0 + 1e-4 * dir), ctx).norm();
    rep.max_pole_order = std::max(rep.max_pole_order, std::log10(n2 / n1));
  }
  rep.ok = rep.residual < ctx.eps_num && rep.max_pole_order <= max_level + 0.2;
  return rep;
}

CMat stokes_operator(const BGSystem& A, cd c, cd d, cd a, const QContext& ctx) {
  for (cd dir : {c, d})
    if (on_spiral(a, -dir, ctx, 1e-9)) fail(ErrorKind::Pole, "stokes_operator: evaluation point on a pole spiral");
  CMat Fc = sum_direction(A, c, ctx).eval(a, ctx);
  CMat Fd = sum_direction(A, d, ctx).eval(a, ctx);
  return Fc.inverse() * Fd;
}

// ---------------------------------------------------------------------------
// Residues

Frame default_frame(const BGSystem& A, const QContext& ctx) {
  const auto sigma = bg::sigma_set(bg::gr(A), ctx);
  const double lq = std::log(ctx.abs_q());
  auto far_from = [&](cd x, const std::vector<cd>& pts) {
    for (cd p : pts)
      if (eq_distance(x, p, ctx) < kFrameSeparation) return false;
    return true;
  };
  std::vector<cd> sig;
  for (const auto& p : sigma) sig.push_back(p.rep);
  const double ts[] = {0.37, 0.61, 0.23, 0.79};
  const double ph[] = {1.13, 2.71, -0.83, -2.29};
  const double ta[] = {0.53, 0.29, 0.71, 0.11};
  const double pa[] = {0.47, -1.9, 2.2, -0.3};
  for (double t : ts)
    for (double p : ph) {
      const cd c0 = std::exp(t * lq + cd(0.0, p));
      if (!far_from(c0, sig)) continue;
      std::vector<cd> avoid = sig;
      avoid.push_back(c0);
      for (double u : ta)
        for (double v : pa) {
          const cd a = std::exp(u * lq + cd(0.0, v));
          if (far_from(-a, avoid)) return {c0, a};
        }
    }
  fail(ErrorKind::Domain, "default_frame: no generic base point found");
}

CMat residue_quadrature(const std::function<CMat(cd)>& f, cd alpha, double radius, int points) {
  CMat acc;
  for (int j = 0; j < points; ++j) {
    const cd s = radius * std::exp(cd(0.0, 2.0 * kPi * (j + 0.5) / points));
    CMat v = f(alpha * (1.0 + s)) * s;
    if (j == 0) acc = v;
    else acc += v;
  }
  return acc / static_cast<double>(points);
}

namespace {

bool closed_form_applies(const BGSystem& A) {
  if (A.num_blocks() != 2) return false;
  for (const auto& b : A.blocks)
    if (!b.unipotent.isIdentity(1e-14)) return false;
  return true;
}

CMat closed_form_residue(const BGSystem& A, cd alpha, cd a, const QContext& ctx) {
  const int n = A.rank();
  CMat R = CMat::Zero(n, n);
  const MatrixLP* U = A.off_diagonal(0, 1);
  if (!U) return R;
  const auto& b0 = A.blocks[0];
  const auto& b1 = A.blocks[1];
  const int delta = b1.mu - b0.mu;
  const int N = ctx.laurent_window;
  const std::vector<cd> T = theta_window(alpha, N, ctx);
  std::vector<cd> Td{1.0};
  int Tdlo = 0;
  for (int m = 0; m < delta; ++m) {
    int lo = 0;
    Td = scalar_mul(Td, Tdlo, T, -N, -N, N, lo);
    Tdlo = lo;
  }
  const MatSeries V = mul_scalar(shift(MatSeries::from_poly(*U), -b0.mu), Td, Tdlo, -N, N);
  const cd ad = ipow(alpha, delta);
  const cd th = ipow(special::theta(a / alpha, ctx), delta);
  for (int r = 0; r < b0.rank(); ++r)
    for (int c = 0; c < b1.rank(); ++c) {
      const cd d = b0.eigen[static_cast<size_t>(r)], e = b1.eigen[static_cast<size_t>(c)];
      const cd w = d / (e * ad);
      const long long n0 = std::llround((std::log(w) / ctx.log_q).real());
      if (std::abs(w * ipow(ctx.q, -n0) - 1.0) > 1e-6) continue;  // not resonant for this entry
      if (n0 < -N || n0 > N) fail(ErrorKind::Domain, "alien_residue: resonant index outside the window");
      const cd denom = static_cast<double>(delta) * ad * ipow(ctx.q, n0) * e;
      R(r, b0.rank() + c) = V.coeff(static_cast<int>(n0))(r, c) * ipow(a, n0) / (denom * th);
    }
  return R;
}

}  // namespace

AlienValue alien_residue(const BGSystem& A, cd alpha, const Frame& frame, const QContext& ctx, ResidueMethod method) {
  if (eq_distance(alpha, frame.c0, ctx) < std::max(ctx.resonance_eps, 2e-3))
    fail(ErrorKind::ProhibitedDirection, "alien_residue: alpha is too close to the base direction");
  if (on_spiral(frame.a, -alpha, ctx, 1e-2) || on_spiral(frame.a, -frame.c0, ctx, 1e-9))
    fail(ErrorKind::Pole, "alien_residue: evaluation point on a pole spiral");
  AlienValue out;
  out.alpha = alpha;
  if (method == ResidueMethod::ClosedForm && !closed_form_applies(A))
    fail(ErrorKind::Precondition, "alien_residue: closed form needs two diagonal blocks");
  if (method == ResidueMethod::ClosedForm || (method == ResidueMethod::Auto && closed_form_applies(A))) {
    out.value = closed_form_residue(A, alpha, frame.a, ctx);
  } else {
    const CMat Fc_inv = sum_direction(A, frame.c0, ctx).eval(frame.a, ctx).inverse();
    out.value = residue_quadrature(
        [&](cd beta) { return CMat(nilpotent_log(Fc_inv * sum_direction(A, beta, ctx).eval(frame.a, ctx))); }, alpha);
  }
  for (const auto& cell : bg::g_decompose(bg::gr(A), ctx)) {
    CMat m = CMat::Zero(out.value.rows(), out.value.cols());
    for (const auto& e : cell.entries) m(e.row, e.col) = out.value(e.row, e.col);
    out.components.emplace_back(cell, m);
  }
  return out;
}

CMat level_part(const BGSystem& A, const CMat& m, int delta) {
  CMat out = CMat::Zero(m.rows(), m.cols());
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) {
      const int bi = A.block_of(r), bj = A.block_of(c);
      if (bi < bj && level_of(A, bi, bj) == delta) out(r, c) = m(r, c);
    }
  return out;
}

LevelDifference level_difference(const BGSystem& A, const BGSystem& A2, int delta, cd alpha, const Frame& frame,
                                 const QContext& ctx) {
  A.validate();
  A2.validate();
  if (A.num_blocks() != A2.num_blocks()) fail(ErrorKind::Precondition, "level_difference: block structures differ");
  for (int k = 0; k < A.num_blocks(); ++k)
    if (!blocks_equal(A.blocks[static_cast<size_t>(k)], A2.blocks[static_cast<size_t>(k)]))
      fail(ErrorKind::Precondition, "level_difference: graded parts differ");
  for (int i = 0; i < A.num_blocks(); ++i)
    for (int j = i + 1; j < A.num_blocks(); ++j)
      if (level_of(A, i, j) < delta && !poly_matrix_equal(A.off_diagonal(i, j), A2.off_diagonal(i, j)))
        fail(ErrorKind::Precondition, "level_difference: systems differ below the level");
  LevelDifference out;
  const CMat r1 = alien_residue(A, alpha, frame, ctx, ResidueMethod::Quadrature).value;
  const CMat r2 = alien_residue(A2, alpha, frame, ctx, ResidueMethod::Quadrature).value;
  out.lhs = level_part(A, r2 - r1, delta);
  out.rhs = level_part(A,
                       residue_quadrature(
                           [&](cd beta) {
                             CMat F2 = sum_direction(A2, beta, ctx).eval(frame.a, ctx);
                             CMat F1 = sum_direction(A, beta, ctx).eval(frame.a, ctx);
                             return CMat(F2 * F1.inverse());
                           },
                           alpha),
                       delta);
  out.discrepancy = (out.lhs - out.rhs).norm() / std::max(1.0, out.lhs.norm());
  return out;
}

// ---------------------------------------------------------------------------
// Residue map and class realization

std::vector<cd> root_candidates(cd cls, int delta, const QContext& ctx) {
  const cd r0 = std::exp(std::log(cls) / static_cast<double>(delta));
  std::vector<cd> out;
  for (int m = 0; m < delta; ++m)
    for (int k = 0; k < delta; ++k)
      out.push_back(r0 * std::exp(cd(0.0, 2.0 * kPi * k / delta) + ctx.log_q * (static_cast<double>(m) / delta)));
  return out;
}

std::vector<cd> default_pointed(cd cls, int delta, const QContext& ctx) {
  const cd r0 = std::exp(std::log(cls) / static_cast<double>(delta));
  std::vector<cd> out;
  for (int k = 0; k < delta; ++k) out.push_back(r0 * std::exp(ctx.log_q * (static_cast<double>(k) / delta)));
  return out;
}

BGSystem with_level_coefficients(const BGSystem& A, const ResidueMap& map, const CVec& x) {
  BGSystem B = A;
  // Clear the level first so that absent unknowns are zero.
  for (int i = 0; i < B.num_blocks(); ++i)
    for (int j = i + 1; j < B.num_blocks(); ++j)
      if (level_of(B, i, j) == map.delta) B.U.erase({i, j});
  std::map<std::tuple<int, int, int, int>, std::vector<cd>> coeffs;
  for (size_t u = 0; u < map.unknowns.size(); ++u) {
    const auto& k = map.unknowns[u];
    auto& v = coeffs[{k.bi, k.bj, k.row, k.col}];
    const int mu_i = B.blocks[static_cast<size_t>(k.bi)].mu;
    if (v.empty()) v.assign(static_cast<size_t>(map.delta), 0.0);
    v[static_cast<size_t>(k.exponent - mu_i)] = x(static_cast<long>(u));
  }
  for (const auto& [key, v] : coeffs) {
    auto [bi, bj, r, c] = key;
    auto it = B.U.find({bi, bj});
    if (it == B.U.end())
      it = B.U.emplace(BlockKey{bi, bj}, MatrixLP(B.blocks[static_cast<size_t>(bi)].rank(),
                                                  B.blocks[static_cast<size_t>(bj)].rank()))
               .first;
    it->second.at(r, c) = LaurentPoly(B.blocks[static_cast<size_t>(bi)].mu, v);
  }
  return B;
}

namespace {

// Level-delta residues at one pointed point, restricted to the coordinates of one cell.
CVec cell_residues(const BGSystem& B, const bg::GradedCell& cell, cd alpha, int delta, const Frame& frame,
                   const QContext& ctx) {
  const CMat R = level_part(B, alien_residue(B, alpha, frame, ctx).value, delta);
  CVec v(static_cast<long>(cell.entries.size()));
  for (size_t e = 0; e < cell.entries.size(); ++e) v(static_cast<long>(e)) = R(cell.entries[e].row, cell.entries[e].col);
  return v;
}

bool unknown_in_cell(const BGSystem& A, const Unknown& u, const bg::GradedCell& cell) {
  const int r = A.offset(u.bi) + u.row, c = A.offset(u.bj) + u.col;
  return std::any_of(cell.entries.begin(), cell.entries.end(), [&](const auto& e) { return e.row == r && e.col == c; });
}

int equilibrated_rank(CMat M) {
  for (long r = 0; r < M.rows(); ++r) {
    const double n = M.row(r).norm();
    if (n > 0.0) M.row(r) /= n;
  }
  return numeric_rank(M, kRankTol);
}

// Block of the map for one cell and one set of pointed points: rows cell x points, columns of the cell.
CMat cell_block(const BGSystem& base, const std::vector<BGSystem>& perturbed, const std::vector<int>& cols,
                const bg::GradedCell& cell, const std::vector<cd>& pts, int delta, const Frame& frame,
                const QContext& ctx, CVec& offset) {
  const long d = static_cast<long>(cell.entries.size());
  CMat M(d * static_cast<long>(pts.size()), static_cast<long>(cols.size()));
  offset.resize(M.rows());
  for (size_t k = 0; k < pts.size(); ++k) {
    CVec b = cell_residues(base, cell, pts[k], delta, frame, ctx);
    offset.segment(static_cast<long>(k) * d, d) = b;
    for (size_t c = 0; c < cols.size(); ++c)
      M.block(static_cast<long>(k) * d, static_cast<long>(c), d, 1) =
          cell_residues(perturbed[static_cast<size_t>(cols[c])], cell, pts[k], delta, frame, ctx) - b;
  }
  return M;
}

}  // namespace

ResidueMap residue_map(const BGSystem& A, int delta, const Frame& frame, const QContext& ctx,
                       const std::map<int, std::vector<cd>>& overrides) {
  A.validate();
  if (delta <= 0) fail(ErrorKind::Domain, "residue_map: level must be positive");
  ResidueMap map;
  map.delta = delta;
  for (const auto& cell : bg::g_decompose(bg::gr(A), ctx))
    if (cell.level == delta) map.cells.push_back(cell);
  for (int i = 0; i < A.num_blocks(); ++i)
    for (int j = i + 1; j < A.num_blocks(); ++j) {
      if (level_of(A, i, j) != delta) continue;
      for (int r = 0; r < A.blocks[static_cast<size_t>(i)].rank(); ++r)
        for (int c = 0; c < A.blocks[static_cast<size_t>(j)].rank(); ++c)
          for (int e = A.blocks[static_cast<size_t>(i)].mu; e < A.blocks[static_cast<size_t>(j)].mu; ++e)
            map.unknowns.push_back({i, j, r, c, e});
    }
  const long nu = static_cast<long>(map.unknowns.size());
  const BGSystem base = with_level_coefficients(A, map, CVec::Zero(nu));
  std::vector<BGSystem> perturbed;
  for (long u = 0; u < nu; ++u) {
    CVec x = CVec::Zero(nu);
    x(u) = 1.0;
    perturbed.push_back(with_level_coefficients(A, map, x));
  }
  map.M = CMat::Zero(0, nu);
  map.offset = CVec::Zero(0);
  for (size_t ci = 0; ci < map.cells.size(); ++ci) {
    const auto& cell = map.cells[ci];
    std::vector<int> cols;
    for (long u = 0; u < nu; ++u)
      if (unknown_in_cell(A, map.unknowns[static_cast<size_t>(u)], cell)) cols.push_back(static_cast<int>(u));
    const int want = static_cast<int>(cols.size());
    std::vector<cd> pts;
    CVec off;
    CMat blk;
    int rk = 0;
    auto it = overrides.find(static_cast<int>(ci));
    if (it != overrides.end()) {
      pts = it->second;
      if (static_cast<int>(pts.size()) != delta) fail(ErrorKind::Precondition, "residue_map: need delta pointed points");
      for (size_t a = 0; a < pts.size(); ++a) {
        if (eq_distance(ipow(pts[a], delta), cell.cls.rep, ctx) > 1e-8)
          fail(ErrorKind::Precondition, "residue_map: pointed point is not a delta-th root of the class");
        for (size_t b = a + 1; b < pts.size(); ++b)
          if (eq_distance(pts[a], pts[b], ctx) < 1e-8) fail(ErrorKind::Precondition, "residue_map: repeated pointed points");
      }
      blk = cell_block(base, perturbed, cols, cell, pts, delta, frame, ctx, off);
      rk = equilibrated_rank(blk);
    } else {
      pts = default_pointed(cell.cls.rep, delta, ctx);
      blk = cell_block(base, perturbed, cols, cell, pts, delta, frame, ctx, off);
      rk = equilibrated_rank(blk);
      if (rk < want) {
        // Enumerate delta-subsets of the delta^2 candidates.
        const auto cand = root_candidates(cell.cls.rep, delta, ctx);
        std::vector<int> pick(static_cast<size_t>(delta));
        std::iota(pick.begin(), pick.end(), 0);
        const int nc = static_cast<int>(cand.size());
        bool found = false;
        while (!found) {
          std::vector<cd> trial;
          for (int p : pick) trial.push_back(cand[static_cast<size_t>(p)]);
          CVec toff;
          CMat tblk = cell_block(base, perturbed, cols, cell, trial, delta, frame, ctx, toff);
          const int trk = equilibrated_rank(tblk);
          if (trk == want) {
            pts = trial;
            blk = tblk;
            off = toff;
            rk = trk;
            found = true;
            break;
          }
          // Next combination.
          int t = delta - 1;
          while (t >= 0 && pick[static_cast<size_t>(t)] == nc - delta + t) --t;
          if (t < 0) break;
          ++pick[static_cast<size_t>(t)];
          for (int s = t + 1; s < delta; ++s) pick[static_cast<size_t>(s)] = pick[static_cast<size_t>(s - 1)] + 1;
        }
      }
    }
    map.pointed.push_back(pts);
    map.cell_rank.push_back(rk);
    // Scatter the cell block into the full map.
    const long r0 = map.M.rows();
    CMat M2 = CMat::Zero(r0 + blk.rows(), nu);
    M2.topRows(r0) = map.M;
    for (size_t c = 0; c < cols.size(); ++c) M2.block(r0, cols[c], blk.rows(), 1) = blk.col(static_cast<long>(c));
    map.M = M2;
    CVec o2(r0 + off.size());
    o2 << map.offset, off;
    map.offset = o2;
    for (size_t k = 0; k < pts.size(); ++k)
      for (const auto& e : cell.entries) map.rows.push_back({static_cast<int>(ci), static_cast<int>(k), e.row, e.col});
  }
  map.rank = map.M.rows() > 0 ? equilibrated_rank(map.M) : 0;
  return map;
}

namespace {

CVec target_vector(const ResidueMap& map, const std::vector<ClassTarget>& targets, const QContext& ctx) {
  CVec t = CVec::Zero(static_cast<long>(map.rows.size()));
  for (const auto& tg : targets) {
    if (tg.delta != map.delta) continue;
    int ci = -1;
    for (size_t c = 0; c < map.cells.size(); ++c) {
      const auto& cls = map.cells[c].cls;
      const bool same = (tg.cls.sym && cls.sym) ? (*tg.cls.sym == *cls.sym)
                                                : eq_distance(tg.cls.rep, cls.rep, ctx) < 1e-8;
      if (same) ci = static_cast<int>(c);
    }
    if (ci < 0) fail(ErrorKind::Precondition, "realize_class: target class has no cell at its level");
    const auto& cell = map.cells[static_cast<size_t>(ci)];
    if (tg.pointed < 0 || tg.pointed >= map.delta) fail(ErrorKind::Precondition, "realize_class: pointed index out of range");
    for (long r = 0; r < tg.value.rows(); ++r)
      for (long c = 0; c < tg.value.cols(); ++c) {
        if (tg.value(r, c) == cd(0.0)) continue;
        const bool in_cell = std::any_of(cell.entries.begin(), cell.entries.end(),
                                         [&](const auto& e) { return e.row == r && e.col == c; });
        if (!in_cell) fail(ErrorKind::Precondition, "realize_class: target is not supported on its cell");
      }
    for (size_t k = 0; k < map.rows.size(); ++k) {
      const auto& row = map.rows[k];
      if (row.cell == ci && row.pointed == tg.pointed) t(static_cast<long>(k)) = tg.value(row.row, row.col);
    }
  }
  return t;
}

}  // namespace

Realization realize_class(const BGSystem& A0, const std::vector<ClassTarget>& targets, const Frame& frame,
                          const QContext& ctx) {
  Realization out;
  out.system = bg::gr(A0);
  const int n = out.system.rank();
  for (const auto& tg : targets)
    if (tg.value.rows() != n || tg.value.cols() != n) fail(ErrorKind::Precondition, "realize_class: target has the wrong size");
  std::vector<int> levels;
  for (int i = 0; i < out.system.num_blocks(); ++i)
    for (int j = i + 1; j < out.system.num_blocks(); ++j) levels.push_back(level_of(out.system, i, j));
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  for (const auto& tg : targets)
    if (std::find(levels.begin(), levels.end(), tg.delta) == levels.end())
      fail(ErrorKind::Precondition, "realize_class: target level does not occur");
  for (int delta : levels) {
    ResidueMap map = residue_map(out.system, delta, frame, ctx);
    if (map.rank < static_cast<int>(map.unknowns.size()))
      fail(ErrorKind::RankDeficient, "realize_class: residue map at level " + std::to_string(delta) + " is rank deficient");
    const CVec t = target_vector(map, targets, ctx);
    const CVec x = map.M.colPivHouseholderQr().solve(t - map.offset);
    out.system = with_level_coefficients(out.system, map, x);
    out.maps[delta] = std::move(map);
  }
  // Recompute every residue of the output.
  for (const auto& [delta, map] : out.maps) {
    const CVec t = target_vector(map, targets, ctx);
    for (size_t ci = 0; ci < map.cells.size(); ++ci)
      for (size_t k = 0; k < map.pointed[ci].size(); ++k) {
        const CVec got = cell_residues(out.system, map.cells[ci], map.pointed[ci][k], delta, frame, ctx);
        for (size_t e = 0; e < map.cells[ci].entries.size(); ++e) {
          long row = -1;
          for (size_t r = 0; r < map.rows.size(); ++r)
            if (map.rows[r].cell == static_cast<int>(ci) && map.rows[r].pointed == static_cast<int>(k) &&
                map.rows[r].row == map.cells[ci].entries[e].row && map.rows[r].col == map.cells[ci].entries[e].col)
              row = static_cast<long>(r);
          out.max_error = std::max(out.max_error, std::abs(got(static_cast<long>(e)) - t(row)));
        }
      }
  }
  return out;
}

}  // namespace qdg::stokes

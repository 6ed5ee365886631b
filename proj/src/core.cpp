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

#include "qdg/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace qdg {

// ---------------------------------------------------------------------------
// Rational

Rational::Rational(long long num, long long den) {
  if (den == 0) fail(ErrorKind::Domain, "rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  long long g = std::gcd(num < 0 ? -num : num, den);
  if (g == 0) g = 1;
  p = num / g;
  r = den / g;
}

Rational Rational::operator+(const Rational& o) const {
  long long l = std::lcm(r, o.r);
  return Rational(p * (l / r) + o.p * (l / o.r), l);
}
Rational Rational::operator-(const Rational& o) const { return *this + (-o); }
Rational Rational::operator*(const Rational& o) const { return Rational(p * o.p, r * o.r); }
Rational Rational::operator/(const Rational& o) const {
  if (o.p == 0) fail(ErrorKind::Domain, "rational division by zero");
  return Rational(p * o.r, r * o.p);
}
bool Rational::operator<(const Rational& o) const {
  return static_cast<__int128>(p) * o.r < static_cast<__int128>(o.p) * r;
}
Rational Rational::mod1() const {
  long long m = p % r;
  if (m < 0) m += r;
  return Rational(m, r);
}

// ---------------------------------------------------------------------------
// QContext and E_q points

QContext QContext::make(cd q, double eps, int window, int theta_terms, double resonance_eps) {
  if (!(std::abs(q) > 1.0)) fail(ErrorKind::Domain, "QContext requires |q| > 1");
  if (window < 8) fail(ErrorKind::Domain, "laurent_window must be >= 8");
  if (theta_terms < 8) fail(ErrorKind::Domain, "theta_terms must be >= 8");
  if (!(eps > 0.0)) fail(ErrorKind::Domain, "eps_num must be positive");
  QContext ctx;
  ctx.q = q;
  ctx.log_q = std::log(q);
  ctx.tau = ctx.log_q / cd(0.0, -2.0 * kPi);
  ctx.eps_num = eps;
  ctx.laurent_window = window;
  ctx.theta_terms = theta_terms;
  ctx.resonance_eps = resonance_eps;
  return ctx;
}

cd ipow(cd x, long long n) {
  if (n < 0) return cd(1.0) / ipow(x, -n);
  cd result(1.0);
  cd base = x;
  while (n > 0) {
    if (n & 1) result *= base;
    base *= base;
    n >>= 1;
  }
  return result;
}

EqPointNum canonicalize(cd c, const QContext& ctx) {
  if (c == cd(0.0)) fail(ErrorKind::Domain, "canonicalize: zero has no class in E_q");
  const double aq = ctx.abs_q();
  long long k = static_cast<long long>(std::floor(std::log(std::abs(c)) / std::log(aq)));
  cd rep = c * ipow(ctx.q, -k);
  // Correct for rounding at the annulus boundary.
  for (int guard = 0; guard < 4; ++guard) {
    if (std::abs(rep) < 1.0) {
      rep *= ctx.q;
      --k;
    } else if (std::abs(rep) >= aq) {
      rep /= ctx.q;
      ++k;
    } else {
      break;
    }
  }
  return {rep, k};
}

double eq_distance(cd a, cd b, const QContext& ctx) {
  cd u = std::log(a / b);
  const double lq = std::log(ctx.abs_q());
  long long n0 = std::llround(u.real() / lq);
  double best = 1e300;
  for (long long n = n0 - 1; n <= n0 + 1; ++n) {
    cd v = u - static_cast<double>(n) * ctx.log_q;
    double im = std::remainder(v.imag(), 2.0 * kPi);
    best = std::min(best, std::abs(cd(v.real(), im)));
  }
  return best;
}

bool on_spiral(cd c, cd c0, const QContext& ctx, double tol) { return eq_distance(c, c0, ctx) < tol; }

EqPointSym EqPointSym::root_of_unity(long long p, long long r) {
  EqPointSym s;
  s.zeta = Rational(p, r).mod1();
  return s;
}
EqPointSym EqPointSym::q_power(long long p, long long r) {
  EqPointSym s;
  s.qexp = Rational(p, r).mod1();
  return s;
}
EqPointSym EqPointSym::generator(const std::string& name, long long e) {
  EqPointSym s;
  if (e != 0) s.lattice[name] = e;
  return s;
}

EqPointSym EqPointSym::operator+(const EqPointSym& o) const {
  EqPointSym s;
  s.zeta = (zeta + o.zeta).mod1();
  s.qexp = (qexp + o.qexp).mod1();
  s.lattice = lattice;
  for (const auto& [g, e] : o.lattice) {
    long long v = (s.lattice[g] += e);
    if (v == 0) s.lattice.erase(g);
  }
  return s;
}

EqPointSym EqPointSym::operator-() const {
  EqPointSym s;
  s.zeta = (-zeta).mod1();
  s.qexp = (-qexp).mod1();
  for (const auto& [g, e] : lattice) s.lattice[g] = -e;
  return s;
}

bool EqPointSym::operator==(const EqPointSym& o) const {
  return zeta == o.zeta && qexp == o.qexp && lattice == o.lattice;
}

bool EqPointSym::operator<(const EqPointSym& o) const {
  if (zeta != o.zeta) return zeta < o.zeta;
  if (qexp != o.qexp) return qexp < o.qexp;
  return lattice < o.lattice;
}

bool EqPointSym::is_identity() const { return zeta.is_zero() && qexp.is_zero() && lattice.empty(); }

std::string EqPointSym::to_string() const {
  std::ostringstream os;
  os << "(zeta=" << zeta.p << "/" << zeta.r << ", qexp=" << qexp.p << "/" << qexp.r << ", {";
  bool first = true;
  for (const auto& [g, e] : lattice) {
    os << (first ? "" : ",") << g << ":" << e;
    first = false;
  }
  os << "})";
  return os.str();
}

cd EqPointSym::numeric(const QContext& ctx, const std::map<std::string, cd>& values) const {
  cd v = std::exp(cd(0.0, 2.0 * kPi * zeta.to_double())) * std::exp(qexp.to_double() * ctx.log_q);
  for (const auto& [g, e] : lattice) {
    auto it = values.find(g);
    if (it == values.end()) fail(ErrorKind::Domain, "no numeric value for lattice generator " + g);
    v *= ipow(it->second, e);
  }
  return v;
}

EqPointSym sym_pow(const EqPointSym& c, long long n) {
  EqPointSym s;
  s.zeta = (c.zeta * Rational(n)).mod1();
  s.qexp = (c.qexp * Rational(n)).mod1();
  if (n != 0)
    for (const auto& [g, e] : c.lattice) s.lattice[g] = e * n;
  return s;
}

std::optional<EqPointSym> sym_root(const EqPointSym& c, int delta, int k, int m) {
  if (delta <= 0) fail(ErrorKind::Domain, "sym_root: delta must be positive");
  EqPointSym s;
  s.zeta = ((c.zeta + Rational(k)) / Rational(delta)).mod1();
  s.qexp = ((c.qexp + Rational(m)) / Rational(delta)).mod1();
  for (const auto& [g, e] : c.lattice) {
    if (e % delta != 0) return std::nullopt;
    s.lattice[g] = e / delta;
  }
  return s;
}

EqPoint EqPoint::from_numeric(cd c, const QContext& ctx) { return {canonicalize(c, ctx).rep, std::nullopt}; }

EqPoint EqPoint::from_both(cd c, const EqPointSym& s, const QContext& ctx) {
  return {canonicalize(c, ctx).rep, s};
}

bool EqPoint::same_class(const EqPoint& o, const QContext& ctx, double tol) const {
  if (sym && o.sym) return *sym == *o.sym;
  return eq_distance(rep, o.rep, ctx) < tol;
}

// ---------------------------------------------------------------------------
// LaurentPoly

LaurentPoly::LaurentPoly(int off, std::vector<cd> c) : offset(off), coeffs(std::move(c)) {
  *this = normalized(0.0);
}

LaurentPoly LaurentPoly::constant(cd c) { return LaurentPoly(0, {c}); }
LaurentPoly LaurentPoly::monomial(cd c, int k) { return LaurentPoly(k, {c}); }

cd LaurentPoly::coeff(int n) const {
  int i = n - offset;
  if (i < 0 || i >= static_cast<int>(coeffs.size())) return 0.0;
  return coeffs[static_cast<size_t>(i)];
}

cd LaurentPoly::eval(cd z) const {
  if (coeffs.empty()) return 0.0;
  cd acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + *it;
  return acc * ipow(z, offset);
}

LaurentPoly LaurentPoly::normalized(double tol) const {
  double mx = 0.0;
  for (const auto& c : coeffs) mx = std::max(mx, std::abs(c));
  const double thr = tol * mx;
  size_t b = 0, e = coeffs.size();
  while (b < e && std::abs(coeffs[b]) <= thr) ++b;
  while (e > b && std::abs(coeffs[e - 1]) <= thr) --e;
  LaurentPoly out;
  if (b == e) return out;
  out.offset = offset + static_cast<int>(b);
  out.coeffs.assign(coeffs.begin() + static_cast<long>(b), coeffs.begin() + static_cast<long>(e));
  return out;
}

bool LaurentPoly::is_unit(double tol) const {
  LaurentPoly t = normalized(tol);
  return t.coeffs.size() == 1;
}

LaurentPoly LaurentPoly::operator+(const LaurentPoly& o) const {
  if (is_zero()) return o;
  if (o.is_zero()) return *this;
  int lo = std::min(lowest(), o.lowest());
  int hi = std::max(highest(), o.highest());
  std::vector<cd> c(static_cast<size_t>(hi - lo + 1));
  for (int n = lo; n <= hi; ++n) c[static_cast<size_t>(n - lo)] = coeff(n) + o.coeff(n);
  return LaurentPoly(lo, std::move(c));
}

LaurentPoly LaurentPoly::operator-(const LaurentPoly& o) const { return *this + (-o); }

LaurentPoly LaurentPoly::operator*(const LaurentPoly& o) const {
  if (is_zero() || o.is_zero()) return {};
  std::vector<cd> c(coeffs.size() + o.coeffs.size() - 1);
  for (size_t i = 0; i < coeffs.size(); ++i)
    for (size_t j = 0; j < o.coeffs.size(); ++j) c[i + j] += coeffs[i] * o.coeffs[j];
  return LaurentPoly(offset + o.offset, std::move(c));
}

LaurentPoly LaurentPoly::operator*(cd s) const {
  std::vector<cd> c = coeffs;
  for (auto& v : c) v *= s;
  return LaurentPoly(offset, std::move(c));
}

LaurentPoly sigma_q(const LaurentPoly& f, const QContext& ctx) {
  std::vector<cd> c = f.coeffs;
  for (size_t i = 0; i < c.size(); ++i) c[i] *= ipow(ctx.q, f.offset + static_cast<long long>(i));
  return LaurentPoly(f.offset, std::move(c));
}

// ---------------------------------------------------------------------------
// LaurentWindow

namespace {
long long sat(long long v) {
  return std::clamp(v, -LaurentWindow::kInf, LaurentWindow::kInf);
}
}  // namespace

LaurentWindow LaurentWindow::from_poly(const LaurentPoly& p, int N) {
  LaurentWindow w;
  w.lo = p.offset;
  w.c = p.coeffs;
  return w.truncated(N);
}

cd LaurentWindow::coeff(int n) const {
  int i = n - lo;
  if (i < 0 || i >= static_cast<int>(c.size())) return 0.0;
  return c[static_cast<size_t>(i)];
}

cd LaurentWindow::eval(cd z) const {
  cd acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
  return c.empty() ? cd(0.0) : acc * ipow(z, lo);
}

bool LaurentWindow::is_zero() const {
  return std::all_of(c.begin(), c.end(), [](cd v) { return v == cd(0.0); });
}

std::optional<int> LaurentWindow::lowest_nonzero() const {
  for (size_t i = 0; i < c.size(); ++i)
    if (c[i] != cd(0.0)) return lo + static_cast<int>(i);
  return std::nullopt;
}

std::optional<int> LaurentWindow::highest_nonzero() const {
  for (size_t i = c.size(); i-- > 0;)
    if (c[i] != cd(0.0)) return lo + static_cast<int>(i);
  return std::nullopt;
}

LaurentWindow LaurentWindow::truncated(int N) const {
  LaurentWindow w;
  w.valid_lo = valid_lo;
  w.valid_hi = valid_hi;
  w.lo = std::max(lo, -N);
  int h = std::min(hi(), N);
  for (int n = lo; n <= hi(); ++n) {
    if (coeff(n) == cd(0.0)) continue;
    if (n > N) w.valid_hi = std::min<long long>(w.valid_hi, N);
    if (n < -N) w.valid_lo = std::max<long long>(w.valid_lo, -N);
  }
  if (h < w.lo) {
    w.lo = 0;
    return w;
  }
  w.c.assign(static_cast<size_t>(h - w.lo + 1), 0.0);
  for (int n = w.lo; n <= h; ++n) w.c[static_cast<size_t>(n - w.lo)] = coeff(n);
  return w;
}

LaurentWindow add(const LaurentWindow& a, const LaurentWindow& b, int N) {
  LaurentWindow w;
  if (a.c.empty()) w = b;
  else if (b.c.empty()) w = a;
  else {
    w.lo = std::min(a.lo, b.lo);
    int h = std::max(a.hi(), b.hi());
    w.c.assign(static_cast<size_t>(h - w.lo + 1), 0.0);
    for (int n = w.lo; n <= h; ++n) w.c[static_cast<size_t>(n - w.lo)] = a.coeff(n) + b.coeff(n);
  }
  w.valid_lo = std::max(a.valid_lo, b.valid_lo);
  w.valid_hi = std::min(a.valid_hi, b.valid_hi);
  return w.truncated(N);
}

LaurentWindow scale(const LaurentWindow& a, cd s) {
  LaurentWindow w = a;
  for (auto& v : w.c) v *= s;
  return w;
}

LaurentWindow sub(const LaurentWindow& a, const LaurentWindow& b, int N) {
  return add(a, scale(b, -1.0), N);
}

LaurentWindow mul(const LaurentWindow& a, const LaurentWindow& b, int N) {
  LaurentWindow w;
  // Lowest / highest exponent that can carry a nonzero coefficient.
  auto low_bound = [](const LaurentWindow& x) -> long long {
    if (x.valid_lo > -LaurentWindow::kInf) return -LaurentWindow::kInf;
    auto l = x.lowest_nonzero();
    return l ? *l : LaurentWindow::kInf;
  };
  auto high_bound = [](const LaurentWindow& x) -> long long {
    if (x.valid_hi < LaurentWindow::kInf) return LaurentWindow::kInf;
    auto h = x.highest_nonzero();
    return h ? *h : -LaurentWindow::kInf;
  };
  const long long la = low_bound(a), lb = low_bound(b), ha = high_bound(a), hb = high_bound(b);
  auto vh = [](long long v, long long l) {
    if (v >= LaurentWindow::kInf) return LaurentWindow::kInf;
    if (l <= -LaurentWindow::kInf) return -LaurentWindow::kInf;
    return sat(v + l);
  };
  auto vl = [](long long v, long long h) {
    if (v <= -LaurentWindow::kInf) return -LaurentWindow::kInf;
    if (h >= LaurentWindow::kInf) return LaurentWindow::kInf;
    return sat(v + h);
  };
  w.valid_hi = std::min(vh(a.valid_hi, lb), vh(b.valid_hi, la));
  w.valid_lo = std::max(vl(a.valid_lo, hb), vl(b.valid_lo, ha));
  if (a.c.empty() || b.c.empty()) return w;
  w.lo = a.lo + b.lo;
  w.c.assign(a.c.size() + b.c.size() - 1, 0.0);
  for (size_t i = 0; i < a.c.size(); ++i) {
    if (a.c[i] == cd(0.0)) continue;
    for (size_t j = 0; j < b.c.size(); ++j) w.c[i + j] += a.c[i] * b.c[j];
  }
  return w.truncated(N);
}

LaurentWindow inverse(const LaurentWindow& a, int N) {
  if (a.valid_lo > -LaurentWindow::kInf) fail(ErrorKind::Domain, "window inverse needs exactness from below");
  auto l = a.lowest_nonzero();
  if (!l) fail(ErrorKind::Domain, "window inverse of zero");
  const int k = *l;
  const cd a0 = a.coeff(k);
  // Relative precision of a's tail limits how many inverse coefficients are exact.
  const long long top = std::min<long long>(a.valid_hi, LaurentWindow::kInf);
  const long long nmax_exact = top >= LaurentWindow::kInf ? LaurentWindow::kInf : top - k;
  const int nmax = std::max(0, N + k);  // inverse exponents -k .. N
  std::vector<cd> b(static_cast<size_t>(nmax + 1), 0.0);
  b[0] = 1.0 / a0;
  for (int n = 1; n <= nmax; ++n) {
    cd s = 0.0;
    for (int j = 1; j <= n; ++j) s += a.coeff(k + j) * b[static_cast<size_t>(n - j)];
    b[static_cast<size_t>(n)] = -s / a0;
  }
  LaurentWindow w;
  w.lo = -k;
  w.c = std::move(b);
  w.valid_hi = nmax_exact >= LaurentWindow::kInf ? LaurentWindow::kInf : sat(nmax_exact - k);
  // A finite polynomial with more than one term has an infinite inverse series.
  if (a.highest_nonzero() != l) w.valid_hi = std::min<long long>(w.valid_hi, N);
  return w.truncated(N);
}

LaurentWindow sigma_q(const LaurentWindow& f, const QContext& ctx) {
  LaurentWindow w = f;
  for (size_t i = 0; i < w.c.size(); ++i) w.c[i] *= ipow(ctx.q, f.lo + static_cast<long long>(i));
  return w;
}

// ---------------------------------------------------------------------------
// Matrices over Laurent polynomials

MatrixLP identity_lp(int n) {
  MatrixLP m(n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = LaurentPoly::one();
  return m;
}

MatrixLP constant_lp(const CMat& c) {
  MatrixLP m(static_cast<int>(c.rows()), static_cast<int>(c.cols()));
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) m.at(i, j) = LaurentPoly::constant(c(i, j));
  return m;
}

MatrixLP mul(const MatrixLP& a, const MatrixLP& b) {
  if (a.cols != b.rows) fail(ErrorKind::Domain, "matrix dimension mismatch");
  MatrixLP m(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < b.cols; ++j) {
      LaurentPoly s;
      for (int k = 0; k < a.cols; ++k) s = s + a.at(i, k) * b.at(k, j);
      m.at(i, j) = s;
    }
  return m;
}

MatrixLP add(const MatrixLP& a, const MatrixLP& b) {
  if (a.rows != b.rows || a.cols != b.cols) fail(ErrorKind::Domain, "matrix dimension mismatch");
  MatrixLP m(a.rows, a.cols);
  for (size_t i = 0; i < a.e.size(); ++i) m.e[i] = a.e[i] + b.e[i];
  return m;
}

MatrixLP sigma_q(const MatrixLP& f, const QContext& ctx) {
  MatrixLP m = f;
  for (auto& v : m.e) v = sigma_q(v, ctx);
  return m;
}

CMat eval(const MatrixLP& m, cd z) {
  CMat out(m.rows, m.cols);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) out(i, j) = m.at(i, j).eval(z);
  return out;
}

namespace {

template <class E>
MatrixL<E> minor_of(const MatrixL<E>& m, int skip_r, int skip_c) {
  MatrixL<E> out(m.rows - 1, m.cols - 1);
  int rr = 0;
  for (int r = 0; r < m.rows; ++r) {
    if (r == skip_r) continue;
    int cc = 0;
    for (int c = 0; c < m.cols; ++c) {
      if (c == skip_c) continue;
      out.at(rr, cc++) = m.at(r, c);
    }
    ++rr;
  }
  return out;
}

}  // namespace

LaurentPoly det(const MatrixLP& m) {
  if (m.rows != m.cols) fail(ErrorKind::Domain, "det of non-square matrix");
  const int n = m.rows;
  if (n == 0) return LaurentPoly::one();
  if (n == 1) return m.at(0, 0);
  LaurentPoly acc;
  for (int j = 0; j < n; ++j) {
    if (m.at(0, j).is_zero()) continue;
    LaurentPoly term = m.at(0, j) * det(minor_of(m, 0, j));
    acc = (j % 2 == 0) ? acc + term : acc - term;
  }
  return acc;
}

bool is_invertible(const MatrixLP& m, double tol) {
  return m.rows == m.cols && det(m).is_unit(tol);
}

MatrixLP inverse(const MatrixLP& m, double tol) {
  LaurentPoly d = det(m).normalized(tol);
  if (d.coeffs.size() != 1)
    fail(ErrorKind::Domain, "matrix is not invertible over Laurent polynomials (det is not c z^k)");
  const int n = m.rows;
  LaurentPoly dinv = LaurentPoly::monomial(1.0 / d.coeffs[0], -d.offset);
  MatrixLP out(n, n);
  if (n == 1) {
    out.at(0, 0) = dinv;
    return out;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      LaurentPoly cof = det(minor_of(m, j, i)) * dinv;
      out.at(i, j) = ((i + j) % 2 == 0) ? cof : -cof;
    }
  return out;
}

MatrixLP gauge(const MatrixLP& F, const MatrixLP& A, const QContext& ctx) {
  return mul(mul(sigma_q(F, ctx), A), inverse(F));
}

// ---------------------------------------------------------------------------
// Matrices over windows

MatrixLW to_window(const MatrixLP& m, int N) {
  MatrixLW w(m.rows, m.cols);
  for (size_t i = 0; i < m.e.size(); ++i) w.e[i] = LaurentWindow::from_poly(m.e[i], N);
  return w;
}

MatrixLW identity_lw(int n, int N) { return to_window(identity_lp(n), N); }

MatrixLW mul(const MatrixLW& a, const MatrixLW& b, int N) {
  if (a.cols != b.rows) fail(ErrorKind::Domain, "matrix dimension mismatch");
  MatrixLW m(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < b.cols; ++j) {
      LaurentWindow s;
      for (int k = 0; k < a.cols; ++k) s = add(s, mul(a.at(i, k), b.at(k, j), N), N);
      m.at(i, j) = s;
    }
  return m;
}

MatrixLW sigma_q(const MatrixLW& f, const QContext& ctx) {
  MatrixLW m = f;
  for (auto& v : m.e) v = sigma_q(v, ctx);
  return m;
}

CMat eval(const MatrixLW& m, cd z) {
  CMat out(m.rows, m.cols);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) out(i, j) = m.at(i, j).eval(z);
  return out;
}

LaurentWindow det(const MatrixLW& m, int N) {
  if (m.rows != m.cols) fail(ErrorKind::Domain, "det of non-square matrix");
  const int n = m.rows;
  if (n == 0) return LaurentWindow::constant(1.0, N);
  if (n == 1) return m.at(0, 0);
  LaurentWindow acc;
  for (int j = 0; j < n; ++j) {
    LaurentWindow term = mul(m.at(0, j), det(minor_of(m, 0, j), N), N);
    acc = (j % 2 == 0) ? add(acc, term, N) : sub(acc, term, N);
  }
  return acc;
}

MatrixLW inverse(const MatrixLW& m, int N) {
  LaurentWindow d = det(m, N);
  if (!d.lowest_nonzero()) fail(ErrorKind::Domain, "matrix is not invertible over the window (zero det)");
  LaurentWindow dinv = inverse(d, N);
  const int n = m.rows;
  MatrixLW out(n, n);
  if (n == 1) {
    out.at(0, 0) = dinv;
    return out;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      LaurentWindow cof = mul(det(minor_of(m, j, i), N), dinv, N);
      out.at(i, j) = ((i + j) % 2 == 0) ? cof : scale(cof, -1.0);
    }
  return out;
}

MatrixLW gauge(const MatrixLW& F, const MatrixLW& A, const QContext& ctx) {
  const int N = ctx.laurent_window;
  return mul(mul(sigma_q(F, ctx), A, N), inverse(F, N), N);
}

// ---------------------------------------------------------------------------
// Dense helpers

CMat nilpotent_log(const CMat& u) {
  const long n = u.rows();
  CMat x = u - CMat::Identity(n, n);
  CMat acc = CMat::Zero(n, n);
  CMat pw = x;
  for (long k = 1; k <= n; ++k) {
    acc += ((k % 2 == 1) ? 1.0 : -1.0) / static_cast<double>(k) * pw;
    pw = pw * x;
  }
  return acc;
}

CMat nilpotent_exp(const CMat& nmat) {
  const long n = nmat.rows();
  CMat acc = CMat::Identity(n, n);
  CMat pw = CMat::Identity(n, n);
  double fact = 1.0;
  for (long k = 1; k <= n; ++k) {
    pw = pw * nmat;
    fact *= static_cast<double>(k);
    acc += pw / fact;
  }
  return acc;
}

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (long i = 0; i < a.rows(); ++i)
    for (long j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

int numeric_rank(const CMat& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<CMat> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (long i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) ++r;
  return r;
}

}  // namespace qdg

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

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qdg/errors.hpp"

namespace qdg {

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

constexpr double kPi = 3.14159265358979323846;

// Exact rational with positive denominator, always reduced.
struct Rational {
  long long p = 0;
  long long r = 1;

  Rational() = default;
  Rational(long long num, long long den = 1);

  Rational operator+(const Rational& o) const;
  Rational operator-(const Rational& o) const;
  Rational operator*(const Rational& o) const;
  Rational operator/(const Rational& o) const;
  Rational operator-() const { return Rational(-p, r); }
  bool operator==(const Rational& o) const { return p == o.p && r == o.r; }
  bool operator!=(const Rational& o) const { return !(*this == o); }
  bool operator<(const Rational& o) const;
  bool is_zero() const { return p == 0; }
  double to_double() const { return static_cast<double>(p) / static_cast<double>(r); }
  // Representative in [0, 1).
  Rational mod1() const;
};

struct QContext {
  cd q;
  cd tau;    // q = exp(-2 pi i tau), Im tau > 0
  cd log_q;  // principal logarithm of q
  double eps_num = 1e-9;
  int laurent_window = 32;
  int theta_terms = 16;
  double resonance_eps = 1e-6;

  static QContext make(cd q, double eps = 1e-9, int window = 32, int theta_terms = 16,
                       double resonance_eps = 1e-6);
  double abs_q() const { return std::abs(q); }
};

// Integer power by repeated squaring (negative exponents allowed).
cd ipow(cd x, long long n);

struct EqPointNum {
  cd rep;   // 1 <= |rep| < |q|
  long long k = 0;  // input = rep * q^k
};

EqPointNum canonicalize(cd c, const QContext& ctx);

// Distance between two classes of E_q measured in log coordinates modulo the lattice
// generated by 2 pi i and log q.
double eq_distance(cd a, cd b, const QContext& ctx);

// True when c lies numerically on the spiral c0 * q^Z.
bool on_spiral(cd c, cd c0, const QContext& ctx, double tol);

// Element of E_q = mu x mu_q x L with exact arithmetic.
struct EqPointSym {
  Rational zeta;                          // e^{2 pi i zeta}, stored mod 1
  Rational qexp;                          // class of q^{qexp}, stored mod 1
  std::map<std::string, long long> lattice;  // free part, zero exponents dropped

  static EqPointSym identity() { return {}; }
  static EqPointSym root_of_unity(long long p, long long r);
  static EqPointSym q_power(long long p, long long r);
  static EqPointSym generator(const std::string& name, long long e = 1);

  EqPointSym operator+(const EqPointSym& o) const;  // group law (written additively)
  EqPointSym operator-() const;
  EqPointSym operator-(const EqPointSym& o) const { return *this + (-o); }
  bool operator==(const EqPointSym& o) const;
  bool operator!=(const EqPointSym& o) const { return !(*this == o); }
  bool operator<(const EqPointSym& o) const;
  bool is_identity() const;
  std::string to_string() const;

  // Numeric value given complex values for the lattice generators.
  cd numeric(const QContext& ctx, const std::map<std::string, cd>& lattice_values) const;
};

EqPointSym sym_pow(const EqPointSym& c, long long n);

// Symbolic delta-th roots: zeta -> (zeta + k)/delta, qexp -> (qexp + m)/delta, lattice / delta.
// Returns nullopt when a lattice exponent is not divisible by delta.
std::optional<EqPointSym> sym_root(const EqPointSym& c, int delta, int k, int m);

// A class of E_q carried numerically, with an optional exact label.
struct EqPoint {
  cd rep;
  std::optional<EqPointSym> sym;

  static EqPoint from_numeric(cd c, const QContext& ctx);
  static EqPoint from_both(cd c, const EqPointSym& s, const QContext& ctx);
  bool same_class(const EqPoint& o, const QContext& ctx, double tol) const;
};

// ---------------------------------------------------------------------------
// Laurent polynomials

struct LaurentPoly {
  int offset = 0;
  std::vector<cd> coeffs;

  LaurentPoly() = default;
  LaurentPoly(int off, std::vector<cd> c);
  static LaurentPoly constant(cd c);
  static LaurentPoly monomial(cd c, int k);
  static LaurentPoly zero() { return {}; }
  static LaurentPoly one() { return constant(1.0); }

  bool is_zero() const { return coeffs.empty(); }
  int lowest() const { return offset; }
  int highest() const { return offset + static_cast<int>(coeffs.size()) - 1; }
  cd coeff(int n) const;
  cd eval(cd z) const;
  // Drops coefficients with |c| <= tol * max|c| at both ends (tol = 0: exact zeros only).
  LaurentPoly normalized(double tol = 0.0) const;
  bool is_unit(double tol = 1e-12) const;

  LaurentPoly operator+(const LaurentPoly& o) const;
  LaurentPoly operator-(const LaurentPoly& o) const;
  LaurentPoly operator*(const LaurentPoly& o) const;
  LaurentPoly operator*(cd s) const;
  LaurentPoly operator-() const { return (*this) * cd(-1.0); }
};

LaurentPoly sigma_q(const LaurentPoly& f, const QContext& ctx);

// ---------------------------------------------------------------------------
// Truncated Laurent series on a symmetric window [-N, N].
//
// valid_lo..valid_hi is the exponent range on which stored coefficients are exact.
// Exact polynomials carry an unbounded range.

struct LaurentWindow {
  static constexpr long long kInf = 1LL << 40;

  int lo = 0;
  std::vector<cd> c;
  long long valid_lo = -kInf;
  long long valid_hi = kInf;

  static LaurentWindow from_poly(const LaurentPoly& p, int N);
  static LaurentWindow constant(cd v, int N) { return from_poly(LaurentPoly::constant(v), N); }

  cd coeff(int n) const;
  int hi() const { return lo + static_cast<int>(c.size()) - 1; }
  cd eval(cd z) const;
  bool is_zero() const;
  LaurentWindow truncated(int N) const;
  // Exponents of lowest / highest nonzero stored coefficient (nullopt when zero).
  std::optional<int> lowest_nonzero() const;
  std::optional<int> highest_nonzero() const;
};

LaurentWindow add(const LaurentWindow& a, const LaurentWindow& b, int N);
LaurentWindow sub(const LaurentWindow& a, const LaurentWindow& b, int N);
LaurentWindow mul(const LaurentWindow& a, const LaurentWindow& b, int N);
LaurentWindow scale(const LaurentWindow& a, cd s);
// Formal inverse; requires exactness from below and nonzero lowest coefficient.
LaurentWindow inverse(const LaurentWindow& a, int N);
LaurentWindow sigma_q(const LaurentWindow& f, const QContext& ctx);

// ---------------------------------------------------------------------------
// Matrices over Laurent polynomials or windows.

template <class E>
struct MatrixL {
  int rows = 0;
  int cols = 0;
  std::vector<E> e;

  MatrixL() = default;
  MatrixL(int r, int c) : rows(r), cols(c), e(static_cast<size_t>(r) * c) {}
  E& at(int i, int j) { return e[static_cast<size_t>(i) * cols + j]; }
  const E& at(int i, int j) const { return e[static_cast<size_t>(i) * cols + j]; }
};

using MatrixLP = MatrixL<LaurentPoly>;
using MatrixLW = MatrixL<LaurentWindow>;

MatrixLP identity_lp(int n);
MatrixLP constant_lp(const CMat& m);
MatrixLP mul(const MatrixLP& a, const MatrixLP& b);
MatrixLP add(const MatrixLP& a, const MatrixLP& b);
MatrixLP sigma_q(const MatrixLP& f, const QContext& ctx);
CMat eval(const MatrixLP& m, cd z);
LaurentPoly det(const MatrixLP& m);
bool is_invertible(const MatrixLP& m, double tol = 1e-12);
MatrixLP inverse(const MatrixLP& m, double tol = 1e-12);
// (sigma_q F) A F^{-1}
MatrixLP gauge(const MatrixLP& F, const MatrixLP& A, const QContext& ctx);

MatrixLW to_window(const MatrixLP& m, int N);
MatrixLW identity_lw(int n, int N);
MatrixLW mul(const MatrixLW& a, const MatrixLW& b, int N);
MatrixLW sigma_q(const MatrixLW& f, const QContext& ctx);
CMat eval(const MatrixLW& m, cd z);
LaurentWindow det(const MatrixLW& m, int N);
MatrixLW inverse(const MatrixLW& m, int N);
MatrixLW gauge(const MatrixLW& F, const MatrixLW& A, const QContext& ctx);

// Small dense helpers shared across modules.
CMat nilpotent_log(const CMat& u);   // log of a unipotent matrix (terminating series)
CMat nilpotent_exp(const CMat& n);   // exp of a nilpotent matrix (terminating series)
CMat kron(const CMat& a, const CMat& b);
int numeric_rank(const CMat& m, double rel_tol);

}  // namespace qdg

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

#include "qdg/json_io.hpp"

namespace qdg::json_io {

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& msg) {
  fail(ErrorKind::Schema, (path.empty() ? std::string("/") : path) + ": " + msg);
}

const json& field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) bad(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) bad(path, "missing field '" + key + "'");
  return *it;
}

long long read_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) bad(path, "expected an integer");
  return j.get<long long>();
}

std::vector<long long> read_ints(const json& j, const std::string& path) {
  if (!j.is_array()) bad(path, "expected an array of integers");
  std::vector<long long> v;
  for (size_t i = 0; i < j.size(); ++i) v.push_back(read_int(j[i], path + "/" + std::to_string(i)));
  return v;
}

Rational read_rational(const json& j, const std::string& path) {
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (!j.is_array() || j.size() != 2) bad(path, "expected an integer or [numerator, denominator]");
  const long long p = read_int(j[0], path + "/0"), r = read_int(j[1], path + "/1");
  if (r == 0) bad(path, "zero denominator");
  return Rational(p, r);
}

}  // namespace

cd read_cd(const json& j, const std::string& path) {
  if (j.is_number()) return cd(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) return cd(j[0].get<double>(), j[1].get<double>());
  bad(path, "expected a number or [re, im]");
}

CMat read_mat(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) bad(path, "expected a nonempty array of rows");
  const size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty()) bad(path + "/0", "expected a nonempty row");
  const size_t cols = j[0].size();
  CMat m(static_cast<long>(rows), static_cast<long>(cols));
  for (size_t r = 0; r < rows; ++r) {
    const std::string rp = path + "/" + std::to_string(r);
    if (!j[r].is_array() || j[r].size() != cols) bad(rp, "rows must have equal length");
    for (size_t c = 0; c < cols; ++c) m(static_cast<long>(r), static_cast<long>(c)) = read_cd(j[r][c], rp + "/" + std::to_string(c));
  }
  return m;
}

LaurentPoly read_poly(const json& j, const std::string& path) {
  if (j.is_number() || (j.is_array() && j.size() == 2 && j[0].is_number())) {
    const cd c = read_cd(j, path);
    return c == cd(0.0) ? LaurentPoly::zero() : LaurentPoly::constant(c);
  }
  const int off = static_cast<int>(read_int(field(j, "offset", path), path + "/offset"));
  const json& cs = field(j, "coeffs", path);
  if (!cs.is_array()) bad(path + "/coeffs", "expected an array");
  std::vector<cd> c;
  for (size_t i = 0; i < cs.size(); ++i) c.push_back(read_cd(cs[i], path + "/coeffs/" + std::to_string(i)));
  return LaurentPoly(off, c).normalized();
}

EqPointSym read_sym(const json& j, const std::string& path) {
  if (!j.is_object()) bad(path, "expected a class object {zeta, qexp, lattice}");
  EqPointSym s;
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "zeta" && it.key() != "qexp" && it.key() != "lattice") bad(path, "unknown field '" + it.key() + "'");
  if (j.contains("zeta")) s.zeta = read_rational(j["zeta"], path + "/zeta").mod1();
  if (j.contains("qexp")) s.qexp = read_rational(j["qexp"], path + "/qexp").mod1();
  if (j.contains("lattice")) {
    const json& l = j["lattice"];
    if (!l.is_object()) bad(path + "/lattice", "expected an object of integer exponents");
    for (auto it = l.begin(); it != l.end(); ++it) {
      const long long e = read_int(it.value(), path + "/lattice/" + it.key());
      if (e != 0) s.lattice[it.key()] = e;
    }
  }
  return s;
}

bg::BGSystem read_system(const json& j, const std::string& path) {
  bg::BGSystem S;
  const json& blocks = field(j, "blocks", path);
  if (!blocks.is_array() || blocks.empty()) bad(path + "/blocks", "expected a nonempty array");
  for (size_t b = 0; b < blocks.size(); ++b) {
    const std::string bp = path + "/blocks/" + std::to_string(b);
    const int mu = static_cast<int>(read_int(field(blocks[b], "mu", bp), bp + "/mu"));
    const CMat A = read_mat(field(blocks[b], "A", bp), bp + "/A");
    if (A.rows() != A.cols()) bad(bp + "/A", "block must be square");
    std::vector<std::optional<EqPointSym>> tags;
    if (blocks[b].contains("tags")) {
      const json& t = blocks[b]["tags"];
      if (!t.is_array() || t.size() != static_cast<size_t>(A.rows())) bad(bp + "/tags", "one tag (or null) per diagonal entry");
      for (size_t k = 0; k < t.size(); ++k)
        tags.push_back(t[k].is_null() ? std::nullopt : std::optional<EqPointSym>(read_sym(t[k], bp + "/tags/" + std::to_string(k))));
    }
    S.blocks.push_back(bg::PureBlock::from_matrix(mu, A, tags));
  }
  if (j.contains("U")) {
    const json& U = j["U"];
    if (!U.is_array()) bad(path + "/U", "expected an array");
    for (size_t k = 0; k < U.size(); ++k) {
      const std::string up = path + "/U/" + std::to_string(k);
      const int i = static_cast<int>(read_int(field(U[k], "i", up), up + "/i"));
      const int jj = static_cast<int>(read_int(field(U[k], "j", up), up + "/j"));
      if (i < 0 || jj <= i || jj >= S.num_blocks()) bad(up, "block indices must satisfy 0 <= i < j < #blocks");
      const json& e = field(U[k], "entries", up);
      const int r = S.blocks[static_cast<size_t>(i)].rank(), c = S.blocks[static_cast<size_t>(jj)].rank();
      if (!e.is_array() || e.size() != static_cast<size_t>(r)) bad(up + "/entries", "expected " + std::to_string(r) + " rows");
      MatrixLP m(r, c);
      for (int x = 0; x < r; ++x) {
        const std::string rp = up + "/entries/" + std::to_string(x);
        if (!e[static_cast<size_t>(x)].is_array() || e[static_cast<size_t>(x)].size() != static_cast<size_t>(c))
          bad(rp, "expected " + std::to_string(c) + " entries");
        for (int y = 0; y < c; ++y) m.at(x, y) = read_poly(e[static_cast<size_t>(x)][static_cast<size_t>(y)], rp + "/" + std::to_string(y));
      }
      if (S.U.count({i, jj})) bad(up, "duplicate block pair");
      S.U[{i, jj}] = m;
    }
  }
  if (j.contains("lattice_values")) {
    const json& l = j["lattice_values"];
    if (!l.is_object()) bad(path + "/lattice_values", "expected an object");
    for (auto it = l.begin(); it != l.end(); ++it) S.lattice_values[it.key()] = read_cd(it.value(), path + "/lattice_values/" + it.key());
  }
  try {
    S.validate();
  } catch (const Error& e) {
    bad(path, e.what());
  }
  return S;
}

std::vector<theta_inverse::RootSpace> read_roots(const json& j, const std::string& path) {
  if (!j.is_array()) bad(path, "expected an array of roots");
  std::vector<theta_inverse::RootSpace> out;
  for (size_t k = 0; k < j.size(); ++k) {
    const std::string rp = path + "/" + std::to_string(k);
    theta_inverse::RootSpace r;
    r.weight = read_ints(field(j[k], "weight", rp), rp + "/weight");
    const json& b = field(j[k], "basis", rp);
    if (!b.is_array()) bad(rp + "/basis", "expected an array of matrices");
    for (size_t m = 0; m < b.size(); ++m) r.basis.push_back(read_mat(b[m], rp + "/basis/" + std::to_string(m)));
    out.push_back(r);
  }
  return out;
}

theta_inverse::TriangGroupData read_group(const json& j, const std::string& path) {
  theta_inverse::TriangGroupData G;
  G.n = static_cast<int>(read_int(field(j, "n", path), path + "/n"));
  const json& tw = field(j, "torus_weights", path);
  if (!tw.is_array()) bad(path + "/torus_weights", "expected an array");
  for (size_t a = 0; a < tw.size(); ++a) G.torus_weights.push_back(read_ints(tw[a], path + "/torus_weights/" + std::to_string(a)));
  if (j.contains("finite")) G.finite = read_ints(j["finite"], path + "/finite");
  if (j.contains("roots")) G.roots = read_roots(j["roots"], path + "/roots");
  if (j.contains("u0") && !j["u0"].is_null()) G.u0 = read_mat(j["u0"], path + "/u0");
  if (j.contains("component_action_trivial")) {
    if (!j["component_action_trivial"].is_boolean()) bad(path + "/component_action_trivial", "expected a boolean");
    G.component_action_trivial = j["component_action_trivial"].get<bool>();
  }
  if (j.contains("torsion")) {
    const json& t = j["torsion"];
    if (!t.is_array()) bad(path + "/torsion", "expected an array");
    for (size_t k = 0; k < t.size(); ++k) G.torsion.push_back(read_sym(t[k], path + "/torsion/" + std::to_string(k)));
  }
  try {
    G.validate();
  } catch (const Error& e) {
    bad(path, e.what());
  }
  return G;
}

json write_cd(cd z) { return json::array({z.real(), z.imag()}); }

json write_mat(const CMat& m) {
  json rows = json::array();
  for (long r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (long c = 0; c < m.cols(); ++c) row.push_back(write_cd(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

json write_poly(const LaurentPoly& p) {
  json cs = json::array();
  for (const auto& c : p.coeffs) cs.push_back(write_cd(c));
  return {{"offset", p.offset}, {"coeffs", cs}};
}

json write_sym(const EqPointSym& s) {
  json l = json::object();
  for (const auto& [g, e] : s.lattice) l[g] = e;
  return {{"zeta", {s.zeta.p, s.zeta.r}}, {"qexp", {s.qexp.p, s.qexp.r}}, {"lattice", l}};
}

json write_system(const bg::BGSystem& S) {
  json blocks = json::array();
  for (const auto& b : S.blocks) {
    json tags = json::array();
    for (const auto& t : b.sym) tags.push_back(t ? write_sym(*t) : json(nullptr));
    blocks.push_back({{"mu", b.mu}, {"A", write_mat(b.matrix())}, {"tags", tags}});
  }
  json U = json::array();
  for (const auto& [key, m] : S.U) {
    json rows = json::array();
    for (int r = 0; r < m.rows; ++r) {
      json row = json::array();
      for (int c = 0; c < m.cols; ++c) row.push_back(write_poly(m.at(r, c)));
      rows.push_back(row);
    }
    U.push_back({{"i", key.first}, {"j", key.second}, {"entries", rows}});
  }
  json lv = json::object();
  for (const auto& [g, v] : S.lattice_values) lv[g] = write_cd(v);
  return {{"blocks", blocks}, {"U", U}, {"lattice_values", lv}};
}

json write_group(const theta_inverse::TriangGroupData& G) {
  json roots = json::array();
  for (const auto& r : G.roots) {
    json basis = json::array();
    for (const auto& m : r.basis) basis.push_back(write_mat(m));
    roots.push_back({{"weight", r.weight}, {"basis", basis}});
  }
  json out = {{"n", G.n}, {"torus_weights", G.torus_weights}, {"finite", G.finite}, {"roots", roots},
              {"u0", G.u0 ? write_mat(*G.u0) : json(nullptr)}};
  return out;
}

json write_descriptor(const galois::GaloisDescriptor& d) {
  json basis = json::array();
  for (const auto& m : d.lie_basis) basis.push_back(write_mat(m));
  json weights = json::array();
  for (const auto& w : d.diag_weights) weights.push_back(write_sym(w));
  return {{"n", d.n},
          {"finite", {d.p1, d.p2}},
          {"torus", d.torus_dim},
          {"theta", d.theta_exponents},
          {"unip", d.unipotent_dim},
          {"wild_dim", d.wild_dim},
          {"lie_dim", d.lie_dim()},
          {"diag_weights", weights},
          {"lie_basis", basis}};
}

json write_context(const QContext& ctx) {
  return {{"q", write_cd(ctx.q)},
          {"eps", ctx.eps_num},
          {"window", ctx.laurent_window},
          {"theta_terms", ctx.theta_terms},
          {"resonance_eps", ctx.resonance_eps}};
}

json parse(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Schema, source + ": malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

}  // namespace qdg::json_io

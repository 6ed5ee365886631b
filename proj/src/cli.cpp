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

#include "qdg/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "qdg/json_io.hpp"
#include "qdg/special.hpp"

namespace qdg::cli {

using json_io::json;

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

cd parse_complex(const std::string& s, const std::string& flag) {
  std::istringstream in(s);
  double re = 0.0, im = 0.0;
  char comma = 0;
  if (!(in >> re)) throw UsageError(flag + ": expected re[,im]");
  if (in >> comma) {
    if (comma != ',' || !(in >> im)) throw UsageError(flag + ": expected re[,im]");
  }
  std::string rest;
  if (in >> rest) throw UsageError(flag + ": trailing characters");
  return {re, im};
}

struct Input {
  std::string path;
  std::string digest;
  json doc;
};

Input load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot read " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  const std::string text = buf.str();
  return {path, fnv1a_hex(text), json_io::parse(text, path)};
}

json cell_json(const bg::GradedCell& c) {
  json entries = json::array();
  for (const auto& e : c.entries) entries.push_back({{"row", e.row}, {"col", e.col}, {"blocks", {e.bi, e.bj}}});
  json out = {{"level", c.level}, {"class", json_io::write_cd(c.cls.rep)}, {"dim", c.dim()}, {"entries", entries}};
  if (c.cls.sym) out["class_sym"] = json_io::write_sym(*c.cls.sym);
  return out;
}

EqPoint read_target_class(const json& t, const std::string& path, const std::map<std::string, cd>& lv, const QContext& ctx) {
  if (t.contains("class")) {
    const EqPointSym s = json_io::read_sym(t["class"], path + "/class");
    return EqPoint::from_both(s.numeric(ctx, lv), s, ctx);
  }
  if (t.contains("class_numeric")) return EqPoint::from_numeric(json_io::read_cd(t["class_numeric"], path + "/class_numeric"), ctx);
  fail(ErrorKind::Schema, path + ": missing field 'class' or 'class_numeric'");
}

// A(z) = num(z) / den(z) with constant limits at 0 and infinity.
struct RationalInput {
  galois::RationalSystem sys;
  std::vector<cd> grid;
  std::vector<std::optional<EqPointSym>> tags0, tagsinf;
};

std::vector<std::optional<EqPointSym>> read_tags(const json& j, const std::string& path, int n) {
  if (!j.is_array() || static_cast<int>(j.size()) != n) fail(ErrorKind::Schema, path + ": one tag per coordinate");
  std::vector<std::optional<EqPointSym>> out;
  for (size_t k = 0; k < j.size(); ++k)
    out.push_back(j[k].is_null() ? std::nullopt : std::optional<EqPointSym>(json_io::read_sym(j[k], path + "/" + std::to_string(k))));
  return out;
}

RationalInput read_rational(const json& j) {
  if (!j.is_object() || !j.contains("num")) fail(ErrorKind::Schema, "/: missing field 'num'");
  const json& num = j["num"];
  if (!num.is_array() || num.empty() || !num[0].is_array()) fail(ErrorKind::Schema, "/num: expected rows of polynomials");
  const int n = static_cast<int>(num.size());
  MatrixLP N(n, n);
  for (int r = 0; r < n; ++r) {
    const json& row = num[static_cast<size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != n) fail(ErrorKind::Schema, "/num/" + std::to_string(r) + ": expected a square matrix");
    for (int c = 0; c < n; ++c)
      N.at(r, c) = json_io::read_poly(row[static_cast<size_t>(c)], "/num/" + std::to_string(r) + "/" + std::to_string(c));
  }
  const LaurentPoly den = j.contains("den") ? json_io::read_poly(j["den"], "/den") : LaurentPoly::one();
  if (den.coeffs.empty()) fail(ErrorKind::Schema, "/den: zero denominator");

  RationalInput in;
  in.sys.A = [N, den](cd z) { return CMat(eval(N, z) / den.eval(z)); };
  int lo = den.lowest(), hi = den.highest();
  for (const auto& p : N.e)
    if (!p.coeffs.empty()) {
      lo = std::min(lo, p.lowest());
      hi = std::max(hi, p.highest());
    }
  if (j.contains("A0")) {
    in.sys.A0 = json_io::read_mat(j["A0"], "/A0");
  } else {
    if (den.lowest() != lo) fail(ErrorKind::Domain, "A has a pole at 0; give A0 explicitly");
    in.sys.A0 = CMat(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) in.sys.A0(r, c) = N.at(r, c).coeff(lo) / den.coeff(lo);
  }
  if (j.contains("Ainf")) {
    in.sys.Ainf = json_io::read_mat(j["Ainf"], "/Ainf");
  } else {
    if (den.highest() != hi) fail(ErrorKind::Domain, "A has a pole at infinity; give Ainf explicitly");
    in.sys.Ainf = CMat(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) in.sys.Ainf(r, c) = N.at(r, c).coeff(hi) / den.coeff(hi);
  }
  if (in.sys.A0.rows() != n || in.sys.Ainf.rows() != n) fail(ErrorKind::Schema, "/: A0 and Ainf must match num");
  if (j.contains("grid")) {
    const json& g = j["grid"];
    if (!g.is_array()) fail(ErrorKind::Schema, "/grid: expected an array");
    for (size_t k = 0; k < g.size(); ++k) in.grid.push_back(json_io::read_cd(g[k], "/grid/" + std::to_string(k)));
  } else {
    for (int k = 0; k < 16; ++k) in.grid.push_back(std::polar(1.0 + 0.37 * (k % 4), 2.0 * kPi * (k + 0.5) / 16.0));
  }
  if (j.contains("tags0")) in.tags0 = read_tags(j["tags0"], "/tags0", n);
  if (j.contains("tagsinf")) in.tagsinf = read_tags(j["tagsinf"], "/tagsinf", n);
  return in;
}

json descriptor_checks(const galois::GaloisDescriptor& got, const galois::GaloisDescriptor& want) {
  return {{"expected", json_io::write_descriptor(want)}, {"same_type", galois::same_type(got, want)}};
}

struct Options {
  std::string q;  // empty: 3 e^{0.4 i}
  double eps = 1e-9;
  int window = 32;
  int theta_terms = 16;
  std::uint64_t seed = 0;
  std::string out;

  std::string file, z, c, lambda, alpha, at, group;
  int gens = 2, depth = 5;
  bool exact = false, global = false;
};

json dispatch(const std::string& cmd, Options& o, const QContext& ctx, std::vector<Input>& inputs) {
  auto need_file = [&]() -> const json& {
    if (o.file.empty()) throw UsageError(cmd + ": an input file is required");
    inputs.push_back(load(o.file));
    return inputs.back().doc;
  };
  auto need = [&](const std::string& v, const std::string& flag) {
    if (v.empty()) throw UsageError(cmd + ": " + flag + " is required");
    return parse_complex(v, flag);
  };
  auto rel = [](cd a, cd b) { return std::abs(a - b) / std::max(std::abs(a), 1e-300); };

  json r = json::object();
  if (cmd == "theta") {
    const cd z = need(o.z, "--z");
    const cd t = special::theta(z, ctx);
    r["z"] = json_io::write_cd(z);
    r["theta"] = json_io::write_cd(t);
    r["theta_logderiv"] = json_io::write_cd(special::theta_logderiv(z, ctx));
    r["functional_residual"] = rel(special::theta(ctx.q * z, ctx), z * t);
    if (!o.c.empty()) r["theta_c"] = json_io::write_cd(special::theta_c(parse_complex(o.c, "--c"), z, ctx));
  } else if (cmd == "echar") {
    const cd z = need(o.z, "--z"), c = need(o.c, "--c");
    const cd e = special::e_char(c, z, ctx);
    r["z"] = json_io::write_cd(z);
    r["c"] = json_io::write_cd(c);
    r["e_c"] = json_io::write_cd(e);
    r["functional_residual"] = rel(special::e_char(c, ctx.q * z, ctx), c * e);
  } else if (cmd == "newton") {
    const json& j = need_file();
    bg::NewtonData nd;
    if (j.is_object() && j.contains("scalar")) {
      const json& s = j["scalar"];
      if (!s.is_array()) fail(ErrorKind::Schema, "/scalar: expected an array of polynomials");
      std::vector<LaurentPoly> a;
      for (size_t k = 0; k < s.size(); ++k) a.push_back(json_io::read_poly(s[k], "/scalar/" + std::to_string(k)));
      nd = bg::scalar_newton(a);
    } else {
      nd = bg::newton(json_io::read_system(j));
    }
    r["slopes"] = nd.slopes;
    r["mults"] = nd.mults;
  } else if (cmd == "sigmaset") {
    const auto S = json_io::read_system(need_file());
    json classes = json::array();
    for (const auto& p : bg::sigma_set(S, ctx, o.exact)) {
      json e = {{"rep", json_io::write_cd(p.rep)}};
      if (p.sym) e["sym"] = json_io::write_sym(*p.sym);
      classes.push_back(e);
    }
    r["classes"] = classes;
  } else if (cmd == "gdecomp") {
    const auto S = json_io::read_system(need_file());
    json cells = json::array();
    for (const auto& c : bg::g_decompose(S, ctx)) cells.push_back(cell_json(c));
    r["cells"] = cells;
    json dims = json::object();
    const auto nd = bg::newton(S);
    for (int d = 1; d <= nd.slopes.back() - nd.slopes.front(); ++d) dims[std::to_string(d)] = bg::dimV(S, d);
    r["dimV"] = dims;
  } else if (cmd == "sum") {
    const auto S = json_io::read_system(need_file());
    const cd lambda = need(o.lambda, "--lambda");
    const auto G = stokes::sum_direction(S, lambda, ctx);
    const auto rep = stokes::verify_summation(G, ctx);
    r["lambda"] = json_io::write_cd(lambda);
    r["residual"] = rep.residual;
    r["max_pole_order"] = rep.max_pole_order;
    r["ok"] = rep.ok;
  } else if (cmd == "alien") {
    const auto S = json_io::read_system(need_file());
    const cd alpha = need(o.alpha, "--alpha");
    auto frame = stokes::default_frame(S, ctx);
    if (!o.at.empty()) frame.a = parse_complex(o.at, "--at");
    const auto v = stokes::alien_residue(S, alpha, frame, ctx);
    r["alpha"] = json_io::write_cd(alpha);
    r["frame"] = {{"c0", json_io::write_cd(frame.c0)}, {"a", json_io::write_cd(frame.a)}};
    r["value"] = json_io::write_mat(v.value);
    json comps = json::array();
    for (const auto& [cell, m] : v.components) comps.push_back({{"cell", cell_json(cell)}, {"value", json_io::write_mat(m)}});
    r["components"] = comps;
  } else if (cmd == "realize-class") {
    const json& j = need_file();
    if (!j.is_object() || !j.contains("system") || !j.contains("targets"))
      fail(ErrorKind::Schema, "/: expected fields 'system' and 'targets'");
    const auto S = json_io::read_system(j["system"], "/system");
    const json& ts = j["targets"];
    if (!ts.is_array()) fail(ErrorKind::Schema, "/targets: expected an array");
    std::vector<stokes::ClassTarget> targets;
    for (size_t k = 0; k < ts.size(); ++k) {
      const std::string p = "/targets/" + std::to_string(k);
      if (!ts[k].is_object() || !ts[k].contains("delta") || !ts[k].contains("value"))
        fail(ErrorKind::Schema, p + ": expected fields 'delta' and 'value'");
      stokes::ClassTarget t;
      if (!ts[k]["delta"].is_number_integer()) fail(ErrorKind::Schema, p + "/delta: expected an integer");
      t.delta = ts[k]["delta"].get<int>();
      t.cls = read_target_class(ts[k], p, S.lattice_values, ctx);
      if (ts[k].contains("pointed")) {
        if (!ts[k]["pointed"].is_number_integer()) fail(ErrorKind::Schema, p + "/pointed: expected an integer");
        t.pointed = ts[k]["pointed"].get<int>();
      }
      t.value = json_io::read_mat(ts[k]["value"], p + "/value");
      if (t.value.rows() != S.rank() || t.value.cols() != S.rank()) fail(ErrorKind::Schema, p + "/value: expected an n x n matrix");
      targets.push_back(t);
    }
    auto frame = stokes::default_frame(S, ctx);
    if (!o.at.empty()) frame.a = parse_complex(o.at, "--at");
    const auto R = stokes::realize_class(S, targets, frame, ctx);
    r["system"] = json_io::write_system(R.system);
    r["max_error"] = R.max_error;
  } else if (cmd == "lie") {
    if (!o.file.empty()) {
      const json& j = need_file();
      if (!j.is_object() || !j.contains("matrices") || !j["matrices"].is_array())
        fail(ErrorKind::Schema, "/: expected field 'matrices'");
      std::vector<CMat> ms;
      for (size_t k = 0; k < j["matrices"].size(); ++k) ms.push_back(json_io::read_mat(j["matrices"][k], "/matrices/" + std::to_string(k)));
      for (const auto& m : ms)
        if (m.rows() != ms[0].rows() || m.cols() != m.rows()) fail(ErrorKind::Schema, "/matrices: square matrices of one size");
      const auto B = lie::lie_closure(ms);
      json basis = json::array();
      for (const auto& m : B) basis.push_back(json_io::write_mat(m));
      r["closure_dim"] = static_cast<int>(B.size());
      r["closure_basis"] = basis;
    } else {
      if (o.gens < 1 || o.depth < 1) throw UsageError("lie: --gens and --depth must be positive");
      std::vector<lie::GenLabel> gens;
      for (int k = 0; k < o.gens; ++k) {
        const auto s = EqPointSym::generator("g" + std::to_string(k + 1));
        gens.push_back(lie::GenLabel::alien(1, EqPoint::from_both(cd(1.3 + k, 0.2 * k), s, ctx), 1));
      }
      const auto L = lie::hall_basis(gens, o.depth, ctx);
      std::vector<long long> witt;
      for (int d = 1; d <= o.depth; ++d) witt.push_back(lie::witt_dimension(o.gens, d));
      json words = json::array();
      for (const auto& w : L.words) words.push_back(w);
      r["gens"] = o.gens;
      r["depth"] = o.depth;
      r["hall_dims"] = L.dims_per_length();
      r["witt_dims"] = witt;
      r["lyndon_words"] = words;
    }
  } else if (cmd == "galois") {
    const json& j = need_file();
    if (o.global) {
      const auto in = read_rational(j);
      const int n = static_cast<int>(in.sys.A0.rows());
      if (in.tags0.empty() || in.tagsinf.empty()) fail(ErrorKind::Schema, "/: --global needs 'tags0' and 'tagsinf'");
      (void)n;
      const auto l0 = galois::fuchsian_group(in.sys.A0, in.tags0);
      const auto linf = galois::fuchsian_group(in.sys.Ainf, in.tagsinf);
      std::vector<CMat> samples;
      for (cd a : in.grid) samples.push_back(galois::twisted_connection(in.sys, a, ctx));
      r["local0"] = json_io::write_descriptor(l0);
      r["localinf"] = json_io::write_descriptor(linf);
      r["descriptor"] = json_io::write_descriptor(galois::global_group(l0, linf, samples));
    } else if (j.is_object() && j.contains("blocks")) {
      const auto S = json_io::read_system(j);
      std::optional<cd> at;
      if (!o.at.empty()) at = parse_complex(o.at, "--at");
      r["descriptor"] = json_io::write_descriptor(galois::wild_local_group(S, ctx, at));
    } else if (j.is_object() && j.contains("A")) {
      const CMat A = json_io::read_mat(j["A"], "/A");
      if (A.rows() != A.cols()) fail(ErrorKind::Schema, "/A: expected a square matrix");
      if (!j.contains("tags")) fail(ErrorKind::Schema, "/: missing field 'tags'");
      r["descriptor"] = json_io::write_descriptor(galois::fuchsian_group(A, read_tags(j["tags"], "/tags", static_cast<int>(A.rows()))));
    } else {
      fail(ErrorKind::Schema, "/: expected a system ('blocks') or a fuchsian matrix ('A', 'tags')");
    }
  } else if (cmd == "connect") {
    const auto in = read_rational(need_file());
    double r0 = 0.0, rinf = 0.0, ell = 0.0;
    json samples = json::array();
    for (const auto& s : galois::connection_matrix(in.sys, in.grid, ctx)) {
      r0 = std::max(r0, s.residual0);
      rinf = std::max(rinf, s.residual_inf);
      ell = std::max(ell, s.ellipticity);
      samples.push_back({{"z", json_io::write_cd(s.z)},
                         {"P", json_io::write_mat(s.P)},
                         {"residual0", s.residual0},
                         {"residual_inf", s.residual_inf},
                         {"ellipticity", s.ellipticity}});
    }
    r["samples"] = samples;
    r["max_residual0"] = r0;
    r["max_residual_inf"] = rinf;
    r["max_ellipticity"] = ell;
  } else if (cmd == "realize") {
    if (o.group.empty()) throw UsageError("realize: --group is required");
    o.file = o.group;
    const json& j = need_file();
    const auto G = json_io::read_group(j);
    if (o.global) {
      if (!j.contains("negative_roots")) fail(ErrorKind::Schema, "/: --global needs 'negative_roots'");
      const auto neg = json_io::read_roots(j["negative_roots"], "/negative_roots");
      const auto R = theta_inverse::realize_global_reductive(G, neg, ctx);
      r["system0"] = json_io::write_system(R.at0.system);
      r["systeminf"] = json_io::write_system(R.atinf.system);
      r["local0"] = json_io::write_descriptor(R.local0);
      r["localinf"] = json_io::write_descriptor(R.localinf);
      r["descriptor"] = json_io::write_descriptor(R.global);
      r["lie_dim"] = R.global.lie_dim();
    } else {
      const auto R = theta_inverse::realize_local(G, ctx);
      r["system"] = json_io::write_system(R.system);
      r["perm"] = R.perm;
      r["chi"] = R.chi;
      r["slopes"] = R.slopes;
      r["descriptor"] = json_io::write_descriptor(R.descriptor);
      r["verification"] = descriptor_checks(R.descriptor, R.expected);
      r["residue_error"] = R.residue_error;
      r["verified"] = R.verified;
    }
  } else if (cmd == "check") {
    const auto G = json_io::read_group(need_file());
    const auto rep = theta_inverse::check_necessary(G);
    json conds = json::object();
    for (const auto& c : rep.conditions) conds[c.name] = {{"pass", c.pass}, {"detail", c.detail}};
    r["conditions"] = conds;
    r["all_pass"] = rep.all_pass();
    std::vector<std::vector<long long>> weights;
    for (const auto& rs : G.roots) weights.push_back(rs.weight);
    json theta = json::object();
    try {
      const auto chi = theta_inverse::find_theta_coweight(weights, G.mu());
      theta["coweight"] = chi;
      theta["dominant"] = theta_inverse::make_dominant(chi, G.roots);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoThetaStructure) throw;
      theta["coweight"] = nullptr;
      theta["error"] = e.kind_name();
    }
    r["theta"] = theta;
  } else {
    throw UsageError("unknown command '" + cmd + "'");
  }
  return r;
}

const std::vector<std::string> kCommands = {"theta", "echar", "newton", "sigmaset", "gdecomp", "sum", "alien",
                                            "realize-class", "lie", "galois", "connect", "realize", "check"};

json error_doc(const std::string& kind, int code, const std::string& msg) {
  return {{"schema", json_io::kSchema}, {"error", {{"kind", kind}, {"code", code}, {"message", msg}}}};
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"q-difference Galois toolkit", "qdg"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--q", o.q, "q as re,im (|q| > 1)");
  app.add_option("--eps", o.eps, "numerical tolerance");
  app.add_option("--window", o.window, "Laurent truncation window");
  app.add_option("--theta-terms", o.theta_terms, "theta partial sum terms");
  app.add_option("--seed", o.seed, "seed recorded in the manifest");
  app.add_option("--out", o.out, "write JSON here instead of standard output");

  std::map<std::string, CLI::App*> subs;
  for (const auto& name : kCommands) subs[name] = app.add_subcommand(name);
  subs["theta"]->add_option("--z", o.z, "point re,im")->required();
  subs["theta"]->add_option("--c", o.c, "also evaluate theta(z / c)");
  subs["echar"]->add_option("--z", o.z, "point re,im")->required();
  subs["echar"]->add_option("--c", o.c, "character re,im")->required();
  for (const char* name : {"newton", "sigmaset", "gdecomp", "sum", "alien", "realize-class", "galois", "connect", "check"})
    subs[name]->add_option("file", o.file, "input JSON")->required();
  subs["lie"]->add_option("file", o.file, "matrices JSON (closure mode)");
  subs["lie"]->add_option("--gens", o.gens, "number of generators");
  subs["lie"]->add_option("--depth", o.depth, "truncation depth");
  subs["sigmaset"]->add_flag("--exact", o.exact, "require symbolic tags");
  subs["sum"]->add_option("--lambda", o.lambda, "direction re,im")->required();
  subs["alien"]->add_option("--alpha", o.alpha, "point re,im")->required();
  subs["alien"]->add_option("--at", o.at, "evaluation point re,im");
  subs["realize-class"]->add_option("--at", o.at, "evaluation point re,im");
  subs["galois"]->add_option("--at", o.at, "evaluation point re,im");
  subs["galois"]->add_flag("--global", o.global, "global group of a rational system");
  subs["realize"]->add_option("--group", o.group, "group JSON")->required();
  subs["realize"]->add_flag("--global", o.global, "glue a reductive group from two Borels");

  // Unknown commands are usage errors even when CLI11 would treat them as positionals.
  for (const auto& a : args) {
    if (a.empty() || a[0] == '-') continue;
    if (std::find(kCommands.begin(), kCommands.end(), a) == kCommands.end()) {
      // Value of a global option such as "--q 3,0".
      const auto it = std::find(args.begin(), args.end(), a);
      if (it != args.begin()) {
        const std::string& prev = *(it - 1);
        if (prev == "--q" || prev == "--eps" || prev == "--window" || prev == "--theta-terms" || prev == "--seed" ||
            prev == "--out")
          continue;
      }
      err << "qdg: unknown command '" << a << "'\n";
      out << error_doc("Usage", kExitUsage, "unknown command '" + a + "'").dump() << "\n";
      return kExitUsage;
    }
    break;
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "qdg: " << e.what() << "\n";
    out << error_doc("Usage", kExitUsage, e.what()).dump() << "\n";
    return kExitUsage;
  }

  std::string cmd;
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) cmd = name;

  json doc;
  std::vector<Input> inputs;
  try {
    const cd q = o.q.empty() ? std::polar(3.0, 0.4) : parse_complex(o.q, "--q");
    const QContext ctx = QContext::make(q, o.eps, o.window, o.theta_terms);
    json result = dispatch(cmd, o, ctx, inputs);
    doc = {{"schema", json_io::kSchema}, {"command", cmd}, {"context", json_io::write_context(ctx)}};
    json ins = json::array();
    for (const auto& in : inputs) ins.push_back({{"path", in.path}, {"fnv1a64", in.digest}});
    doc["manifest"] = {{"command", cmd}, {"args", args}, {"inputs", ins}, {"seed", o.seed}};
    for (auto it = result.begin(); it != result.end(); ++it) doc[it.key()] = it.value();
  } catch (const UsageError& e) {
    err << "qdg: " << e.what() << "\n";
    out << error_doc("Usage", kExitUsage, e.what()).dump() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    const int code = e.kind() == ErrorKind::Schema ? kExitSchema : kExitDomain;
    err << "qdg: " << e.kind_name() << ": " << e.what() << "\n";
    out << error_doc(e.kind_name(), code, e.what()).dump() << "\n";
    return code;
  }

  const std::string text = doc.dump(2) + "\n";
  if (o.out.empty()) {
    out << text;
  } else {
    std::ofstream f(o.out, std::ios::binary);
    if (!f || !(f << text)) {
      err << "qdg: cannot write " << o.out << "\n";
      return kExitUsage;
    }
  }
  return kExitOk;
}

}  // namespace qdg::cli

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "qdg/cli.hpp"
#include "qdg/json_io.hpp"

using namespace qdg;
using json_io::json;

namespace {

const std::string kData = QDG_DATA_DIR;

struct Result {
  int code;
  std::string out, err;
  json doc() const { return json::parse(out); }
};

Result qdg_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return kData + "/" + name; }

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("fnv1a reference vectors") {
  CHECK(cli::fnv1a_hex("") == "cbf29ce484222325");
  CHECK(cli::fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(cli::fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("newton read-off and envelope") {
  auto r = qdg_run({"newton", data("two_slope.json")});
  REQUIRE(r.code == 0);
  auto d = r.doc();
  CHECK(d["slopes"] == json({0, 1}));
  CHECK(d["mults"] == json({1, 1}));
  CHECK(d["schema"] == "qdg/1");
  CHECK(d["command"] == "newton");
  CHECK(d.contains("context"));
  CHECK(d["manifest"]["inputs"][0]["fnv1a64"] == cli::fnv1a_hex(slurp(data("two_slope.json"))));

  auto r3 = qdg_run({"newton", data("three_slope.json")});
  REQUIRE(r3.code == 0);
  CHECK(r3.doc()["slopes"] == json({0, 1, 2}));
  CHECK(r3.doc()["mults"] == json({1, 2, 1}));
}

TEST_CASE("context flags are embedded") {
  auto r = qdg_run({"--q", "4,0", "--eps", "1e-10", "--window", "20", "--theta-terms", "12", "--seed", "7", "theta", "--z", "0.3,0.2"});
  REQUIRE(r.code == 0);
  auto d = r.doc();
  CHECK(d["context"]["q"][0].get<double>() == 4.0);
  CHECK(d["context"]["eps"].get<double>() == 1e-10);
  CHECK(d["context"]["window"] == 20);
  CHECK(d["context"]["theta_terms"] == 12);
  CHECK(d["manifest"]["seed"] == 7);
  CHECK(d["functional_residual"].get<double>() < 1e-12);
  // Flags may also follow the subcommand.
  auto r2 = qdg_run({"theta", "--z", "0.3,0.2", "--q", "4,0"});
  REQUIRE(r2.code == 0);
  CHECK(r2.doc()["theta"] == d["theta"]);
}

TEST_CASE("echar functional equation") {
  auto r = qdg_run({"echar", "--c", "1.5,0.2", "--z", "0.7,-0.4"});
  REQUIRE(r.code == 0);
  CHECK(r.doc()["functional_residual"].get<double>() < 1e-12);
}

TEST_CASE("check reports condition vi on the counterexample") {
  auto r = qdg_run({"check", data("contrex.json")});
  REQUIRE(r.code == 0);
  auto d = r.doc();
  CHECK(d["conditions"]["vi"]["pass"] == false);
  for (const char* c : {"i", "ii", "iii", "iv", "v"}) CHECK(d["conditions"][c]["pass"] == true);
  CHECK(d["all_pass"] == false);
  CHECK(d["theta"]["coweight"].is_null());

  auto s = qdg_run({"check", data("borel_sl3.json")});
  REQUIRE(s.code == 0);
  CHECK(s.doc()["all_pass"] == true);
  const json chi = s.doc()["theta"]["coweight"];
  for (const auto& root : {json({2, -1}), json({-1, 2}), json({1, 1})}) {
    CHECK(root[0].get<long long>() * chi[0].get<long long>() + root[1].get<long long>() * chi[1].get<long long>() <= -1);
  }
}

TEST_CASE("exit codes") {
  auto m = qdg_run({"newton", data("malformed.json")});
  CHECK(m.code == cli::kExitSchema);
  CHECK(m.err.find("byte") != std::string::npos);
  CHECK(m.doc()["error"]["code"] == 65);

  CHECK(qdg_run({"frobnicate"}).code == cli::kExitUsage);
  CHECK(qdg_run({}).code == cli::kExitUsage);
  CHECK(qdg_run({"theta"}).code == cli::kExitUsage);
  CHECK(qdg_run({"theta", "--z", "abc"}).code == cli::kExitUsage);
  CHECK(qdg_run({"newton", data("does_not_exist.json")}).code == cli::kExitUsage);

  // Schema violation: a group file fed to a system command; the path names the missing field.
  auto s = qdg_run({"newton", data("contrex.json")});
  CHECK(s.code == cli::kExitSchema);
  CHECK(s.err.find("blocks") != std::string::npos);

  auto d = qdg_run({"realize", "--group", data("contrex.json")});
  CHECK(d.code == cli::kExitDomain);
  CHECK(d.doc()["error"]["kind"] == "no_theta_structure");
}

TEST_CASE("determinism and --out") {
  const std::vector<std::string> args{"realize", "--group", data("two_level.json")};
  auto a = qdg_run(args), b = qdg_run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.doc()["verified"] == true);

  const std::string path = "qdg_cli_test_out.json";
  std::remove(path.c_str());
  auto w = qdg_run({"--out", path, "newton", data("two_slope.json")});
  REQUIRE(w.code == 0);
  CHECK(w.out.empty());
  CHECK(json::parse(slurp(path))["slopes"] == json({0, 1}));
  std::remove(path.c_str());
}

TEST_CASE("structure commands") {
  // dim V^(delta) = delta * sum r_i r_j over slope pairs at distance delta.
  auto g = qdg_run({"gdecomp", data("three_slope.json")});
  REQUIRE(g.code == 0);
  const json gd = g.doc();
  CHECK(gd["dimV"]["1"] == 1 * (1 * 2 + 2 * 1));
  CHECK(gd["dimV"]["2"] == 2 * (1 * 1));
  int cells = 0;
  for (const auto& c : gd["cells"]) cells += c["dim"].get<int>();
  CHECK(cells == 1 * 2 + 2 * 1 + 1 * 1);

  auto s = qdg_run({"sigmaset", data("two_slope.json")});
  REQUIRE(s.code == 0);
  CHECK(s.doc()["classes"].size() == 1);

  auto l = qdg_run({"lie", "--gens", "3", "--depth", "5"});
  REQUIRE(l.code == 0);
  CHECK(l.doc()["hall_dims"] == json({3, 3, 8, 18, 48}));
  auto c = qdg_run({"lie", data("sl2_generators.json")});
  REQUIRE(c.code == 0);
  CHECK(c.doc()["closure_dim"] == 3);
}

TEST_CASE("analytic commands") {
  auto s = qdg_run({"sum", data("q_euler.json"), "--lambda", "0.7,0.3"});
  REQUIRE(s.code == 0);
  CHECK(s.doc()["residual"].get<double>() < 1e-9);

  auto cn = qdg_run({"connect", data("rational_rank1.json")});
  REQUIRE(cn.code == 0);
  CHECK(cn.doc()["max_residual0"].get<double>() < 1e-8);
  CHECK(cn.doc()["max_residual_inf"].get<double>() < 1e-8);
  CHECK(cn.doc()["max_ellipticity"].get<double>() < 1e-8);

  auto rc = qdg_run({"realize-class", data("realize_class.json")});
  REQUIRE(rc.code == 0);
  CHECK(rc.doc()["max_error"].get<double>() < 1e-7);
  // The realized system reads back through the schema.
  CHECK_NOTHROW(json_io::read_system(rc.doc()["system"]));

  auto g = qdg_run({"galois", data("q_euler.json")});
  REQUIRE(g.code == 0);
  CHECK(g.doc()["descriptor"]["wild_dim"] == 1);
  CHECK(g.doc()["descriptor"]["torus"] == 1);
  auto f = qdg_run({"galois", data("fuchsian_torus.json")});
  REQUIRE(f.code == 0);
  CHECK(f.doc()["descriptor"]["torus"] == 2);
  CHECK(f.doc()["descriptor"]["finite"] == json({1, 1}));

  auto gl = qdg_run({"realize", "--group", data("gl2.json"), "--global"});
  REQUIRE(gl.code == 0);
  CHECK(gl.doc()["lie_dim"] == 4);
  auto sl = qdg_run({"realize", "--group", data("borel_sl2.json"), "--global"});
  REQUIRE(sl.code == 0);
  CHECK(sl.doc()["lie_dim"] == 3);
}

TEST_CASE("json round trips") {
  auto S = json_io::read_system(json::parse(slurp(data("three_slope.json"))));
  auto back = json_io::read_system(json_io::write_system(S));
  CHECK(back.rank() == S.rank());
  CHECK(back.U.size() == S.U.size());
  for (const auto& [k, m] : S.U)
    for (int i = 0; i < m.rows; ++i)
      for (int j = 0; j < m.cols; ++j) {
        const auto& p = m.at(i, j);
        const auto& q = back.U.at(k).at(i, j);
        for (int e = -2; e <= 3; ++e) CHECK(std::abs(p.coeff(e) - q.coeff(e)) == 0.0);
      }
  const auto sym = EqPointSym::q_power(1, 2) + EqPointSym::generator("a", -3);
  CHECK(json_io::read_sym(json_io::write_sym(sym), "") == sym);
  CHECK_THROWS_AS(json_io::read_sym(json{{"zeta", {1, 0}}}, ""), Error);
  CHECK_THROWS_AS(json_io::read_mat(json{{1, 2}, {3}}, ""), Error);
}

TEST_CASE("binary exit status") {
  const std::string bin = QDG_CLI_PATH;
  auto status = [&](const std::string& args) {
    const int s = std::system((bin + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  CHECK(status("newton " + data("two_slope.json")) == 0);
  CHECK(status("nosuchcommand") == 64);
  CHECK(status("newton " + data("malformed.json")) == 65);
  CHECK(status("realize --group " + data("contrex.json")) == 70);
}

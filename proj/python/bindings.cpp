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

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "qdg/cli.hpp"
#include "qdg/json_io.hpp"
#include "qdg/special.hpp"

namespace py = pybind11;
using namespace qdg;
using json_io::json;

namespace {

QContext context(cd q) { return QContext::make(q); }

json parse_arg(const std::string& text) { return json_io::parse(text, "<argument>"); }

std::string descriptor_json(const galois::GaloisDescriptor& d) { return json_io::write_descriptor(d).dump(); }

}  // namespace

PYBIND11_MODULE(_qdg, m) {
  m.doc() = "q-difference Galois toolkit";

  static py::exception<Error> exc(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string msg = std::string(e.kind_name()) + ": " + e.what();
#if PYBIND11_VERSION_HEX >= 0x020C0000
      py::set_error(exc, msg.c_str());
#else
      exc(msg.c_str());
#endif
    }
  });

  m.def("theta", [](cd z, cd q) { return special::theta(z, context(q)); }, py::arg("z"), py::arg("q"));
  m.def("e_char", [](cd c, cd z, cd q) { return special::e_char(c, z, context(q)); }, py::arg("c"), py::arg("z"), py::arg("q"));
  m.def("l_q", [](cd z, cd q) { return special::l_q(z, context(q)); }, py::arg("z"), py::arg("q"));

  m.def("witt_dimension", &lie::witt_dimension, py::arg("generators"), py::arg("length"));
  m.def(
      "hall_dims",
      [](int g, int depth, cd q) {
        const auto ctx = context(q);
        std::vector<lie::GenLabel> gens;
        for (int k = 0; k < g; ++k)
          gens.push_back(lie::GenLabel::alien(
              1, EqPoint::from_both(cd(1.3 + k, 0.2), EqPointSym::generator("g" + std::to_string(k + 1)), ctx), 1));
        return lie::hall_basis(gens, depth, ctx).dims_per_length();
      },
      py::arg("generators"), py::arg("depth"), py::arg("q") = cd(3.0, 0.0));
  m.def(
      "lie_closure",
      [](const std::vector<CMat>& mats) { return lie::lie_closure(mats); }, py::arg("matrices"));

  m.def(
      "newton",
      [](const std::string& system) {
        const auto nd = bg::newton(json_io::read_system(parse_arg(system)));
        return std::make_pair(nd.slopes, nd.mults);
      },
      py::arg("system_json"));
  m.def(
      "dim_v", [](const std::string& system, int delta) { return bg::dimV(json_io::read_system(parse_arg(system)), delta); },
      py::arg("system_json"), py::arg("delta"));
  m.def(
      "wild_local_group",
      [](const std::string& system, cd q) {
        return descriptor_json(galois::wild_local_group(json_io::read_system(parse_arg(system)), context(q)));
      },
      py::arg("system_json"), py::arg("q"));
  m.def(
      "check_necessary",
      [](const std::string& group) {
        const auto rep = theta_inverse::check_necessary(json_io::read_group(parse_arg(group)));
        std::vector<std::pair<std::string, bool>> out;
        for (const auto& c : rep.conditions) out.emplace_back(c.name, c.pass);
        return out;
      },
      py::arg("group_json"));
  m.def(
      "find_theta_coweight",
      [](const std::vector<std::vector<long long>>& roots, int mu) { return theta_inverse::find_theta_coweight(roots, mu); },
      py::arg("roots"), py::arg("mu"));
  m.def(
      "realize_local",
      [](const std::string& group, cd q) {
        const auto R = theta_inverse::realize_local(json_io::read_group(parse_arg(group)), context(q));
        json out = {{"system", json_io::write_system(R.system)},
                    {"slopes", R.slopes},
                    {"descriptor", json_io::write_descriptor(R.descriptor)},
                    {"verified", R.verified},
                    {"residue_error", R.residue_error}};
        return out.dump();
      },
      py::arg("group_json"), py::arg("q"));

  m.def(
      "run",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the qdg command line in-process; returns (exit status, stdout, stderr).");
}

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

#include <json.hpp>

#include "qdg/inverse.hpp"

namespace qdg::json_io {

using nlohmann::json;

inline constexpr const char* kSchema = "qdg/1";

// Readers throw Error(Schema) with a JSON-pointer-like path.
cd read_cd(const json& j, const std::string& path);
CMat read_mat(const json& j, const std::string& path);
LaurentPoly read_poly(const json& j, const std::string& path);
EqPointSym read_sym(const json& j, const std::string& path);
bg::BGSystem read_system(const json& j, const std::string& path = "");
theta_inverse::TriangGroupData read_group(const json& j, const std::string& path = "");
std::vector<theta_inverse::RootSpace> read_roots(const json& j, const std::string& path);

json write_cd(cd z);
json write_mat(const CMat& m);
json write_poly(const LaurentPoly& p);
json write_sym(const EqPointSym& s);
json write_system(const bg::BGSystem& S);
json write_group(const theta_inverse::TriangGroupData& G);
json write_descriptor(const galois::GaloisDescriptor& d);
json write_context(const QContext& ctx);

// Parses text, mapping syntax errors to Error(Schema) with the byte position.
json parse(const std::string& text, const std::string& source);

}  // namespace qdg::json_io

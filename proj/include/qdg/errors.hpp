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

#include <stdexcept>
#include <string>

namespace qdg {

enum class ErrorKind {
  Domain,
  Schema,
  SingularCharacter,
  Pole,
  ProhibitedDirection,
  BranchCut,
  NoThetaStructure,
  RankDeficient,
  Precondition,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  const char* kind_name() const noexcept;

 private:
  ErrorKind kind_;
};

inline const char* Error::kind_name() const noexcept {
  switch (kind_) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::SingularCharacter: return "singular_character";
    case ErrorKind::Pole: return "pole";
    case ErrorKind::ProhibitedDirection: return "prohibited_direction";
    case ErrorKind::BranchCut: return "branch_cut";
    case ErrorKind::NoThetaStructure: return "no_theta_structure";
    case ErrorKind::RankDeficient: return "rank_deficient";
    case ErrorKind::Precondition: return "precondition";
  }
  return "unknown";
}

[[noreturn]] inline void fail(ErrorKind k, const std::string& msg) { throw Error(k, msg); }

}  // namespace qdg

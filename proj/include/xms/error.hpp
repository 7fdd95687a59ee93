// Copyright 2026 The xms Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace xms {

// Fine-grained failure reasons. Each maps onto one of the CLI exit classes
// (config = 2, data = 3, numerical = 4).
enum class Errc {
  invalid_argument,
  config,
  missing_file,
  malformed_file,
  pair_count_mismatch,
  non_finite,
  label_out_of_range,
  empty_class,
  dimension_mismatch,
  index_out_of_range,
  singular_matrix,
  no_covariance_structure,
  divergence,
  internal,
};

enum class ErrorClass { config = 2, data = 3, numerical = 4 };

inline const char* errc_name(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid argument";
    case Errc::config: return "config error";
    case Errc::missing_file: return "missing file";
    case Errc::malformed_file: return "malformed file";
    case Errc::pair_count_mismatch: return "pair count mismatch";
    case Errc::non_finite: return "non-finite value";
    case Errc::label_out_of_range: return "label out of range";
    case Errc::empty_class: return "empty class";
    case Errc::dimension_mismatch: return "dimension mismatch";
    case Errc::index_out_of_range: return "index out of range";
    case Errc::singular_matrix: return "singular matrix";
    case Errc::no_covariance_structure: return "no covariance structure";
    case Errc::divergence: return "divergence";
    case Errc::internal: return "internal error";
  }
  return "unknown error";
}

inline ErrorClass error_class(Errc code) {
  switch (code) {
    case Errc::invalid_argument:
    case Errc::config:
      return ErrorClass::config;
    case Errc::missing_file:
    case Errc::malformed_file:
    case Errc::pair_count_mismatch:
    case Errc::non_finite:
    case Errc::label_out_of_range:
    case Errc::empty_class:
    case Errc::dimension_mismatch:
    case Errc::index_out_of_range:
      return ErrorClass::data;
    case Errc::singular_matrix:
    case Errc::no_covariance_structure:
    case Errc::divergence:
    case Errc::internal:
      return ErrorClass::numerical;
  }
  return ErrorClass::numerical;
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }
  int exit_code() const noexcept { return static_cast<int>(error_class(code_)); }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, Errc code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace xms

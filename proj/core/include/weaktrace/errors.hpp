// Copyright 2026 The weaktrace authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace weaktrace {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Two states or an operator and a state do not share the required basis.
struct BasisMismatchError : Error {
  BasisMismatchError() : Error("incompatible bases") {}
  explicit BasisMismatchError(const std::string& detail)
      : Error("incompatible bases: " + detail) {}
};

/// A network description failed to parse. Carries the 1-based line number.
struct ParseError : Error {
  ParseError(std::size_t line_no, const std::string& what)
      : Error("line " + std::to_string(line_no) + ": " + what), line(line_no) {}
  std::size_t line;
};

/// A structurally well-formed network violates a validity rule.
struct ValidationError : Error {
  using Error::Error;
};

/// The pre- and post-selection pair never co-occurs: |<Phi|Psi>| is below
/// the null-post-selection threshold, so weak values are undefined.
struct NullPostselectionError : Error {
  explicit NullPostselectionError(double overlap_magnitude)
      : Error("null post-selection"), overlap(overlap_magnitude) {}
  double overlap;
};

}  // namespace weaktrace

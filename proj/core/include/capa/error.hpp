// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef CAPA_ERROR_HPP
#define CAPA_ERROR_HPP

#include <stdexcept>
#include <string>

namespace capa {

// Base for every error the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid generation or solver parameters (e.g. surfaces that cannot fit).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed scenario / channel file. Carries the line when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

// A well-formed object that breaks a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Evaluation outside a function's domain (e.g. the Green's function at r = u).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Ill-conditioned or singular linear system.
class LinalgError : public Error {
 public:
  using Error::Error;
};

// A beam whose normalization b^H A b vanishes.
class DegenerateBeamError : public Error {
 public:
  DegenerateBeamError(int surface, int beam, const std::string& what)
      : Error(what), surface_(surface), beam_(beam) {}
  int surface() const noexcept { return surface_; }
  int beam() const noexcept { return beam_; }

 private:
  int surface_;
  int beam_;
};

}  // namespace capa

#endif  // CAPA_ERROR_HPP

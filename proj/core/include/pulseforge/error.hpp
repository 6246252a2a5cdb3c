/* Copyright 2026 The PulseForge Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pulseforge {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (m >= 1, H >= 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Inconsistent configuration: unknown tags, wrong parameter counts, target/mode mismatch.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A request reaches past the data it refers to (e.g. propagating beyond a field's end).
class RangeError : public Error {
 public:
  using Error::Error;
};

// A PMP flow hit |(Omega_0x, Omega_0y)| below the singularity threshold.
class SingularFlowError : public Error {
 public:
  SingularFlowError(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Non-finite values or an optimizer that cannot make progress.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

}  // namespace pulseforge

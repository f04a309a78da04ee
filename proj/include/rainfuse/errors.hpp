// Copyright 2026 The Rainfuse Authors
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

#ifndef RAINFUSE_ERRORS_HPP
#define RAINFUSE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rainfuse {

/// Stable process exit codes, usable from scripts.
enum ExitCode : int {
  kExitOk = 0,
  kExitInputError = 2,
  kExitNumericalError = 3,
  kExitInsufficientData = 4,
};

/// Malformed or inconsistent input: unreadable files, schema mismatches,
/// incompatible grids, bad configuration values.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical degeneracy, e.g. a likelihood that annihilates every particle.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Not enough data to run the requested analysis (e.g. < 2 vehicles for
/// leave-one-out validation).
class InsufficientDataError : public std::runtime_error {
 public:
  explicit InsufficientDataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rainfuse

#endif  // RAINFUSE_ERRORS_HPP

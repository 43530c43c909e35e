// Copyright 2026 The hybridnn Authors.
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

namespace hnn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape, dtype or argument contract violated by a caller.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Argument outside an operation's documented domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Invalid architecture, activation, conversion or search configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Missing, corrupt or out-of-contract input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure such as a non-finite loss or objective.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace hnn

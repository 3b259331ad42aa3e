// Copyright 2026 The mfrkhs Authors
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

namespace mfrkhs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Axis not strictly increasing, too short, or otherwise unusable.
class InvalidGridError : public Error {
 public:
  using Error::Error;
};

/// Two samples that must live on the same grid do not.
class GridMismatchError : public Error {
 public:
  using Error::Error;
};

/// Shape, sign or range violation in an argument.
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

/// Grid too coarse for the requested basis.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or a failed factorization.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. The message carries the offending location.
class ParseError : public Error {
 public:
  using Error::Error;
};

class VersionError : public Error {
 public:
  using Error::Error;
};

}  // namespace mfrkhs

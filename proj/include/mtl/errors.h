// mtl/errors.h

// Copyright 2026 The mtlspeech Authors
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

#ifndef MTL_ERRORS_H_
#define MTL_ERRORS_H_

#include <stdexcept>
#include <string>

namespace mtl {

// Exception hierarchy. The command-line front end maps ConfigError to exit
// code 2, DataError (and its subclasses) to 3, NumericalError to 4.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// Shape disagreement between operands.
class DimensionError : public DataError {
 public:
  using DataError::DataError;
};

// Argument outside an operation's mathematical domain (log of 0, zero-norm
// embedding, degenerate cohort, ...).
class DomainError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// A label sequence that no CTC alignment over the given frames can produce.
class InfeasibleAlignment : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace mtl

#endif  // MTL_ERRORS_H_

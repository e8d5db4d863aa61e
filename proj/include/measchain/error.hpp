// Copyright 2026 The measchain Authors
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

namespace measchain {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NormalizationError : public Error {
 public:
  using Error::Error;
};

class NotHermitianError : public Error {
 public:
  using Error::Error;
};

class NotUnitaryError : public Error {
 public:
  using Error::Error;
};

class UnknownLabelError : public Error {
 public:
  using Error::Error;
};

class DuplicateLabelError : public Error {
 public:
  using Error::Error;
};

/// Spectral data that does not describe a projective observable.
class ObservableError : public Error {
 public:
  using Error::Error;
};

/// Device/chain wiring that cannot be realised.
class ChainError : public Error {
 public:
  using Error::Error;
};

/// Conditioning on an event of (numerically) zero probability.
class ZeroProbabilityError : public Error {
 public:
  using Error::Error;
};

/// A probability outside [0,1] by more than rounding can explain.
class ProbabilityRangeError : public Error {
 public:
  using Error::Error;
};

}  // namespace measchain

/*
 * Copyright 2026 The ForestViT Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace forestvit {

// Root of every exception thrown by the library. The CLI reports
// ConfigError as a usage error (exit 1) and every other Error as exit 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf where a finite value is required, or a log of zero.
class NumericDomainError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration (sizes, probabilities, normalizer bounds...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Dataset content problems: unknown class dirs, empty splits, bad CSV rows.
class DataError : public Error {
 public:
  using Error::Error;
};

// Undecodable or malformed files (PNG, checkpoints, key-value text).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Caller violated a precondition that is not about shapes.
class ContractError : public Error {
 public:
  using Error::Error;
};

// An iterative procedure produced a non-finite state.
class IterationError : public Error {
 public:
  using Error::Error;
};

}  // namespace forestvit

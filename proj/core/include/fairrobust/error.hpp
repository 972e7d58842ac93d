// Copyright 2026 The fairrobust Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FAIRROBUST_ERROR_HPP_
#define FAIRROBUST_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fairrobust {

using Index = std::size_t;

// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed, missing or degenerate input data.
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid parameters or configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Non-finite values or failed numerical preconditions.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace fairrobust

#endif  // FAIRROBUST_ERROR_HPP_

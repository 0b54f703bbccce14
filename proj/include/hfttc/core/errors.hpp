// Copyright 2026 The hfttc Authors
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

#ifndef HFTTC__CORE__ERRORS_HPP_
#define HFTTC__CORE__ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace hfttc
{

/// Base class for every error raised by the core library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration value (thresholds, hyperparameters, flags).
class ConfigError : public Error
{
public:
  using Error::Error;
};

/// Malformed or inconsistent input data.
class DataError : public Error
{
public:
  using Error::Error;
};

/// Non-finite values or divergence during computation.
class NumericError : public Error
{
public:
  using Error::Error;
};

/// A caller violated an operation's precondition.
class ContractError : public Error
{
public:
  using Error::Error;
};

/// Operand shapes do not satisfy an operation's shape rule.
class DimensionError : public ContractError
{
public:
  using ContractError::ContractError;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public ContractError
{
public:
  using ContractError::ContractError;
};

}  // namespace hfttc

#endif  // HFTTC__CORE__ERRORS_HPP_

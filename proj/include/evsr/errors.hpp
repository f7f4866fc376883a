// Copyright 2026 The evsr Authors
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

#ifndef EVSR_ERRORS_HPP
#define EVSR_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace evsr
{
/// Caller passed a value that violates an operation's precondition.
class ArgumentError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed text event file. Carries the 1-based line number.
class ParseError : public std::runtime_error
{
public:
  ParseError(std::size_t line, const std::string & what)
  : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line)
  {
  }
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

/// Malformed binary file (events or dictionary).
class FormatError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Numerical domain violated, e.g. a non-positive intensity fed to a log.
class DomainError : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

class TrainingError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// An internal contract was broken (rate above its dominating constant, uncovered pixel, ...).
class ContractViolation : public std::logic_error
{
public:
  using std::logic_error::logic_error;
};

/// A metric is undefined for the given inputs (empty reference).
class MetricError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

}  // namespace evsr

#endif  // EVSR_ERRORS_HPP

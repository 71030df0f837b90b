// Copyright 2026 the qfsru authors
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

namespace qfsru {

// Base of every error raised by the library. The CLI maps the concrete type
// to a process exit code.
class Error : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
    using Error::Error;
};

class ConfigError : public Error {
 public:
    using Error::Error;
};

// Malformed input file. `line` is 1-based, 0 when not line-oriented.
class ParseError : public Error {
 public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

 private:
    std::size_t line_;
};

class SchemaError : public Error {
 public:
    using Error::Error;
};

class DegenerateInputError : public Error {
 public:
    using Error::Error;
};

class ContractError : public Error {
 public:
    using Error::Error;
};

// Non-finite values, PSD violations, diverging losses.
class NumericError : public Error {
 public:
    using Error::Error;
};

class RetrievalError : public Error {
 public:
    using Error::Error;
};

}  // namespace qfsru

// Copyright 2026 The qrisk Authors
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

namespace qrisk {

// Base of every error raised by the engine. `code()` is a stable,
// machine-readable identifier that the service and CLI surface verbatim.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& message)
      : Error("domain_error", message) {}
};

// Malformed input file. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line)
      : Error("parse_error", line > 0 ? "line " + std::to_string(line) + ": " + message
                                      : message),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

// Inconsistent inputs to a composed computation (e.g. group size mismatch).
class ConfigError : public Error {
 public:
  ConfigError(std::string code, const std::string& message)
      : Error(std::move(code), message) {}
};

// Requested model variant the engine refuses to evaluate.
class UnsupportedModel : public Error {
 public:
  explicit UnsupportedModel(const std::string& message)
      : Error("unsupported_model", message) {}
};

// A cohort record or cohort as a whole violates an ingestion invariant.
class ValidationError : public Error {
 public:
  ValidationError(std::string code, const std::string& message, std::string case_id = {})
      : Error(std::move(code), message), case_id_(std::move(case_id)) {}

  const std::string& case_id() const noexcept { return case_id_; }

 private:
  std::string case_id_;
};

// Problem size beyond what exact enumeration is meant to handle.
class SizeLimitError : public Error {
 public:
  explicit SizeLimitError(const std::string& message)
      : Error("size_limit", message) {}
};

// Largest group size any computation accepts.
inline constexpr int kMaxGroupSize = 1000;

}  // namespace qrisk

// Copyright 2026 The CES Toolkit Authors.
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

#pragma once

#include <stdexcept>
#include <string>

namespace ces {

/// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorKind {
  kUsage = 1,         // bad flags, missing files
  kValidation = 2,    // malformed or out-of-domain data
  kPrecondition = 3,  // well-formed input an operation cannot accept
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error UsageError(const std::string& msg) {
  return Error(ErrorKind::kUsage, msg);
}
inline Error ValidationError(const std::string& msg) {
  return Error(ErrorKind::kValidation, msg);
}
inline Error PreconditionError(const std::string& msg) {
  return Error(ErrorKind::kPrecondition, msg);
}

const char* ErrorKindName(ErrorKind kind) noexcept;

}  // namespace ces

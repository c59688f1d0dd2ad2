/*
 * Copyright 2026 The Recourse Authors.
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

#ifndef RECOURSE_ERROR_H_
#define RECOURSE_ERROR_H_

#include <stdexcept>
#include <string>

namespace recourse {

// Error categories. The numeric values double as the CLI exit codes.
enum class ErrorCode : int {
  kInternal = 1,
  kInvalidInput = 2,
  kInfeasible = 3,
  kCapExceeded = 4,
};

class RecourseError : public std::runtime_error {
 public:
  RecourseError(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void throw_invalid(const std::string& message) {
  throw RecourseError(ErrorCode::kInvalidInput, message);
}

[[noreturn]] inline void throw_infeasible(const std::string& message) {
  throw RecourseError(ErrorCode::kInfeasible, message);
}

}  // namespace recourse

#endif  // RECOURSE_ERROR_H_

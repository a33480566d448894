// Copyright 2026 The Impulse Authors. All Rights Reserved.
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

#ifndef IMPULSE_ERRORS_H_
#define IMPULSE_ERRORS_H_

#include <stdexcept>
#include <string>

// Exception types thrown by the library. Callers that only care about the
// broad category can catch the std base classes.
namespace impulse {

// A precondition on an argument was violated (empty frame, lag too large...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A configuration struct failed validation. field() names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Levinson-Durbin was handed r[0] <= 0 (silence).
class DegenerateSignalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Levinson-Durbin produced a reflection coefficient with magnitude >= 1.
// stage() is the 1-based recursion order at which it happened.
class IllConditionedError : public std::runtime_error {
 public:
  IllConditionedError(int stage, const std::string& message)
      : std::runtime_error(message), stage_(stage) {}
  int stage() const { return stage_; }

 private:
  int stage_;
};

// Misuse of a streaming object: sample-rate change mid-stream, push after
// flush, unsorted detections handed to the scorer.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Mixing was asked to scale a zero-RMS event or background segment.
class DegenerateMixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unsupported or malformed file content.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace impulse

#endif  // IMPULSE_ERRORS_H_

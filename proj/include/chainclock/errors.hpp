// Copyright 2026 The chainclock Authors
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

namespace chainclock {

// Bad user input: malformed specs, configs, out-of-range arguments.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

// The requested formula does not apply to this input (e.g. paired tick PDF on odd N).
class UnsupportedInput : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Population is trapped: the tick distribution does not integrate to one.
class ImproperDistribution : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

// Absorbed fraction below the configured floor.
class NoTick : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

class ResumeMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace chainclock

// hsc/error.h
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HSC_ERROR_H_
#define HSC_ERROR_H_

#include <stdexcept>
#include <string>

namespace hsc {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed bytes or text in an input file.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Well-formed container, but a layout we do not handle (e.g. stereo WAV).
class UnsupportedFormatError : public FormatError {
 public:
  using FormatError::FormatError;
};

// A serialized model of the wrong kind for the requested load.
class IncompatibleModelError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration value or combination.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Invalid runtime argument (empty signal, negative frequency, ...).
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// Mismatched vector/matrix dimensions between cooperating objects.
class DimensionError : public InvalidInputError {
 public:
  using InvalidInputError::InvalidInputError;
};

// Non-finite intermediate values, singular systems, diverged training.
class NumericError : public Error {
 public:
  using Error::Error;
};

// A metric requested over data that cannot define it (e.g. sensitivity
// with no abnormal records at all).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace hsc

#endif  // HSC_ERROR_H_

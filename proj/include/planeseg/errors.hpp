/* Copyright 2026 The PlaneSeg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef PLANESEG_ERRORS_HPP_
#define PLANESEG_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace planeseg {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration value or inconsistent configuration inputs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Tensor/image dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Input is mathematically degenerate for the requested operation
// (collinear points, zero-norm vector, ...).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// Loss normalization is undefined (zero positive matches).
class NormalizationError : public Error {
 public:
  using Error::Error;
};

// File could not be opened / read / written.
class IoError : public Error {
 public:
  using Error::Error;
};

// File exists but its contents violate the expected format.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Paired files (label image + sidecar) contradict each other.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Value exceeds what the on-disk representation can hold.
class CapacityError : public Error {
 public:
  using Error::Error;
};

}  // namespace planeseg

#endif  // PLANESEG_ERRORS_HPP_

// Copyright 2026 The dpft Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPFT_ERROR_HPP_
#define DPFT_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace dpft {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad argument or violated precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Parameter vector / architecture disagreement.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Non-finite gradient encountered during training.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// File or stream failure; the message carries the file position.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dpft

#endif  // DPFT_ERROR_HPP_

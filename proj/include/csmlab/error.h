// Copyright 2026 The csmlab Authors
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

#ifndef CSMLAB_ERROR_H
#define CSMLAB_ERROR_H

#include <cstddef>
#include <stdexcept>
#include <string>

namespace csmlab {

/// Base class of every failure raised by the library.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// A requested dimension exceeds the configured dense-storage budget.
class CapacityError : public Error {
   public:
    using Error::Error;
};

/// Operand shapes or site layouts do not fit together.
class ShapeError : public Error {
   public:
    using Error::Error;
};

/// An input violates a structural requirement (normalization, unitarity, orthogonality...).
class ValidationError : public Error {
   public:
    using Error::Error;
};

/// A numerical routine failed to converge or produced non-finite values.
class NumericError : public Error {
   public:
    using Error::Error;
};

/// A truncated Fock space cannot hold the requested state within the tail budget.
class TruncationError : public NumericError {
   public:
    TruncationError(const std::string &what, std::size_t required_n_max)
        : NumericError(what), required_n_max_(required_n_max) {
    }
    std::size_t required_n_max() const noexcept {
        return required_n_max_;
    }

   private:
    std::size_t required_n_max_;
};

}  // namespace csmlab

#endif

// nplda/error.h

// Copyright 2026  The nplda-backend Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef NPLDA_ERROR_H_
#define NPLDA_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nplda {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string &what) : std::runtime_error(what) {}
};

/// Shapes of two operands disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be inverted or factored is numerically singular, or a
/// value that must be finite is not.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss or diverged.
class TrainingError : public Error {
 public:
  using Error::Error;
};

/// Parse and validation errors for archives, trial lists, score files and
/// model files.  `record()` is the 1-based record (or line) that triggered the
/// error, or 0 when the error is not tied to a record.
class DataError : public Error {
 public:
  enum class Kind {
    kIo,
    kMalformedHeader,
    kDimensionMismatch,
    kDuplicateId,
    kNonFinite,
    kUnknownId,
    kBadLabel,
    kBadMagic,
    kVersionMismatch,
    kTruncated,
    kWrongModelType,
    kInsufficientData,
  };

  DataError(Kind kind, const std::string &what, std::size_t record = 0)
      : Error(what), kind_(kind), record_(record) {}

  Kind kind() const { return kind_; }
  std::size_t record() const { return record_; }

 private:
  Kind kind_;
  std::size_t record_;
};

}  // namespace nplda

#endif  // NPLDA_ERROR_H_

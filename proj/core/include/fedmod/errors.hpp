/**
 * Copyright fedmod contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fedmod {

/// Base of every error raised by the library. `kind()` is a stable class
/// name used by the CLI to report failures.
class Error : public std::runtime_error {
 public:
  Error(std::string_view kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  std::string_view kind() const noexcept { return kind_; }

 private:
  std::string_view kind_;
};

#define FEDMOD_DEFINE_ERROR(Name)                                 \
  class Name : public Error {                                     \
   public:                                                        \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  }

FEDMOD_DEFINE_ERROR(ParseError);
FEDMOD_DEFINE_ERROR(SchemaError);
FEDMOD_DEFINE_ERROR(DomainError);
FEDMOD_DEFINE_ERROR(StratificationError);
FEDMOD_DEFINE_ERROR(BoundsError);
FEDMOD_DEFINE_ERROR(LookupError);
FEDMOD_DEFINE_ERROR(DegenerateInputError);
FEDMOD_DEFINE_ERROR(DegenerateTrainingError);
FEDMOD_DEFINE_ERROR(NumericError);
FEDMOD_DEFINE_ERROR(PoolTooSmallError);
FEDMOD_DEFINE_ERROR(GraphError);
FEDMOD_DEFINE_ERROR(UnavailableError);
FEDMOD_DEFINE_ERROR(IoError);

#undef FEDMOD_DEFINE_ERROR

}  // namespace fedmod

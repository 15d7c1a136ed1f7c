// Copyright 2026 The DeepClean Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace deepclean {

enum class ErrorCode {
  InvalidArgument = 1,
  FileNotFound,
  CorruptFormat,
  Io,
  BadMagic,
  VersionMismatch,
  Truncated,
  OrderingMismatch,
  DimensionMismatch,
  MissingModel,
  Internal,
};

/// Every failure raised by the core carries a code that the C boundary maps
/// one-to-one onto `dc_status`.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::InvalidArgument, what);
}

}  // namespace deepclean

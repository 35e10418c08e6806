#pragma once

#include <stdexcept>
#include <string>

namespace romlab {

enum class ErrorCode {
  kInvalidArgument = 1,
  kDimensionMismatch = 2,
  kNonConvergence = 3,
  kSingularMatrix = 4,
  kIo = 5,
  kNumeric = 6,
  kInternal = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorCode::kInvalidArgument, what) {}
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& what) : Error(ErrorCode::kDimensionMismatch, what) {}
};

// Raised by Newton/Gauss-Newton loops. Carries the last residual norm and,
// when the failure happened inside a time loop, the failing step index.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, double residual_norm, long step = -1)
      : Error(ErrorCode::kNonConvergence, what), residual_norm_(residual_norm), step_(step) {}
  double residual_norm() const noexcept { return residual_norm_; }
  long step() const noexcept { return step_; }

 private:
  double residual_norm_;
  long step_;
};

class SingularMatrix : public Error {
 public:
  explicit SingularMatrix(const std::string& what) : Error(ErrorCode::kSingularMatrix, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::kIo, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorCode::kNumeric, what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgument(msg);
}

inline void require_dims(bool cond, const std::string& msg) {
  if (!cond) throw DimensionMismatch(msg);
}

}  // namespace romlab

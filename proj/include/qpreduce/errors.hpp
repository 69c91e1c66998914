#pragma once

#include <stdexcept>
#include <string>

namespace qpr {

// Error categories map one-to-one onto CLI exit codes and C API status values.
enum class ErrorCode : int {
  Runtime = 1,
  IrreducibleResonance = 2,
  Validation = 3,
  ReducibilityViolation = 4,
  LinearResonance = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct BasisError : Error {
  explicit BasisError(const std::string& w) : Error(ErrorCode::Validation, w) {}
};

struct DimError : Error {
  explicit DimError(const std::string& w) : Error(ErrorCode::Validation, w) {}
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& w) : Error(ErrorCode::Validation, w) {}
};

struct NotSemiSimpleError : Error {
  explicit NotSemiSimpleError(const std::string& w) : Error(ErrorCode::Runtime, w) {}
};

struct IrreducibleResonance : Error {
  explicit IrreducibleResonance(const std::string& w)
      : Error(ErrorCode::IrreducibleResonance, w) {}
};

struct AssemblyError : Error {
  explicit AssemblyError(const std::string& w) : Error(ErrorCode::Runtime, w) {}
};

struct SingularSampleError : Error {
  SingularSampleError(const std::string& w, double t)
      : Error(ErrorCode::Runtime, w), time(t) {}
  double time;
};

struct DivergenceError : Error {
  explicit DivergenceError(const std::string& w) : Error(ErrorCode::Runtime, w) {}
};

struct PartitionError : Error {
  explicit PartitionError(const std::string& w) : Error(ErrorCode::Validation, w) {}
};

struct LinearResonance : Error {
  explicit LinearResonance(const std::string& w)
      : Error(ErrorCode::LinearResonance, w) {}
};

struct ReducibilityViolation : Error {
  ReducibilityViolation(const std::string& w, std::string condition)
      : Error(ErrorCode::ReducibilityViolation, w), condition_id(std::move(condition)) {}
  std::string condition_id;
};

struct ImaginaryLeak : Error {
  explicit ImaginaryLeak(const std::string& w) : Error(ErrorCode::Runtime, w) {}
};

struct BlowUpError : Error {
  BlowUpError(const std::string& w, double t) : Error(ErrorCode::Runtime, w), time(t) {}
  double time;
};

struct SegmentError : Error {
  explicit SegmentError(const std::string& w) : Error(ErrorCode::Validation, w) {}
};

struct GridError : Error {
  explicit GridError(const std::string& w) : Error(ErrorCode::Validation, w) {}
};

}  // namespace qpr

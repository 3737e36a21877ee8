#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eqolab {

enum class ErrorKind {
  NonStochasticRow,
  NegativeProbability,
  ValueRangeViolation,
  BruteForceTooLarge,
  NegativeCount,
  InconsistentCounts,
  InvalidExponents,
  NonPositiveConstant,
  NoRoot,
  NonPositiveGap,
  NonPositiveEffectiveGap,
  ParameterConstraintViolation,
  GridTooCoarse,
  LambdaOutOfRange,
  EtaOutOfRange,
  DeltaBelowResolution,
  ResolutionMismatch,
  FixtureNotFound,
  ScheduleConstructionError,
  ConfigError,
  ProvenanceMismatch,
  InvalidArgument,
  IoError,
};

std::string_view error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace eqolab

#include "eqolab/error.hpp"

#include <cmath>
#include <limits>

#include "eqolab/format.hpp"

#include "eqolab/extended_real.hpp"

namespace eqolab {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonStochasticRow: return "NonStochasticRow";
    case ErrorKind::NegativeProbability: return "NegativeProbability";
    case ErrorKind::ValueRangeViolation: return "ValueRangeViolation";
    case ErrorKind::BruteForceTooLarge: return "BruteForceTooLarge";
    case ErrorKind::NegativeCount: return "NegativeCount";
    case ErrorKind::InconsistentCounts: return "InconsistentCounts";
    case ErrorKind::InvalidExponents: return "InvalidExponents";
    case ErrorKind::NonPositiveConstant: return "NonPositiveConstant";
    case ErrorKind::NoRoot: return "NoRoot";
    case ErrorKind::NonPositiveGap: return "NonPositiveGap";
    case ErrorKind::NonPositiveEffectiveGap: return "NonPositiveEffectiveGap";
    case ErrorKind::ParameterConstraintViolation: return "ParameterConstraintViolation";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::LambdaOutOfRange: return "LambdaOutOfRange";
    case ErrorKind::EtaOutOfRange: return "EtaOutOfRange";
    case ErrorKind::DeltaBelowResolution: return "DeltaBelowResolution";
    case ErrorKind::ResolutionMismatch: return "ResolutionMismatch";
    case ErrorKind::FixtureNotFound: return "FixtureNotFound";
    case ErrorKind::ScheduleConstructionError: return "ScheduleConstructionError";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::ProvenanceMismatch: return "ProvenanceMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

ExtReal parse_ext_real(const std::string& text) {
  if (text == "inf" || text == "infinity" || text == "Infinity" || text == "INF") {
    return ExtReal::infinity();
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    fail(ErrorKind::InvalidArgument, "not a number: " + text);
  }
  if (used != text.size() || std::isnan(v) || v < 0.0) {
    fail(ErrorKind::InvalidArgument, "expected a nonnegative number or inf: " + text);
  }
  return ExtReal(v);
}

std::string format_ext_real(ExtReal x) {
  if (x.is_infinite()) return "inf";
  return format_double(x.value());
}

}  // namespace eqolab

#include "pas/error.hpp"

namespace pas {

const char* to_string(ErrorKind kind) noexcept
{
  switch (kind) {
    case ErrorKind::EmptyFit: return "EmptyFit";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EmptyTarget: return "EmptyTarget";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::RangeError: return "RangeError";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::DegenerateKernel: return "DegenerateKernel";
    case ErrorKind::EmptySelection: return "EmptySelection";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

} // namespace pas

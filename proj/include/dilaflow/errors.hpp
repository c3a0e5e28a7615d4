#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dilaflow {

enum class ErrorCode {
  Malformed,
  NonParallelEdges,
  NegativeRatio,
  Disconnected,
  BareBoundaryComponent,
  SelfIntersectingPolygon,
  InconsistentConeAngle,
  ParamOutOfRange,
  BrokenChain,
  InvalidStart,
  SectionParallelToDirection,
  NotHyperbolic,
  NotASaddleConnection,
  NoCrossingFound,
  UnboundedCrossings,
};

std::string_view to_string(ErrorCode code);

/// Domain error raised by the library. The CLI maps these to exit status 1.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dilaflow

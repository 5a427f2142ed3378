#pragma once

#include <stdexcept>
#include <string>

namespace wavepin {

/// Base of every error raised by the library. Each failure mode named in the
/// module contracts gets its own subclass so callers can catch precisely.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define WAVEPIN_DEFINE_ERROR(Name)        \
  class Name : public Error {             \
   public:                                \
    explicit Name(const std::string& msg) \
        : Error(#Name ": " + msg) {}      \
  };

// kinetics
WAVEPIN_DEFINE_ERROR(NonFiniteInput)
WAVEPIN_DEFINE_ERROR(OutsideBistableRange)
WAVEPIN_DEFINE_ERROR(NoSignChange)
// front1d
WAVEPIN_DEFINE_ERROR(NoConvergence)
WAVEPIN_DEFINE_ERROR(DegenerateProfile)
WAVEPIN_DEFINE_ERROR(RangeError)
// geometry
WAVEPIN_DEFINE_ERROR(TooFewNodes)
WAVEPIN_DEFINE_ERROR(NonSimpleCurve)
WAVEPIN_DEFINE_ERROR(EndpointsOffBoundary)
WAVEPIN_DEFINE_ERROR(NotAttached)
WAVEPIN_DEFINE_ERROR(FitDegenerate)
// pde2d
WAVEPIN_DEFINE_ERROR(SolverDivergence)
WAVEPIN_DEFINE_ERROR(StabilityBoundViolated)
WAVEPIN_DEFINE_ERROR(InvalidGrid)
// fbp
WAVEPIN_DEFINE_ERROR(NoSolutionInRange)
WAVEPIN_DEFINE_ERROR(SelfIntersection)
WAVEPIN_DEFINE_ERROR(TopologyChange)
// reduced
WAVEPIN_DEFINE_ERROR(StepUnderflow)
WAVEPIN_DEFINE_ERROR(DegenerateCritical)
// cli / io
WAVEPIN_DEFINE_ERROR(ConfigError)
WAVEPIN_DEFINE_ERROR(FormatError)

#undef WAVEPIN_DEFINE_ERROR

}  // namespace wavepin

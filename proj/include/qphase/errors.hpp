#pragma once

#include <stdexcept>
#include <string>

namespace qphase {

// Base class for everything this library throws on purpose. Guard failures
// carry a specific subclass so callers (and the CLI exit-code mapping) can
// tell configuration mistakes from numerical-guard violations.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IndexError : Error { using Error::Error; };        // mode / level out of range
struct ScaleError : Error { using Error::Error; };        // matrix dimension cap exceeded
struct TruncationError : Error { using Error::Error; };   // Fock-space tail mass guard
struct DomainError : Error { using Error::Error; };       // invalid parameter value
struct MeasureError : Error { using Error::Error; };      // wrong density measure convention
struct OrderingError : Error { using Error::Error; };     // non-anti-normal operator in the Q pipeline
struct ExtentError : Error { using Error::Error; };       // grid too small for the requested operation
struct GeometryError : Error { using Error::Error; };     // pointer-region geometry guard
struct ConditioningError : Error { using Error::Error; }; // Bayesian update on a null region
struct SamplingError : Error { using Error::Error; };     // too few samples for a finite-difference check
struct UnsupportedError : Error { using Error::Error; };  // operation outside its supported domain
struct ParseError : Error { using Error::Error; };        // text mini-language errors

} // namespace qphase

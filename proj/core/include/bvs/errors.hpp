#pragma once

#include <stdexcept>
#include <string>

namespace bvs {

// Base class for every library error. The subclasses map onto the CLI exit
// codes: configuration problems (2), data problems (3), numerical failures (4).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error { using Error::Error; };      // invalid sampler settings
struct ShapeMismatch : Error { using Error::Error; };    // inconsistent array dimensions
struct DomainError : Error { using Error::Error; };      // value outside its valid range
struct ParseError : Error { using Error::Error; };       // malformed input file
struct MissingColumn : Error { using Error::Error; };    // named column absent from header
struct NumericalError : Error { using Error::Error; };   // factorization or overflow failure
struct TooLarge : Error { using Error::Error; };         // problem size beyond exact enumeration
struct QuadratureNotConverged : Error { using Error::Error; };
struct EmptyChain : Error { using Error::Error; };       // no retained samples

}  // namespace bvs

#ifndef CASCADE_ERRORS_HPP
#define CASCADE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cascade {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// geometry
struct ProfileOutsidePeriod : Error { using Error::Error; };
struct DegenerateCurve : Error { using Error::Error; };
struct NotOnBoundary : Error { using Error::Error; };

// mesh
struct MeshFailure : Error { using Error::Error; };
struct NoCutLine : Error { using Error::Error; };

// femspace / linear algebra
struct UnknownDOF : Error { using Error::Error; };
struct SingularSystem : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };

// lifting / tensor machinery
struct StripHitsProfile : Error { using Error::Error; };
struct AuxSolveFailure : Error { using Error::Error; };

// configuration
struct ParseError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };

}  // namespace cascade

#endif

#pragma once

#include <stdexcept>
#include <string>

namespace idsm {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidDomainError : Error { using Error::Error; };
struct MeshError : Error { using Error::Error; };
struct OutOfDomainError : Error { using Error::Error; };
struct DimensionError : Error { using Error::Error; };
struct CompatibilityError : Error { using Error::Error; };
struct SolverError : Error { using Error::Error; };
struct AdmissibilityError : Error { using Error::Error; };
struct DegenerateScalingError : Error { using Error::Error; };
struct GeometryError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct BundleMismatchError : Error { using Error::Error; };

struct NonlinearSolveError : SolverError {
    NonlinearSolveError(const std::string& what, double residual, int iterations)
        : SolverError(what), last_residual(residual), iterations(iterations) {}
    double last_residual;
    int iterations;
};

}  // namespace idsm

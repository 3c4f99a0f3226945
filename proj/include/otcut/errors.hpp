#pragma once
#include <stdexcept>
#include <string>

namespace otcut {

/// common base so callers can catch toolkit failures in one clause
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define OTCUT_DEFINE_ERROR(Name) \
    struct Name : Error { explicit Name(const std::string& msg) : Error(#Name ": " + msg) {} }

// measures
OTCUT_DEFINE_ERROR(NonNormalizable);
OTCUT_DEFINE_ERROR(OutOfRange);
OTCUT_DEFINE_ERROR(EmptyCutoff);
// costs
OTCUT_DEFINE_ERROR(UnknownCost);
// radial_ot
OTCUT_DEFINE_ERROR(DimensionMismatch);
OTCUT_DEFINE_ERROR(DivergentIntegral);
// rate_bounds
OTCUT_DEFINE_ERROR(NotBoundedBelow);
OTCUT_DEFINE_ERROR(BoundaryPoint);
OTCUT_DEFINE_ERROR(InfiniteMoment);
OTCUT_DEFINE_ERROR(BadAnchor);
OTCUT_DEFINE_ERROR(HypothesisViolated);
// pointwise_bounds
OTCUT_DEFINE_ERROR(ValidityExceeded);
OTCUT_DEFINE_ERROR(EmptyGrid);
// ma_solver
OTCUT_DEFINE_ERROR(DegenerateDomain);
// oracles
OTCUT_DEFINE_ERROR(LengthMismatch);
OTCUT_DEFINE_ERROR(UnknownCase);
// harness
OTCUT_DEFINE_ERROR(ConfigError);
OTCUT_DEFINE_ERROR(DegenerateFit);
OTCUT_DEFINE_ERROR(MissingColumn);
OTCUT_DEFINE_ERROR(EmptyData);

#undef OTCUT_DEFINE_ERROR

/// solver failure; keeps the iteration count and the last residual for diagnosis
struct NoConvergence : Error {
    NoConvergence(std::size_t iterations_, double residual_, const std::string& msg)
        : Error("NoConvergence: " + msg), iterations(iterations_), residual(residual_) {}
    std::size_t iterations;
    double residual;
};

} // namespace otcut

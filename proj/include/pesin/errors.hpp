#pragma once

#include <stdexcept>
#include <string>

namespace pesin {

// Base for all numeric/structural failures raised by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define PESIN_DEFINE_ERROR(NAME)                                          \
    struct NAME : Error {                                                  \
        explicit NAME(const std::string& what) : Error(#NAME ": " + what) {} \
    }

PESIN_DEFINE_ERROR(DegenerateSplitting);
PESIN_DEFINE_ERROR(NonSummable);
PESIN_DEFINE_ERROR(IllConditioned);
PESIN_DEFINE_ERROR(WindowTooShort);
PESIN_DEFINE_ERROR(DomainEscape);
PESIN_DEFINE_ERROR(NotContractive);
PESIN_DEFINE_ERROR(NoConvergence);
PESIN_DEFINE_ERROR(ImplicitSolveFailure);
PESIN_DEFINE_ERROR(AdmissibilityLost);
PESIN_DEFINE_ERROR(InfeasibleInput);
PESIN_DEFINE_ERROR(EmptyAlphabet);
PESIN_DEFINE_ERROR(NoVertexFound);
PESIN_DEFINE_ERROR(SplicingImpossible);
PESIN_DEFINE_ERROR(NotSameOrbit);
PESIN_DEFINE_ERROR(ConfigError);

#undef PESIN_DEFINE_ERROR

} // namespace pesin

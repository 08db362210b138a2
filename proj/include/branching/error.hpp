#pragma once

#include <stdexcept>
#include <string>

namespace branching {

// Base class for every error raised by the library. `kind()` is a stable
// machine-readable tag; `what()` carries the human-readable detail.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& detail)
        : std::runtime_error(kind + ": " + detail), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define BRANCHING_ERROR(Name)                                                 \
    class Name : public Error {                                               \
    public:                                                                   \
        explicit Name(const std::string& detail) : Error(#Name, detail) {}    \
    };

BRANCHING_ERROR(ConstraintViolated)
BRANCHING_ERROR(NotGood)
BRANCHING_ERROR(Infeasible)
BRANCHING_ERROR(AreaMismatch)
BRANCHING_ERROR(TooShort)
BRANCHING_ERROR(FluxMismatch)
BRANCHING_ERROR(ResolutionTooCoarse)
BRANCHING_ERROR(NotDivergenceFree)
BRANCHING_ERROR(DimMismatch)
BRANCHING_ERROR(BadScales)
BRANCHING_ERROR(ScalesInadmissible)
BRANCHING_ERROR(MixedRegimes)
BRANCHING_ERROR(TooFewPoints)
BRANCHING_ERROR(ConfigError)
BRANCHING_ERROR(IoError)

#undef BRANCHING_ERROR

}  // namespace branching

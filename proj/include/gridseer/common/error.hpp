#pragma once

#include <stdexcept>
#include <string>

namespace gridseer {

/// Base of every error thrown by the library. `code()` is a stable tag used
/// by the CLI diagnostics.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define GRIDSEER_DEFINE_ERROR(Name)                                          \
    class Name : public Error {                                              \
    public:                                                                  \
        explicit Name(const std::string& what) : Error(#Name, what) {}       \
    };

GRIDSEER_DEFINE_ERROR(ParseError)
GRIDSEER_DEFINE_ERROR(ValidationError)
GRIDSEER_DEFINE_ERROR(IoError)
GRIDSEER_DEFINE_ERROR(SingularNetwork)
GRIDSEER_DEFINE_ERROR(SingularJacobian)
GRIDSEER_DEFINE_ERROR(ShapeMismatch)
GRIDSEER_DEFINE_ERROR(DegenerateLabels)
GRIDSEER_DEFINE_ERROR(DegenerateData)
GRIDSEER_DEFINE_ERROR(ScalerNotFitted)
GRIDSEER_DEFINE_ERROR(TooManyGenerators)

#undef GRIDSEER_DEFINE_ERROR

/// Newton-Raphson ran out of iterations. Carries the last mismatch seen.
class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, double last_mismatch, int iterations)
        : Error("NonConvergence", what),
          last_mismatch_(last_mismatch),
          iterations_(iterations) {}
    double last_mismatch() const noexcept { return last_mismatch_; }
    int iterations() const noexcept { return iterations_; }

private:
    double last_mismatch_;
    int iterations_;
};

}  // namespace gridseer

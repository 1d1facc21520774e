#ifndef RADSING_ERRORS_HPP
#define RADSING_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace radsing {

// Base class for all library errors. Each concrete type corresponds to a
// documented failure mode of one operation; `code()` gives a stable
// machine-readable name used by the CLI's JSON error output.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define RADSING_DEFINE_ERROR(NAME)                                   \
    class NAME : public Error {                                      \
    public:                                                          \
        explicit NAME(const std::string& message)                    \
            : Error(#NAME, message) {}                               \
    }

RADSING_DEFINE_ERROR(InvalidParams);
RADSING_DEFINE_ERROR(CriticalPoint);
RADSING_DEFINE_ERROR(WrongTag);
RADSING_DEFINE_ERROR(SeedRadiusTooLarge);
RADSING_DEFINE_ERROR(EventNotBracketed);
RADSING_DEFINE_ERROR(NotAFixedPoint);
RADSING_DEFINE_ERROR(ComplexEigenvalueSelected);
RADSING_DEFINE_ERROR(UnsupportedTag);
RADSING_DEFINE_ERROR(SeedEscaped);
RADSING_DEFINE_ERROR(DriftDetected);
RADSING_DEFINE_ERROR(ContractionFailure);
RADSING_DEFINE_ERROR(BracketNotFound);
RADSING_DEFINE_ERROR(AsymptoteMiss);
RADSING_DEFINE_ERROR(NoConvergence);
RADSING_DEFINE_ERROR(WindowViolation);
RADSING_DEFINE_ERROR(WindowTooShort);
RADSING_DEFINE_ERROR(OrderOverflow);
RADSING_DEFINE_ERROR(RadiusTooLarge);
RADSING_DEFINE_ERROR(IoError);

#undef RADSING_DEFINE_ERROR

}  // namespace radsing

#endif

#pragma once

#include <stdexcept>
#include <string>

namespace annulus {

/// Base of every error raised by the toolkit. `code()` is a stable short tag
/// used in reports.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define ANNULUS_DEFINE_ERROR(Name)                                             \
    class Name : public Error {                                                \
    public:                                                                    \
        explicit Name(const std::string& what) : Error(#Name, what) {}         \
    }

ANNULUS_DEFINE_ERROR(MapRegistrationError);
ANNULUS_DEFINE_ERROR(ConfigError);
ANNULUS_DEFINE_ERROR(NonIsolatedFixedSet);
ANNULUS_DEFINE_ERROR(CurveHitsFixedPoint);
ANNULUS_DEFINE_ERROR(IndexHalvingError);
ANNULUS_DEFINE_ERROR(BoundaryFixedPoint);
ANNULUS_DEFINE_ERROR(NormalizationError);
ANNULUS_DEFINE_ERROR(NotCertifiablyFree);
ANNULUS_DEFINE_ERROR(RefinementOverflow);
ANNULUS_DEFINE_ERROR(WindowTooSmall);
ANNULUS_DEFINE_ERROR(NoSeparatingComponent);
ANNULUS_DEFINE_ERROR(TauOverlap);
ANNULUS_DEFINE_ERROR(HorizonOverflow);
ANNULUS_DEFINE_ERROR(NotProper);
ANNULUS_DEFINE_ERROR(CertificateFailure);

#undef ANNULUS_DEFINE_ERROR

}  // namespace annulus

#ifndef CTQW_ERROR_HPP
#define CTQW_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace ctqw {

enum class ErrorKind {
    ZeroCoupling,
    BadSize,
    SizeMismatch,
    InvalidConfig,
    NonFiniteDetected,
    NonPositiveS,
    ZeroPhi0,
    NotNormalizable,
    NonUniformGrid,
    TailDominates,
    EmptyWindow,
    FrontReachedBoundary,
};

constexpr std::string_view to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::ZeroCoupling: return "ZeroCoupling";
    case ErrorKind::BadSize: return "BadSize";
    case ErrorKind::SizeMismatch: return "SizeMismatch";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::NonFiniteDetected: return "NonFiniteDetected";
    case ErrorKind::NonPositiveS: return "NonPositiveS";
    case ErrorKind::ZeroPhi0: return "ZeroPhi0";
    case ErrorKind::NotNormalizable: return "NotNormalizable";
    case ErrorKind::NonUniformGrid: return "NonUniformGrid";
    case ErrorKind::TailDominates: return "TailDominates";
    case ErrorKind::EmptyWindow: return "EmptyWindow";
    case ErrorKind::FrontReachedBoundary: return "FrontReachedBoundary";
    }
    return "Unknown";
}

/// Every failure raised by the library. `field()` names the offending input
/// (e.g. "gamma0", "config.dt") when one can be identified.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string field, const std::string& message)
        : std::runtime_error(field.empty() ? message : field + ": " + message),
          kind_(kind), field_(std::move(field))
    {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& field() const noexcept { return field_; }

private:
    ErrorKind kind_;
    std::string field_;
};

} // namespace ctqw

#endif // CTQW_ERROR_HPP

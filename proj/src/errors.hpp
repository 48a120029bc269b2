#pragma once

#include <stdexcept>
#include <string>

namespace situ3d {

/// Base for all library errors surfaced across the C API boundary.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Scene file or record failed schema validation.
struct LoadError : Error {
    using Error::Error;
};

/// Bad configuration value or unusable endpoint settings (4xx-class).
struct ConfigError : Error {
    using Error::Error;
};

/// Transport-level failure after retries were exhausted.
struct InfraError : Error {
    using Error::Error;
};

/// A scene-query API call was given bad arguments; the message is meant
/// to be fed back to the model verbatim.
struct ApiError : Error {
    using Error::Error;
};

/// Degenerate geometric input (e.g. vertical facing direction).
struct GeometryError : Error {
    using Error::Error;
};

}  // namespace situ3d

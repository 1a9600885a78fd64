#pragma once

#include <stdexcept>
#include <string>

namespace lsgb {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad user input: malformed config, out-of-range parameters.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Energy or lambda ratio outside the non-wetting regime.
class WettingLimitError : public ConfigError {
public:
    explicit WettingLimitError(const std::string& what)
        : ConfigError("wetting limit: " + what) {}
};

/// Invalid interface geometry (degenerate segments, no interface, ...).
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Linear solver failure or non-finite field during time stepping.
class SolverError : public Error {
public:
    using Error::Error;
};

/// A measurement could not be taken from the current fields.
class MeasurementError : public Error {
public:
    using Error::Error;
};

}  // namespace lsgb

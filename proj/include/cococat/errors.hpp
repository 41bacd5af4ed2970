#pragma once

#include <stdexcept>
#include <string>

namespace cococat {

/// Invalid or inconsistent configuration. `field()` is the dotted JSON path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// A model quantity left its admissible domain (e.g. a non-positive
/// transformed drift coefficient).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cococat

#pragma once

#include <stdexcept>
#include <string>

namespace incdisf {

// Error taxonomy shared across the library. CLI maps these to exit codes:
// usage -> 1, data/format -> 2, numerical -> 3.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct MalformedAnnotation : std::runtime_error {
    explicit MalformedAnnotation(const std::string& msg) : std::runtime_error(msg) {}
};

struct MalformedTags : std::runtime_error {
    explicit MalformedTags(const std::string& msg) : std::runtime_error(msg) {}
};

struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace incdisf

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace obbgen {

// Root of every error the library throws. Input errors (bad files, bad
// arguments, bad config) derive from InputError so drivers can map them to a
// distinct exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InputError : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public InputError {
public:
    using InputError::InputError;
};

class DegenerateGeometry : public Error {
public:
    using Error::Error;
};

// Raised when a PCA neighborhood carries no probability mass.
class EmptyNeighborhood : public Error {
public:
    using Error::Error;
};

class PlacementExhausted : public InputError {
public:
    using InputError::InputError;
};

class InvalidEstimate : public Error {
public:
    using Error::Error;
};

class LookupError : public InputError {
public:
    using InputError::InputError;
};

/// Text parse failure with a 1-based line number.
class ParseError : public InputError {
public:
    ParseError(std::size_t line, const std::string& reason)
        : InputError("line " + std::to_string(line) + ": " + reason), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Binary container failure with the byte offset where it was detected.
class FormatError : public InputError {
public:
    FormatError(std::size_t offset, const std::string& reason)
        : InputError("offset " + std::to_string(offset) + ": " + reason), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class ConfigError : public InputError {
public:
    ConfigError(const std::string& key, const std::string& reason)
        : InputError("config key '" + key + "': " + reason), key_(key) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace obbgen

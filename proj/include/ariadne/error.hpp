// include/ariadne/error.hpp
// Exception types shared by every module. The CLI maps each family onto an
// exit code (config 2, data 3, numeric 4).
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ariadne {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration or argument values.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed or inconsistent input data (files, masks, shapes).
class DataError : public Error {
public:
    using Error::Error;
};

class ShapeError : public DataError {
public:
    using DataError::DataError;
};

class ParseError : public DataError {
public:
    ParseError(const std::string& detail, std::size_t offset)
        : DataError(detail + " (at byte offset " + std::to_string(offset) + ")"),
          detail_(detail), offset_(offset) {}

    const std::string& detail() const noexcept { return detail_; }
    std::size_t offset() const noexcept { return offset_; }

private:
    std::string detail_;
    std::size_t offset_;
};

// Non-finite losses or gradients; training aborts loudly.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace ariadne

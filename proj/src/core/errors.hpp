#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace resilience {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t offset)
        : Error(msg + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

// Evaluation outside the mathematical or declared parameter domain.
class DomainError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

// Step size fell below the representable resolution of t.
class StiffnessError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& key_path, const std::string& msg)
        : Error(key_path.empty() ? msg : key_path + ": " + msg), key_path_(key_path) {}
    const std::string& key_path() const noexcept { return key_path_; }

private:
    std::string key_path_;
};

}  // namespace resilience

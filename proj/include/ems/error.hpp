#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace ems {

// Bad argument to a pure function (out-of-range weight, non-finite input, ...).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed or out-of-range run configuration. `key()` names the offending
// "section.key" when one is known.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& message)
        : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

// Problems with input data: schema mismatch, unparseable cells, degenerate labels.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& message) : std::runtime_error(message) {}
    DataError(std::size_t row, const std::string& message)
        : std::runtime_error("row " + std::to_string(row) + ": " + message), row_(row) {}
    std::optional<std::size_t> row() const noexcept { return row_; }

private:
    std::optional<std::size_t> row_;
};

class SchemaError : public DataError {
public:
    using DataError::DataError;
};

class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ems

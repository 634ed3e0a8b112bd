#pragma once

#include <stdexcept>
#include <string>

namespace pax {

// Base for everything thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user-supplied configuration (hyperparameters, roster, flags).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed or out-of-order traffic between aggregator and parties.
class ProtocolError : public Error {
public:
    using Error::Error;
};

// Inputs whose shapes do not line up (feature counts, bin schemas).
class DimensionError : public Error {
public:
    using Error::Error;
};

// Labels outside the domain of the configured loss.
class LabelError : public Error {
public:
    using Error::Error;
};

// CSV parse failures; carries the offending location.
class IngestError : public Error {
public:
    IngestError(const std::string& msg, std::size_t row, std::size_t col)
        : Error(msg + " (row " + std::to_string(row) + ", column " + std::to_string(col) + ")"),
          row_(row),
          col_(col) {}
    explicit IngestError(const std::string& msg) : Error(msg), row_(0), col_(0) {}

    std::size_t row() const { return row_; }
    std::size_t col() const { return col_; }

private:
    std::size_t row_;
    std::size_t col_;
};

// Train/test draws that cannot be satisfied by the pool.
class SamplingError : public Error {
public:
    using Error::Error;
};

}  // namespace pax

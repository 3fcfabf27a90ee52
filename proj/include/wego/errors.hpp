#pragma once

#include <stdexcept>
#include <string>

namespace wego {

// Malformed input data: bad file, invariant violation in a story, shape mismatch.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric failure: non-finite values where finite ones are required.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace wego

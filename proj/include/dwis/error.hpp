#pragma once

#include <stdexcept>
#include <string>

namespace dwis {

/// Raised when an operation receives arguments outside its domain.
class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when a numerical procedure cannot produce a finite, trustworthy result.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void require(bool condition, const std::string& message) {
    if (!condition) throw ParameterError(message);
}

} // namespace detail
} // namespace dwis

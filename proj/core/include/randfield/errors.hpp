#pragma once

#include <stdexcept>
#include <string>

namespace randfield {

// Raised for invalid configuration / violated model assumptions.
// The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Raised for numerical failures at run time (blow-up, Cholesky breakdown).
// The CLI maps this to exit code 3.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace randfield

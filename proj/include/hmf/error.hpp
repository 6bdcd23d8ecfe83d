#pragma once
#include <stdexcept>
#include <string>

namespace hmf {

// Error taxonomy used across the library.  The CLI maps these onto process
// exit codes: config/usage problems -> 1, numerical failures -> 2.

// Bad user input: malformed config, out-of-range parameter, unknown key.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A routine was called outside its domain of validity (e.g. gamma <= 1,
// evaluation left of the initial time, too few grid points).
struct domain_error : std::runtime_error {
    explicit domain_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A numerical procedure failed to converge or produced non-finite values:
// diverging fixed-point iteration, Newton stagnation, quadrature failure.
struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace hmf

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pieces {

// Construction regime violated: l_{rho,U} = l_rho - (4M+6) rho <= 0.
struct DensityTooLargeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A quadrature or eigensolve did not reach its tolerance.
struct NumericalFailure : std::runtime_error {
    double residual;
    explicit NumericalFailure(const std::string& what, double res = 0.0)
        : std::runtime_error(what), residual(res) {}
};

// Requested particle count cannot be realized under the occupation caps.
struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Level index beyond what the chain can hold (strict capacity mode).
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Enumeration guard tripped.
struct TooLargeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Root finder bracket does not contain the target.
struct NoRootError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kPiSq = kPi * kPi;

}  // namespace pieces

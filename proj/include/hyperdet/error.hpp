#pragma once

#include <stdexcept>
#include <string>

namespace hyperdet {

// Input data violates a file schema or a domain invariant. CLI maps this to exit 1.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Run configuration is invalid. CLI maps this to exit 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An iterative optimizer ran past its iteration cap. Carries best-so-far diagnostics.
class TrainError : public std::runtime_error {
public:
    TrainError(const std::string& msg, double best_residual, long iterations)
        : std::runtime_error(msg), best_residual(best_residual), iterations(iterations) {}
    double best_residual;
    long iterations;
};

}  // namespace hyperdet

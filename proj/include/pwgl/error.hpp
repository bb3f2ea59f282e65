#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pwgl {

/// Broad failure category; the CLI maps each one onto a process exit code.
enum class ErrorKind { config, data, solver };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

struct DataError : Error {
    explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

/// Raised when an iterative solve fails; carries the last relative residual.
struct SolverError : Error {
    SolverError(const std::string& what, double residual, std::vector<double> history = {})
        : Error(ErrorKind::solver, what), residual(residual), history(std::move(history)) {}
    double residual;
    std::vector<double> history;
};

inline int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::config: return 2;
    case ErrorKind::data: return 3;
    case ErrorKind::solver: return 4;
    }
    return 1;
}

} // namespace pwgl

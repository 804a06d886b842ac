#pragma once

#include <stdexcept>
#include <string>

namespace densadapt {

/// Invalid mesh data: out-of-range face indices, degenerate faces, isolated vertices.
class MeshError : public std::runtime_error {
public:
    explicit MeshError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid configuration or usage: bad parameter values, mismatched counts,
/// degenerate landmark configurations. CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure: singular factorization, NaN/Inf during optimization.
/// CLI maps this to exit code 1.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

/// File read/write or parse failure. CLI maps this to exit code 2.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace densadapt

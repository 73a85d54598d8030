#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace mueit {

/// Bad input: invalid parameters, mismatched grids, malformed files.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Linear solver breakdown or a residual above tolerance.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual)
        : std::runtime_error(what + " (relative residual " + format(residual) + ")"),
          residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    static std::string format(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3e", v);
        return buf;
    }

    double residual_;
};

} // namespace mueit

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lchomog {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidShape : public Error {
public:
    using Error::Error;
};

class DisconnectedFluid : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& what)
        : Error(what), offset_(offset), expected_(std::move(expected)) {}

    std::size_t offset() const { return offset_; }
    const std::vector<std::string>& expected() const { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

class UnknownIdentifier : public Error {
public:
    UnknownIdentifier(std::size_t offset, std::string name)
        : Error("unknown identifier '" + name + "' at offset " + std::to_string(offset)),
          offset_(offset), name_(std::move(name)) {}

    std::size_t offset() const { return offset_; }
    const std::string& name() const { return name_; }

private:
    std::size_t offset_;
    std::string name_;
};

class EvalError : public Error {
public:
    using Error::Error;
};

/// An iterative solve stopped at its iteration cap. `secondary_residual`
/// carries the divergence residual for saddle-point solves.
class NoConvergence : public Error {
public:
    NoConvergence(int iterations, double residual_ratio, double secondary_residual = 0.0)
        : Error("no convergence after " + std::to_string(iterations) +
                " iterations (residual ratio " + std::to_string(residual_ratio) + ")"),
          iterations_(iterations), residual_ratio_(residual_ratio),
          secondary_residual_(secondary_residual) {}

    int iterations() const { return iterations_; }
    double residual_ratio() const { return residual_ratio_; }
    double secondary_residual() const { return secondary_residual_; }

private:
    int iterations_;
    double residual_ratio_;
    double secondary_residual_;
};

class IncompatibleRhs : public Error {
public:
    using Error::Error;
};

class DegenerateCell : public Error {
public:
    using Error::Error;
};

class InvariantViolation : public Error {
public:
    using Error::Error;
};

class MaxPrincipleViolation : public Error {
public:
    MaxPrincipleViolation(double time, double max_abs_d)
        : Error("|d| = " + std::to_string(max_abs_d) + " exceeds 1 at t = " + std::to_string(time)),
          time_(time), max_abs_d_(max_abs_d) {}

    double time() const { return time_; }
    double max_abs_d() const { return max_abs_d_; }

private:
    double time_;
    double max_abs_d_;
};

class NotSpd : public Error {
public:
    using Error::Error;
};

class ZeroGradient : public Error {
public:
    using Error::Error;
};

class NoValidPairs : public Error {
public:
    using Error::Error;
};

/// Configuration problem located by a JSON pointer such as "/shape/radius".
class ConfigError : public Error {
public:
    ConfigError(std::string pointer, const std::string& message)
        : Error(pointer + ": " + message), pointer_(std::move(pointer)) {}

    const std::string& pointer() const { return pointer_; }

private:
    std::string pointer_;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace lchomog

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace maxlump {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Operand dimensions do not conform.
class ShapeError : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

/// An element with non-positive affine determinant.
class OrientationError : public Error {
public:
    OrientationError(std::size_t element, double det)
        : Error("element " + std::to_string(element) + " has non-positive orientation (det = " +
                std::to_string(det) + ")"),
          element_(element) {}
    std::size_t element() const noexcept { return element_; }

private:
    std::size_t element_;
};

/// Malformed input text; carries the 1-based line number (0 if unknown).
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A vertex block of the lumped mass matrix that is not positive definite.
class DegeneracyError : public Error {
public:
    DegeneracyError(std::size_t vertex, const std::string& what)
        : Error("vertex " + std::to_string(vertex) + ": " + what), vertex_(vertex) {}
    std::size_t vertex() const noexcept { return vertex_; }

private:
    std::size_t vertex_;
};

/// An iterative method missed its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Non-finite or runaway field values, typically a CFL violation.
class BlowupError : public Error {
public:
    explicit BlowupError(std::size_t step)
        : Error("solution blew up at step " + std::to_string(step)), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace maxlump

#pragma once

#include <stdexcept>
#include <string>

namespace freeconv {

/// Malformed expression text, bad pencil file, invalid config.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string msg, std::size_t position)
        : std::runtime_error(std::move(msg)), pos_(position) {}
    explicit ParseError(std::string msg)
        : std::runtime_error(std::move(msg)), pos_(std::string::npos) {}

    /// Character offset into the input, or npos when not applicable.
    std::size_t position() const noexcept { return pos_; }

private:
    std::size_t pos_;
};

/// Numerical failure: singular matrix, fixed point not converging,
/// iterate leaving the matrix upper half-plane, quadrature cap hit.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Violated precondition on a library call (dimension mismatch,
/// missing assignment, argument outside the supported domain).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace freeconv

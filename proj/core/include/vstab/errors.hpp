#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace vstab {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument left the domain of an operation (negative where nonnegative
/// is required, NaN, out-of-range contraction level, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Two grid functions with different (a, b, n) were combined.
class NonConformable : public Error {
public:
    using Error::Error;
};

/// A sequence handed to a nonincreasing-sequence check was not nonincreasing.
class NotNonincreasing : public Error {
public:
    using Error::Error;
};

/// Scaling phi by K would produce a factor with supremum >= 1, so the
/// contraction hypothesis delta < 1 cannot hold.
class ContractionViolation : public Error {
public:
    using Error::Error;
};

/// Kernel expression text could not be parsed. Carries the byte offset of
/// the offending token and the set of tokens that would have been accepted.
class ParseError : public Error {
public:
    ParseError(std::size_t offset, std::vector<std::string> expected);

    std::size_t offset() const { return offset_; }
    const std::vector<std::string>& expected() const { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

/// Kernel evaluation failed (division by zero, non-finite intermediate).
class EvalError : public Error {
public:
    using Error::Error;
};

/// An iterate (or candidate) has a node value outside the disk |y| <= R on
/// which the Lipschitz hypothesis was declared or sampled.
class IterateEscapedDisk : public Error {
public:
    IterateEscapedDisk(std::size_t node, double magnitude, double radius);

    std::size_t node() const { return node_; }
    double magnitude() const { return magnitude_; }

private:
    std::size_t node_;
    double magnitude_;
};

/// A candidate solution file does not match the problem grid.
class GridMismatch : public Error {
public:
    using Error::Error;
};

/// The self-map passed to the fixed-point engine failed at some iteration.
class IterationAborted : public Error {
public:
    IterationAborted(std::size_t failing_index, const std::string& cause);

    std::size_t failing_index() const { return failing_index_; }

private:
    std::size_t failing_index_;
};

/// Problem/phi configuration file errors, located by line and key path.
class ConfigError : public Error {
public:
    ConfigError(std::string file, std::size_t line, std::string key_path,
                const std::string& message);

    const std::string& file() const { return file_; }
    std::size_t line() const { return line_; }
    const std::string& key_path() const { return key_path_; }

private:
    std::string file_;
    std::size_t line_;
    std::string key_path_;
};

} // namespace vstab

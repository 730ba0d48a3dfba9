#pragma once

#include <stdexcept>
#include <string>

namespace finality {

// Base for every error raised by the library. The CLI maps these to exit status 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller-supplied value outside its documented domain.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// No confirmation depth up to the search limit satisfies P_rev(d) <= LT(v).
class NoDepthSatisfies : public Error {
public:
    NoDepthSatisfies(double value, unsigned searched_to)
        : Error("no confirmation depth <= " + std::to_string(searched_to) +
                " satisfies the loss threshold for value " + std::to_string(value)),
          value_(value), searched_to_(searched_to) {}

    double value() const noexcept { return value_; }
    unsigned searched_to() const noexcept { return searched_to_; }

private:
    double value_;
    unsigned searched_to_;
};

// Revocation estimate requested from a run in which no block ever reached depth 1.
class EmptyObservations : public Error {
public:
    using Error::Error;
};

// Broken block tree (missing parent link). Indicates a bug, not bad input.
class StructuralFault : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Malformed CSV input. Carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class MalformedRow : public ParseError {
public:
    using ParseError::ParseError;
};

class EmptyTable : public Error {
public:
    using Error::Error;
};

class DuplicatePool : public Error {
public:
    using Error::Error;
};

// Filesystem failure while writing results; message includes the path.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace finality
